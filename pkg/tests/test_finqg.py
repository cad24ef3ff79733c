import copy
from fractions import Fraction
from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm, logm

from aqg import finqg, instances, linalg
from aqg.finqg import StructureError

S3 = sorted(permutations(range(3)))


def compose_perm(s, t):
    return tuple(s[t[i]] for i in range(3))


def inverse_perm(s):
    out = [0] * 3
    for i, si in enumerate(s):
        out[si] = i
    return tuple(out)


def dense(spec, x):
    return np.array([complex(c) for c in x])


@pytest.mark.parametrize("name", sorted(instances.BUILDERS))
def test_bundled_instances_validate(name):
    rep = finqg.validate_structure(instances.BUILDERS[name]())
    assert rep.passed, rep.to_text()
    n = instances.BUILDERS[name]().dim
    assert rep.notes["rank_T1"] == rep.notes["rank_T2"] == n * n


def test_f_s3_t1_rank_is_36():
    spec = instances.f_s3()
    assert linalg.rank(finqg.t_matrix(spec, 1)) == 36


def test_non_associative_table_is_rejected_with_triple():
    spec = instances.c_s3()
    bad = copy.deepcopy(spec)
    bad.mult[1][1] = {2: Fraction(1)}           # corrupt one product of two basis permutations
    rep = finqg.validate_structure(bad)
    assoc = rep.entry("associativity")
    assert not assoc.passed and assoc.residual > 0
    assert assoc.witness.startswith("(") and assoc.witness.count(",") == 2
    with pytest.raises(StructureError, match="associativity"):
        finqg.require_valid(bad)


def test_broken_coproduct_fails_bijectivity():
    spec = instances.c_z2()
    spec.comult[1] = {(1, 0): Fraction(1)}      # D g = g (x) e
    rep = finqg.validate_structure(spec)
    assert rep.entry("T1_bijective").residual == 2
    assert rep.entry("coassociativity").passed


def test_kac_paljutkin_counit_is_a_character():
    spec = instances.kac_paljutkin()
    eps = finqg.solve_counit(spec).covector
    assert eps[0] == 1
    for i, j in product(range(8), repeat=2):
        assert finqg.evaluate(eps, spec.mul(spec.basis(i), spec.basis(j))) == eps[i] * eps[j]
    assert all(v in (0, 1) for v in eps)


def test_f_s3_antipode_is_group_inverse():
    spec = instances.f_s3()
    S = finqg.solve_antipode(spec, finqg.solve_counit(spec))
    for i, s in enumerate(S3):
        expected = spec.basis(S3.index(inverse_perm(s)))
        assert finqg.apply(S, spec.basis(i)) == expected


def test_f_s3_comultiplication_matches_group_law():
    spec = instances.f_s3()
    for k, s in enumerate(S3):
        pairs = {(S3.index(u), S3.index(v)) for u, v in product(S3, repeat=2) if compose_perm(u, v) == s}
        assert set(spec.comul(spec.basis(k))) == pairs


def test_f_s3_haar_is_counting_measure(pipelines):
    assert pipelines["f_s3"].phi.covector == [Fraction(1, 6)] * 6


def test_c_s3_haar_is_trace_at_identity(pipelines):
    assert pipelines["c_s3"].phi.covector == [1, 0, 0, 0, 0, 0]


def test_kac_paljutkin_haar_against_float_nullspace(pipelines):
    # independent route: float SVD nullspace of left invariance, normalised at 1
    spec = instances.kac_paljutkin()
    n = spec.dim
    # (i (x) phi)D(e_i) = phi(e_i) 1  <=>  sum_k D_i[(b, k)] phi_k = phi_i [b == unit]
    a = []
    for i in range(n):
        for b in range(n):
            row = np.zeros(n)
            for (j, k), c in spec.comul(spec.basis(i)).items():
                if j == b:
                    row[k] += float(c)
            row[i] -= float(spec.unit.get(b, 0))
            a.append(row)
    _, sv, vt = np.linalg.svd(np.array(a))
    null = vt[-1] / vt[-1][0]
    assert sv[-2] > 1e-8 and sv[-1] < 1e-12         # one-dimensional
    phi = np.array([float(c) for c in pipelines["kac_paljutkin"].phi.covector])
    assert np.allclose(phi, null, atol=1e-12)
    assert list(pipelines["kac_paljutkin"].phi.covector) == [1, 0, 0, 0, 0, 0, 0, 0]
    assert pipelines["kac_paljutkin"].phi.meta["min_eigenvalue"] > 1e-10


def test_kac_collapse(pipe):
    md = pipe.modular
    n = pipe.spec.dim
    assert md.rho == finqg.identity(n)
    assert md.delta == pipe.spec.unit_vec()
    assert md.mu == 1
    assert finqg.compose(md.S, md.S) == finqg.identity(n)
    assert finqg.modular_report(pipe.spec, pipe.phi, md).passed


def test_haar_solution_space_is_one_dimensional(pipe):
    a = finqg.invariance_system(pipe.spec, "left")
    assert len(linalg.nullspace(a, pipe.spec.dim)) == 1


def test_f_s3_gram_and_nabla(pipelines):
    p = pipelines["f_s3"]
    assert p.gns.gram == [[Fraction(1, 6) if i == j else 0 for j in range(6)] for i in range(6)]
    assert p.gns.nabla == finqg.identity(6)


def test_sigma_matches_matrix_exponential(pipe):
    nabla = linalg.to_array(pipe.gns.nabla)
    log = logm(nabla) if np.any(nabla != np.eye(len(nabla))) else np.zeros_like(nabla)
    for z in (1, -1j, 0.5 + 1j / 3, 2j):
        assert np.max(np.abs(pipe.gns.nabla_power(z) - expm(1j * z * log))) < 1e-12


def test_gns_report_passes(pipe):
    from aqg.oneparam import DEFAULT_Z_GRID
    rep = finqg.gns_report(pipe.spec, pipe.phi, pipe.modular, pipe.gns, DEFAULT_Z_GRID)
    assert rep.passed, rep.to_text()


def test_conjugation_is_star_in_kac_case(pipe):
    spec = pipe.spec
    for i in range(spec.dim):
        x = spec.basis(i)
        assert np.allclose(pipe.gns.conj_j(x, spec), dense(spec, spec.star_vec(x)), atol=1e-12)


def test_dual_of_c_z2_is_functions_on_z2(pipelines):
    p = pipelines["c_z2"]
    dual = finqg.dualize(p.spec, p.phi).spec
    # brute-force convolution of the hat basis: hat e_i (x) = phi(x e_i)
    hats = [finqg.fourier_covector(p.spec, p.phi.covector, p.spec.basis(i)) for i in range(2)]
    for i, j in product(range(2), repeat=2):
        conv = [sum(c * hats[i][a] * hats[j][b] for (a, b), c in p.spec.comul(p.spec.basis(x)).items())
                for x in range(2)]
        via_dual = [sum(c * hats[k][x] for k, c in dual.mult[i][j].items()) for x in range(2)]
        assert conv == via_dual
    assert finqg.validate_structure(dual).passed
    assert all(dual.mult[i][j] == dual.mult[j][i] for i, j in product(range(2), repeat=2))


def test_dual_of_f_s3_has_group_algebra_constants(pipelines):
    p = pipelines["f_s3"]
    dual = finqg.dualize(p.spec, p.phi).spec
    # hat d_s = d_s phi = d_s / 6 as a functional, so (6 hat d_s)(6 hat d_t) = 6 hat d_{st}
    for i, j in product(range(6), repeat=2):
        st_ = S3.index(compose_perm(S3[i], S3[j]))
        assert {k: 6 * v for k, v in dual.mult[i][j].items()} == {st_: Fraction(1)}


def test_fourier_is_injective_on_c_s3(pipelines):
    p = pipelines["c_s3"]
    pair = finqg.dualize(p.spec, p.phi).pairing
    assert linalg.rank(pair) == 6


def test_plancherel_on_c_z2_example(pipelines):
    p = pipelines["c_z2"]
    dd = finqg.dualize(p.spec, p.phi)
    a = [Fraction(1), Fraction(1)]                 # e + g
    a_hat = finqg.apply(dd.pairing_inv, finqg.fourier_covector(p.spec, p.phi.covector, a))
    lhs = finqg.evaluate(dd.psi_hat.covector, dd.spec.mul(dd.spec.star_vec(a_hat), a_hat))
    rhs = finqg.evaluate(p.phi.covector, p.spec.mul(p.spec.star_vec(a), a))
    assert lhs == rhs == 2


def test_duality_report_passes(pipe):
    rep = finqg.duality_report(pipe.spec, pipe.phi)
    assert rep.passed, rep.to_text()


@pytest.mark.parametrize("name", ["c_z2", "f_s3", "kac_paljutkin", "c_s3", "f_z2"])
def test_bidual_is_exact_isomorphism(name, pipelines):
    rep = finqg.bidual_check(pipelines[name].spec, pipelines[name].phi)
    assert rep.passed and rep.max_residual() == 0, rep.to_text()


small_ints = st.integers(min_value=-3, max_value=3)


def vectors(n):
    return st.lists(small_ints.map(Fraction), min_size=n, max_size=n)


@settings(max_examples=40, deadline=None)
@given(vectors(8), vectors(8))
def test_kac_paljutkin_random_elements(x, y):
    spec = instances.kac_paljutkin()
    star, mul = spec.star_vec, spec.mul
    assert star(mul(x, y)) == mul(star(y), star(x))
    assert finqg.tensor_diff(spec.comul(mul(x, y)), spec.tensor_mul(spec.comul(x), spec.comul(y))) == 0
    S = finqg.solve_antipode(spec, finqg.solve_counit(spec))
    assert finqg.apply(S, mul(x, y)) == mul(finqg.apply(S, y), finqg.apply(S, x))
    phi = [1, 0, 0, 0, 0, 0, 0, 0]
    assert finqg.evaluate(phi, mul(star(x), x)) >= 0
    assert (finqg.evaluate(phi, mul(star(x), x)) == 0) == all(c == 0 for c in x)


@settings(max_examples=40, deadline=None)
@given(vectors(6), vectors(6))
def test_kms_condition_random_elements(x, y):
    spec = instances.c_s3()
    phi = [1, 0, 0, 0, 0, 0]
    # rho = i for the Kac case: phi(ab) = phi(ba)
    assert finqg.evaluate(phi, spec.mul(x, y)) == finqg.evaluate(phi, spec.mul(y, x))
