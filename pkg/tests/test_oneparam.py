from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqg import duality, oneparam
from aqg.oneparam import (DEFAULT_Z_GRID, FiniteModel, SpectralGroup, Suq2Model, UnitaryRep, build_p_operator,
                          check_group_laws, compute_lambda, evaluate_group, p_operator_check, parse_z_grid,
                          rebuild_from_i, uniqueness_check, unitary_rep_check)
from aqg.suq2 import GENERATORS, NcPoly, SUq2

HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def model():
    return Suq2Model(SUq2(HALF), 4)


def finite_model(pipe):
    return FiniteModel(pipe.spec, pipe.phi.covector, pipe.gns.inner)


def sigma_group(pipe):
    return SpectralGroup.from_eigen(pipe.gns.eigenvectors, pipe.gns.eigenvalues, "sigma")


def test_parse_z_grid():
    assert parse_z_grid("default") == DEFAULT_Z_GRID
    assert len(DEFAULT_Z_GRID) == 8
    assert parse_z_grid("0, 1, -0.5j, 0.5+0.25i") == (0, 1, -0.5j, 0.5 + 0.25j)
    with pytest.raises(ValueError):
        parse_z_grid("1, nope")


def test_evaluate_at_zero_is_identity():
    g = SpectralGroup.diagonal([2.0, 0.5, 3.0])
    v = np.array([1.0, -2.0, 0.5j])
    assert np.allclose(evaluate_group(g, 0, v), v)


def test_eigenvalue_four_at_minus_i():
    g = SpectralGroup.diagonal([4.0, 1.0])
    assert np.allclose(evaluate_group(g, -1j, [1, 0]), [4, 0])


def test_tau_at_minus_i_on_c(model):
    tau = model.group("tau")
    c = model.from_poly(NcPoly.term(GENERATORS["c"]))
    s2 = model.from_poly(model.engine.s_squared(NcPoly.term(GENERATORS["c"])))
    assert np.allclose(evaluate_group(tau, -1j, c), s2, atol=1e-15)
    assert np.allclose(evaluate_group(tau, -1j, c), 0.25 * c)


def test_identity_group_on_c_z2(pipelines):
    pipe = pipelines["c_z2"]
    rep = check_group_laws(SpectralGroup.diagonal([1.0, 1.0], "id"), finite_model(pipe), DEFAULT_Z_GRID)
    assert rep.passed and rep.max_residual() == 0


def test_sigma_laws_on_finite_instances(pipe):
    rep = check_group_laws(sigma_group(pipe), finite_model(pipe), DEFAULT_Z_GRID)
    assert rep.passed and rep.max_residual() < 1e-12, rep.to_text()


@pytest.mark.parametrize("kind", ["tau", "sigma"])
def test_suq2_group_laws(model, kind):
    rep = check_group_laws(model.group(kind), model, DEFAULT_Z_GRID)
    assert rep.passed and rep.max_residual() < 1e-9, rep.to_text()


def test_sigma_lambda_is_one(pipe):
    lam, rep = compute_lambda(sigma_group(pipe), finite_model(pipe).phi(), DEFAULT_Z_GRID)
    assert lam == pytest.approx(1, abs=1e-12) and rep.passed


def test_tau_nu_is_one_to_degree_six():
    m = Suq2Model(SUq2(HALF), 6)
    lam, rep = compute_lambda(m.group("tau"), m.phi(), DEFAULT_Z_GRID)
    assert lam == pytest.approx(1, abs=1e-12) and rep.passed


def test_synthetic_lambda_two():
    # phi lives on the first line, where the group scales by 2^z
    g = SpectralGroup.diagonal([1.0, 3.0], "scaled", scalings=[2.0, 1.0])
    lam, rep = compute_lambda(g, np.array([1.0, 0.0]), DEFAULT_Z_GRID)
    assert lam == pytest.approx(2) and rep.passed


def test_non_constant_ratio_is_rejected():
    g = SpectralGroup.diagonal([1.0, 1.0], scalings=[2.0, 3.0])
    with pytest.raises(oneparam.NotRelativelyInvariant):
        compute_lambda(g, np.array([1.0, 1.0]))


def test_p_operator_of_identity_group():
    g = SpectralGroup.diagonal([1.0, 1.0, 1.0])
    p = build_p_operator(g, 1.0, np.eye(3))
    assert np.allclose(p.matrix(), np.eye(3))
    rep = p_operator_check(g, 1.0, np.eye(3), DEFAULT_Z_GRID)
    assert rep.max_residual() == 0


def test_p_operator_is_nabla_on_kac_paljutkin(pipelines):
    pipe = pipelines["kac_paljutkin"]
    m = finite_model(pipe)
    nabla = np.array([[complex(c) for c in row] for row in pipe.gns.nabla])
    rep = p_operator_check(sigma_group(pipe), 1.0, m.inner(), DEFAULT_Z_GRID, nabla=nabla)
    assert rep.passed and rep.max_residual() < 1e-12


def test_synthetic_eigenvalue_four():
    lam = 2.0
    g = SpectralGroup.diagonal([4.0, 1.0], scalings=[lam ** 0.5] * 2)
    p = build_p_operator(g, lam, np.eye(2))
    v = np.array([1.0, 0.0])
    assert np.allclose(p.matrix() @ v, 4 * v)
    assert np.allclose(p.power(-1j) @ v, lam ** (0.5j) * evaluate_group(g, -1j, v))
    assert p_operator_check(g, lam, np.eye(2), DEFAULT_Z_GRID).passed


def test_wrong_scaling_is_not_positive():
    g = SpectralGroup.diagonal([4.0, 1.0], scalings=[2.0, 2.0])
    with pytest.raises(ValueError, match="not G-positive"):
        build_p_operator(g, 2.0, np.eye(2))
    assert not p_operator_check(g, 2.0, np.eye(2), DEFAULT_Z_GRID).passed


def test_uniqueness_round_trip(model):
    tau = model.group("tau")
    rep = uniqueness_check(tau, rebuild_from_i(tau), DEFAULT_Z_GRID, labels=model.labels)
    assert rep.notes["agree_at_i"] and rep.passed and rep.max_residual() < 1e-9


def test_tau_and_sigma_differ_at_a(model):
    rep = uniqueness_check(model.group("tau"), model.group("sigma"), DEFAULT_Z_GRID, labels=model.labels)
    assert not rep.notes["agree_at_i"]
    assert rep.notes["witness_at_i"] == "a"


def test_trivial_unitary_rep_on_finite(pipe):
    rep = unitary_rep_check(duality.delta_rep(pipe), DEFAULT_Z_GRID)
    assert rep.passed and rep.max_residual() == 0


def test_star_pairing_at_generic_point():
    # u_z = 3^{iz} as a scalar representation
    u = UnitaryRep(lambda z: 3 ** (1j * complex(z)), lambda x, y: x * y, lambda x: np.conj(x), 1.0,
                   lambda x, y: abs(x - y), "scalar")
    z = 0.5 + 1j / 3
    assert abs(np.conj(u.power(z)) - u.power(-np.conj(z))) < 1e-15
    assert unitary_rep_check(u, DEFAULT_Z_GRID).passed


positive = st.floats(min_value=0.1, max_value=10)
coord = st.floats(min_value=-2, max_value=2)


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=1, max_size=5), coord, coord, coord, coord)
def test_spectral_group_law(eigenvalues, y1, y2, z1, z2):
    g = SpectralGroup.diagonal(eigenvalues)
    y, z = complex(y1, y2), complex(z1, z2)
    lhs = g.matrix(y + z)
    assert oneparam.scaled_residual(lhs - g.matrix(y) @ g.matrix(z), lhs) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=1, max_size=5), coord)
def test_real_parameters_are_unitary(eigenvalues, t):
    g = SpectralGroup.diagonal(eigenvalues)
    m = g.matrix(t)
    assert np.allclose(m.conj().T @ m, np.eye(len(eigenvalues)), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(positive, min_size=2, max_size=4))
def test_rebuild_recovers_any_group(eigenvalues):
    g = SpectralGroup.diagonal(eigenvalues)
    r = rebuild_from_i(g)
    for z in DEFAULT_Z_GRID:
        assert oneparam.scaled_residual(g.matrix(z) - r.matrix(z), g.matrix(z)) < 1e-9
