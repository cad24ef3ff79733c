from fractions import Fraction

import numpy as np
import pytest

from aqg import duality, finqg
from aqg.oneparam import DEFAULT_Z_GRID
from aqg.suq2 import GENERATORS, NcPoly, SUq2, monomials

HALF = Fraction(1, 2)
A, C = NcPoly.term(GENERATORS["a"]), NcPoly.term(GENERATORS["c"])
C_STAR = NcPoly.term(GENERATORS["c*"])


def test_finite_duality_suite(pipe):
    rep = duality.finite_duality_suite(pipe, DEFAULT_Z_GRID)
    assert rep.passed, rep.to_text()
    exact = [e for e in rep.entries if e.id.startswith(("plancherel", "bidual_", "sigma_hat_vs_dual_rho"))]
    assert exact and all(e.residual == 0 for e in exact)


def test_fourier_round_trip(pipelines):
    p = pipelines["kac_paljutkin"]
    for i in range(p.spec.dim):
        a = p.spec.basis(i)
        assert duality.inverse_fourier(p.spec, p.phi, duality.fourier(p.spec, p.phi, a)) == a


def test_dual_product_on_c_z2_by_brute_force(pipelines):
    p = pipelines["c_z2"]
    g_hat = duality.fourier(p.spec, p.phi, p.spec.basis(1))
    prod = duality.dual_multiply(p.spec, g_hat, g_hat)
    # (w1 w2)(x) = (w1 (x) w2)D(x); group-likes give w1(x) w2(x)
    assert prod == [g_hat[0] * g_hat[0], g_hat[1] * g_hat[1]]


def test_dual_haar_on_finite(pipelines):
    p = pipelines["c_s3"]
    a = p.spec.basis(3)
    psi_hat = duality.dual_haar(p.spec, p.phi, "psi_hat", duality.fourier(p.spec, p.phi, a))
    assert psi_hat == finqg.solve_counit(p.spec).covector[3]


def test_suq2_dual_antipode_squared():
    eng = SUq2(HALF)
    w = duality.fourier_suq2(eng, C)
    s2 = duality.suq2_dual_antipode(eng, duality.suq2_dual_antipode(eng, w))
    for t in monomials(3):
        x = NcPoly.term(t)
        assert s2(x) == w(eng.s_squared(x))


def test_fourier_of_c_on_cc_star_vanishes():
    eng = SUq2(HALF)
    w = duality.fourier_suq2(eng, C)
    assert w(eng.multiply(C, C_STAR)) == 0


def test_sigma_hat_at_i_on_c_star():
    eng = SUq2(HALF)
    w = duality.fourier_suq2(eng, C)
    # tau_i(c*) = q^2 c*, so the value is q^2 h(c* c) = 1/4 * 4/5
    val = duality.dual_analytic_apply(eng, "sigma_hat", 1j, w, C_STAR)
    assert val == Fraction(1, 5)
    assert val == w(eng.analytic_map("tau", 1j, C_STAR))


def test_delta_hat_at_i_on_a():
    eng = SUq2(HALF)
    chi = duality.delta_hat_power(eng, 1j)
    assert chi(A) == 4                               # q^-2
    assert chi(A) == duality.delta_hat_power_engine(eng, 1j)(A)


@pytest.mark.parametrize("q", [HALF, Fraction(1, 3), Fraction(9, 10)])
def test_delta_hat_is_f_minus_two_z(q):
    eng = SUq2(q)
    # delta^^w = eps sigma_{iw} and f_{-2w}, evaluated independently
    for w in (1, -0.5, 0.5 + 1j / 3):
        lhs = eng.counit_sigma(1j * w)(A)
        rhs = eng.f_character(-2 * w)(A)
        assert abs(complex(lhs) - complex(rhs)) < 1e-12
    assert eng.counit_sigma(1j)(A) == q ** 2


def test_sandwich_gives_s_squared():
    eng = SUq2(HALF)
    f1, fm1 = eng.f_character(1), eng.f_character(-1)
    for g in GENERATORS:
        x = NcPoly.term(GENERATORS[g])
        assert eng.sandwich(f1.on_term, fm1.on_term, x) == eng.s_squared(x)


def test_phi_hat_needs_psi_shifted_form():
    eng = SUq2(HALF)
    with pytest.raises(duality.NotRepresentable):
        duality.suq2_dual_haar(eng, "phi_hat", duality.fourier_suq2(eng, C))
    assert duality.suq2_dual_haar(eng, "psi_hat", duality.fourier_suq2(eng, A)) == 1


@pytest.mark.parametrize("q", [HALF, Fraction(1, 3), Fraction(9, 10)])
def test_suq2_duality_suite(q):
    rep = duality.suq2_duality_suite(SUq2(q), DEFAULT_Z_GRID, 4)
    assert rep.passed and rep.max_residual() < 1e-9, rep.to_text()


def test_wrong_f_sign_breaks_the_link():
    rep = duality.f_link_check(SUq2(HALF, kappa=1), DEFAULT_Z_GRID, 4)
    assert not rep.entry("delta_hat_f_link").passed
    assert rep.entry("delta_hat_f_link").residual_float() >= 1


def test_phi_hat_gram_is_reported(pipelines):
    rep = finqg.duality_report(pipelines["f_s3"].spec, pipelines["f_s3"].phi)
    assert np.isfinite(rep.notes["phi_hat_gram_min_eigenvalue"])
    assert not any("phi_hat" in e.id and "positive" in e.id for e in rep.entries)


def test_finite_dual_analytic_exact_and_spectral_routes(pipe):
    rep = duality.finite_dual_analytic(pipe, DEFAULT_Z_GRID)
    assert rep.notes["exact_route"]
    for e in rep.entries:
        if e.id.endswith("_spectral"):
            assert e.residual_float() < 1e-12
        else:
            assert isinstance(e.residual, Fraction) and e.residual == 0, e.id
    ids = {e.id for e in rep.entries}
    assert {"delta_hat_is_eps", "delta_hat_is_eps_spectral", "dual_R_hat", "dual_R_hat_spectral"} <= ids
