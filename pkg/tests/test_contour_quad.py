import numpy as np
import pytest
from scipy.special import ellipk as sp_ellipk

from hyperam import IntegrandSpec, chart, du_over_dphi, integrate_phi, new_curve, periods, synthesize_curve, u_of_phi
from hyperam.contour_quad import band_period, chart_model
from hyperam.errors import OutsideAdmissibleRange, SingularInterior, WrongGenus
from oracles import genus2_v_integral
from samplers import GENUS1_CASES, GENUS2_CASES, random_chart

I1 = chart(new_curve([0, 1, 4]), 1, (2, 3))
I2 = chart(new_curve([-4, -1, 0]), 3, (1, 2))


def test_density_examples():
    assert abs(du_over_dphi(I1, 1, 0.0)) == pytest.approx(1)
    assert du_over_dphi(I1, 1, np.pi / 2) == pytest.approx(1 / 3)
    _, ch2 = synthesize_curve(2, -2, [1, 0.5])
    assert du_over_dphi(ch2, 1, 0.0) == 0.0


def test_quarter_integral_is_complete_elliptic():
    val = integrate_phi(IntegrandSpec(I1, 1, "unfolded"), 0, np.pi / 2)
    assert val == pytest.approx(sp_ellipk(8 / 9) / 3, rel=1e-14)
    assert u_of_phi(I1, 1, np.pi / 2) == pytest.approx(sp_ellipk(8 / 9) / 3, rel=1e-14)


def test_reference_points():
    assert u_of_phi(I1, 1, 0.0) == 0.0
    lo = chart_model(I2).bands[0].lo
    assert lo == pytest.approx(np.arcsin(1 / np.sqrt(8)))
    assert u_of_phi(I2, 1, lo) == 0.0


def test_librating_half_period_is_complete_elliptic():
    # I-2: int_{w0}^1 dw / sqrt((1 - w^2)(A + B w^2)) = K(1 - w0^2) / sqrt(B);
    # the phi-band runs w0 -> 1 -> w0 and a period goes there and back
    m = chart_model(I2)
    w02 = -m.A[0] / m.B[0]
    quarter = band_period(I2, 0, "unfolded") / 4
    assert quarter == pytest.approx(sp_ellipk(1 - w02) / np.sqrt(m.B[0]), rel=1e-13)


@pytest.mark.parametrize("case", GENUS2_CASES)
def test_parity_of_pieces(case, rng):
    m = chart_model(random_chart(rng, case))
    phi = rng.uniform(-1.5, 1.5, 9)
    assert np.allclose(m.N(-phi), (-1) ** (m.g - 1) * m.N(phi))
    assert np.allclose(m.D2(-phi), m.D2(phi))


@pytest.mark.parametrize("case", GENUS1_CASES + GENUS2_CASES)
def test_both_quadratures_agree(case, rng):
    ch = random_chart(rng, case)
    m = chart_model(ch)
    b = m.bands[0]
    lo, hi = (0.0, np.pi / 2) if b.rotating else (b.lo, b.hi)
    val = m.integrate("unfolded", lo, hi, method="both")
    assert val > 0


def test_genus2_matches_v_substitution_example():
    _, ch = synthesize_curve(2, -2, [1, 0.5])
    m = chart_model(ch)
    for p0, p1 in [(0.0, 0.4), (0.3, np.pi / 2), (0.0, np.pi / 2)]:
        direct = integrate_phi(IntegrandSpec(ch, 1, "u"), p0, p1)
        assert direct == pytest.approx(genus2_v_integral(m.A, m.B, m.c, p0, p1), rel=1e-10)


def test_halving_step_is_stable(rng):
    ch = random_chart(rng, "II-2")
    m = chart_model(ch)
    b = m.bands[0]
    f = m.integrand("unfolded", b.lo, b.hi)
    from hyperam.quadrature import tanh_sinh
    assert tanh_sinh(f, b.lo, b.hi, tol=1e-13) == pytest.approx(tanh_sinh(f, b.lo, b.hi, tol=1e-15), rel=1e-12)


def test_outside_range_and_singular_interior():
    with pytest.raises(OutsideAdmissibleRange):
        u_of_phi(I2, 1, 0.0)
    with pytest.raises(SingularInterior):
        integrate_phi(IntegrandSpec(I2, 1, "u"), 0.0, 1.0)


def test_period_examples():
    assert periods(I1).tau.real == pytest.approx(0.5, abs=1e-8)
    assert periods(I2).tau.real == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(WrongGenus):
        periods(synthesize_curve(2, -2, [1, 0.5])[1])


@pytest.mark.parametrize("case", GENUS1_CASES)
def test_periods_match_closed_forms(case, rng):
    for _ in range(5):
        ch = random_chart(rng, case)
        m = chart_model(ch)
        A, B = m.A[0], m.B[0]
        pl = periods(ch)
        assert pl.tau.imag > 0
        if case == "I-1":
            mm = B / (A + B)
            assert pl.omega == pytest.approx(sp_ellipk(mm) / np.sqrt(A + B), rel=1e-12)
            assert pl.omega_prime.imag == pytest.approx(sp_ellipk(1 - mm) / np.sqrt(A + B), rel=1e-12)
            assert pl.omega_prime.real == pytest.approx(-pl.omega, rel=1e-14)
        else:
            w02 = -A / B
            assert pl.omega == pytest.approx(2 * sp_ellipk(w02) / np.sqrt(B), rel=1e-12)
            assert pl.omega_prime.imag == pytest.approx(sp_ellipk(1 - w02) / np.sqrt(B), rel=1e-12)
