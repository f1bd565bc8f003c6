import numpy as np
import pytest

from hyperam import am_genus1_oracle, am_point, chart, hyper_am, hyper_am_function, new_curve, synthesize_curve, u_of_phi
from hyperam.amfun import am_period, chart_am_oracle
from hyperam.contour_quad import chart_model, unfolded_u
from hyperam.divisor_flow import DivisorState
from oracles import am_ode
from samplers import GENUS1_CASES, GENUS2_CASES, random_chart

I1 = chart(new_curve([0, 1, 4]), 1, (2, 3))
I2 = chart(new_curve([-4, -1, 0]), 3, (1, 2))


def test_reference_values():
    assert am_point(I1, 1, 0.0) == 0.0
    assert am_point(I2, 1, 0.0) == pytest.approx(np.arcsin(1 / np.sqrt(8)), abs=1e-15)


def test_round_trip_quarter():
    q = u_of_phi(I1, 1, np.pi / 2)
    assert am_point(I1, 1, q) == pytest.approx(np.pi / 2, abs=1e-10)


def test_rotation_adds_pi_per_period():
    # am_period is 2 omega; phi gains pi, so 2 phi gains 2 pi
    P = am_period(I1)
    for u in (0.1, 0.77, 2.3):
        assert am_point(I1, 1, u + 2 * P) == pytest.approx(am_point(I1, 1, u) + 2 * np.pi, abs=1e-10)


@pytest.mark.parametrize("case", GENUS1_CASES + GENUS2_CASES)
def test_round_trip_random(case, rng):
    ch = random_chart(rng, case)
    m = chart_model(ch)
    b = m.bands[0]
    lo, hi = (-1.4, 1.4) if b.rotating else (b.lo, b.hi)
    for phi in rng.uniform(lo, hi, 5):
        if not b.rotating and phi > 0.5 * (b.lo + b.hi):
            continue  # the unfolded integral is single valued on the rising half
        r = unfolded_u(ch, phi)
        assert am_point(ch, 1, r) == pytest.approx(phi, abs=1e-10)


@pytest.mark.parametrize("label,ch", [("I-1", I1), ("I-2", I2)])
def test_closed_form_matches_ode(label, ch):
    m = chart_model(ch)
    u = np.linspace(0.0, 3 * am_period(ch), 60)[1:]
    ref = chart_am_oracle(ch, u)
    phi0 = 0.0 if label == "I-1" else m.bands[0].lo
    ode = am_ode(m.A[0], m.B[0], np.concatenate([[0.0], u]), phi0, np.sqrt(max(m.D2(phi0), 0.0)))[1:]
    assert np.abs(ode - ref).max() < 1e-8


def test_oracle_special_values():
    assert am_genus1_oracle(0.0, 0.8) == pytest.approx(0.8)
    assert am_genus1_oracle(-3.0, 0.0) == 0.0


def test_genus1_hyper_am_is_am_point():
    ev = hyper_am_function(I1, 0.9, offsets=(0.0,))
    assert ev.phi_total == am_point(I1, 1, 0.9)
    assert abs(ev.al) == pytest.approx(1, abs=1e-13)
    assert ev.tangent == pytest.approx(np.exp(2j * ev.phi_total), abs=1e-13)


def test_zero_divisor_gives_unit_al():
    _, ch = synthesize_curve(2, -2, [1, 0.5])
    ev = hyper_am(ch, [DivisorState((0.0, 0.0), (1.0, 1.0), (0.0, 0.0))])[0]
    assert ev.al == 1
    assert ev.tangent == pytest.approx(1)


def test_ii1_common_period_turns_twice():
    _, ch = synthesize_curve(2, -2, [1, 0.5])
    P = am_period(ch)
    a = hyper_am_function(ch, 0.0)
    b = hyper_am_function(ch, 2 * P)
    assert 2 * (b.phi_total - a.phi_total) == pytest.approx(2 * 2 * np.pi, abs=1e-9)


def test_librating_point_oscillates():
    m = chart_model(I2)
    b = m.bands[0]
    u = np.linspace(0, 3 * am_period(I2), 301)
    phi = np.array([am_point(I2, 1, v) for v in u])
    assert phi.min() >= b.lo - 1e-12 and phi.max() <= b.hi + 1e-12
