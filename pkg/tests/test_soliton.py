import numpy as np
import pytest

from hyperam import FlowSpec, chart, initial_state, new_curve, shape, smkdv_residual, synthesize_curve, tangent, trajectory, winding_number
from hyperam.amfun import am_period
from hyperam.contour_quad import chart_model
from hyperam.divisor_flow import DivisorState
from hyperam.errors import GridTooCoarse, NearSingularTimeMix, PeriodMismatch
from hyperam.soliton import (
    ShapeSample,
    mkdv_grid_residual,
    period_trajectory,
    scale_R,
    self_intersections,
    time_mix,
)

I1 = chart(new_curve([0, 1, 4]), 1, (2, 3))
I2 = chart(new_curve([-4, -1, 0]), 3, (1, 2))
II1 = synthesize_curve(2, -2, [1, 0.5])[1]


def _state(phis):
    return DivisorState(tuple(phis), (1.0,) * len(phis), (0.0,) * len(phis))


def test_tangent_examples():
    assert tangent(I1, _state([np.pi / 4])) == pytest.approx(1j)
    assert tangent(II1, _state([np.pi / 3, np.pi / 6])) == pytest.approx(-1)
    assert tangent(II1, _state([0.0, 0.0])) == pytest.approx(1)
    assert scale_R(II1) == pytest.approx(4)


def test_zero_length_shape():
    tr = trajectory(FlowSpec.am(I1), initial_state(I1), (0.0, 0.0), 1)
    sh = shape(tr)
    assert len(sh) == 1 and sh[0].Z == 0


def test_shape_refinement():
    T = am_period(I1)
    ends = []
    for n in (400, 800):
        tr = trajectory(FlowSpec.am(I1, rtol=1e-13, atol=1e-15), initial_state(I1), (0.0, 2 * T), n)
        ends.append(shape(tr)[-1])
    arc = ends[0].t1
    assert abs(ends[0].Z - ends[1].Z) < 1e-8 * arc


def test_unit_tangent_along_shapes():
    for ch in (I1, I2, II1):
        sh = shape(period_trajectory(ch, 300))
        assert max(abs(abs(s.tangent) - 1) for s in sh) < 1e-12


def test_near_circle_closes():
    # k^2 -> 0^- when the two offsets are far apart
    ch = chart(new_curve([0, 1e-3, 1e3]), 1, (2, 3))
    assert -0.01 < chart_model(ch).case.k_sq[0] < 0
    tr = period_trajectory(ch, 2000, rtol=1e-13, atol=1e-15)
    Z = np.array([s.Z for s in shape(tr)])
    assert abs(Z[-1] - Z[0]) < 1e-3
    radius = np.abs(Z - Z.mean())
    assert radius.std() < 1e-2 * radius.mean()


def test_loop_soliton_has_one_loop_per_half_period():
    T = am_period(I2)  # lo -> hi -> lo
    tr = trajectory(FlowSpec.am(I2, rtol=1e-13, atol=1e-15), initial_state(I2), (0.0, T / 2), 3000)
    Z = np.array([s.Z for s in shape(tr)])
    assert self_intersections(Z) == 1
    full = trajectory(FlowSpec.am(I2, rtol=1e-13, atol=1e-15), initial_state(I2), (0.0, T), 6000)
    assert self_intersections(np.array([s.Z for s in shape(full)])) == 2
    assert winding_number(full, I2) == 0


@pytest.mark.parametrize("ch,w", [(I1, 1), (I2, 0), (II1, 2)])
def test_winding_examples(ch, w):
    assert winding_number(period_trajectory(ch, 400), ch) == w


def test_short_trajectory_is_rejected():
    tr = trajectory(FlowSpec.am(I1), initial_state(I1), (0.0, 0.3), 50)
    with pytest.raises(PeriodMismatch):
        winding_number(tr, I1)


def test_straight_line_is_flagged():
    t = np.linspace(0, 1, 101)
    samples = [ShapeSample(v, 0.3, 0.6, np.exp(0.6j), v * np.exp(0.6j)) for v in t]
    r = smkdv_residual(samples)
    assert r.residual == 0 and not r.a_determined


def test_coarse_grid_is_rejected():
    sh = shape(period_trajectory(I1, 200))
    with pytest.raises(GridTooCoarse):
        smkdv_residual(sh, period=sh[-1].t1 - sh[0].t1)


@pytest.mark.parametrize("ch", [I1, I2])
def test_static_equation_with_half_cubic(ch):
    # the tangent angle of these elastica satisfies the cubic-1/2 static equation,
    # with a = -(2A + B) / c^2 from the chart coefficients
    sh = shape(period_trajectory(ch, 4001, rtol=1e-13, atol=1e-15))
    r = smkdv_residual(sh, cubic=0.5, period=sh[-1].t1 - sh[0].t1)
    m = chart_model(ch)
    assert r.relative < 1e-5
    assert r.a_est == pytest.approx(-(2 * m.A[0] + m.B[0]) / m.c ** 2, rel=1e-6)


def test_mkdv_negative_control():
    c = 0.7
    t1 = np.linspace(0, 1, 41)
    t2 = np.linspace(0, 0.1, 9)
    theta = c * t1[None, :] + 0 * t2[:, None]
    r = mkdv_grid_residual(theta, t1, t2, cubic=0.25)
    # fourth-order stencils are exact on a line, up to rounding / h^3
    assert r.residual == pytest.approx(0.25 * c ** 3, rel=1e-8)


def test_time_mix_guard():
    e_a, r2 = -1.0, 2.0
    s = 4 + r2 + 1 / r2
    r1 = 0.5 * (s + np.sqrt(s * s - 4))  # makes the other branch points sum to zero
    _, ch = synthesize_curve(2, e_a, [r1, r2], [1, -1])
    with pytest.raises(NearSingularTimeMix):
        time_mix(ch)
    assert time_mix(II1) == pytest.approx(1 / (II1.curve.lam(4).real + II1.e_a.real))
