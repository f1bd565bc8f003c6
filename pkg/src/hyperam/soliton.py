"""Loop-soliton reconstruction, winding numbers and MKdV checks.

The curve is Z(t1) with dZ/dt1 = prod (x_i - e_a) / R and t1 = R u_g, so the
tangent is exp(i theta) with theta = 2 sum phi_i.  All equation residuals are
evaluated on the tangent angle theta.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .amfun import am_period
from .contour_quad import chart_model
from .curve_model import PhiChart, x_of_phi
from .divisor_flow import DivisorState, FlowSpec, Trajectory, initial_state, trajectory
from .errors import GridTooCoarse, NearSingularTimeMix, PeriodMismatch, PhaseUnwrapFailure

SMKDV_CUBIC = 1.0 / 3.0
MKDV_CUBIC = 0.25
GL_NODES = 8


@dataclass(frozen=True)
class ShapeSample:
    t1: float
    phi_total: float  # sum of the divisor angles
    angle: float  # unwrapped tangent angle, 2 * phi_total
    tangent: complex
    Z: complex


def scale_R(ch: PhiChart) -> float:
    """Normalizing constant R with |prod (x_i - e_a)| = R on the chart."""
    c = abs(ch.c1)
    return c ** ch.genus


def tangent(ch: PhiChart, state: DivisorState) -> complex:
    xs = np.asarray(x_of_phi(ch, np.array(state.phis)))
    return complex(np.prod(xs - ch.e_a) / scale_R(ch))


def _tangent_array(ch: PhiChart, phis: np.ndarray) -> np.ndarray:
    """Direct product over points for an (n, g) array of angles."""
    xs = ch.e_a + ch.c1 * np.exp(2j * phis)
    return np.prod(xs - ch.e_a, axis=-1) / scale_R(ch)


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def shape(traj: Trajectory, t2: float = 0.0) -> list[ShapeSample]:
    """Planar curve along an am-flow (or any) trajectory, starting at Z = 0."""
    ch = traj.spec.chart
    R = scale_R(ch)
    rate = traj.spec.rate if traj.spec.kind == "am" else 1.0
    ts = traj.times
    phis = traj.phis
    tan = _tangent_array(ch, phis)
    # u_g = rate * t, t1 = R u_g
    t1 = R * rate * ts
    if len(ts) > 1:
        xg, wg = _gl(GL_NODES)
        dt = np.diff(ts)
        nodes = ts[:-1, None] + dt[:, None] * xg[None, :]
        tn = _tangent_array(ch, traj.phis_at(nodes.ravel())).reshape(nodes.shape)
        dZ = (tn * wg[None, :]).sum(axis=1) * dt * R * rate
        Z = np.concatenate([[0.0], np.cumsum(dZ)])
    else:
        Z = np.zeros(1, dtype=complex)
    tot = phis.sum(axis=1)
    ang = _unwrap_from(np.angle(tan), 2 * tot[0])
    return [ShapeSample(float(a), float(p), float(th), complex(tg), complex(z))
            for a, p, th, tg, z in zip(t1, tot, ang, tan, Z)]


def shape_from_samples(t1: np.ndarray, phis: np.ndarray, ch: PhiChart) -> list[ShapeSample]:
    """Shape from sampled angles only (composite Simpson for Z)."""
    tan = _tangent_array(ch, phis)
    Z = np.concatenate([[0], cumulative_simpson(tan, x=t1)])
    tot = phis.sum(axis=1)
    ang = _unwrap_from(np.angle(tan), 2 * tot[0])
    return [ShapeSample(float(a), float(p), float(th), complex(tg), complex(z))
            for a, p, th, tg, z in zip(t1, tot, ang, tan, Z)]


def _unwrap_from(angles: np.ndarray, start: float) -> np.ndarray:
    out = np.unwrap(angles)
    return out + 2 * np.pi * np.round((start - out[0]) / (2 * np.pi))


# ----- winding -----------------------------------------------------------------
def point_periods(traj: Trajectory) -> np.ndarray:
    """Primitive period in flow time of each divisor point (am flow)."""
    spec = traj.spec
    ch = spec.chart
    m = chart_model(ch)
    out = []
    for p in traj[0].phis:
        bi, _ = m.band_of(p)
        out.append(ch.genus * am_period(ch, bi) / abs(spec.rate))
    return np.array(out)


def winding_number(traj: Trajectory, ch: PhiChart | None = None) -> int:
    """Index of the tangent: sum over points of the turns of 2 phi_i per own period."""
    if traj.spec.kind != "am":
        raise PeriodMismatch("winding needs an am-flow trajectory with known point periods")
    T = point_periods(traj)
    t0 = traj.times[0]
    span = traj.times[-1] - t0
    if span < T.max() * (1 - 1e-9):
        raise PeriodMismatch(f"trajectory span {span!r} is shorter than a point period {T.max()!r}")
    start = traj.phis_at([t0])[0]
    total = 0.0
    for i, Ti in enumerate(T):
        # follow the point continuously over its own period
        tt = t0 + np.linspace(0.0, Ti, 257)
        ph = traj.phis_at(tt)[:, i]
        ph = _unwrap_from(np.unwrap(2 * ph), 2 * start[i])
        total += (ph[-1] - ph[0]) / (2 * np.pi)
    n = int(np.round(total))
    if abs(total - n) >= 0.05:
        raise PeriodMismatch(f"tangent turns {total!r} are not close to an integer")
    return n


def period_trajectory(ch: PhiChart, samples: int = 2000, init: DivisorState | None = None,
                      periods: float = 1.0, **kw) -> Trajectory:
    """am-flow trajectory over ``periods`` of the slowest point."""
    init = initial_state(ch) if init is None else init
    spec = FlowSpec.am(ch, **kw)
    m = chart_model(ch)
    T = max(ch.genus * am_period(ch, m.band_of(p)[0]) for p in init.phis)
    return trajectory(spec, init, (init.t, init.t + periods * T), samples)


# ----- geometry ----------------------------------------------------------------
def self_intersections(Z: np.ndarray, chunk: int = 512) -> int:
    """Number of proper crossings between non-adjacent segments of a polyline."""
    Z = np.asarray(Z, dtype=complex)
    P, Q = Z[:-1], Z[1:]
    n = len(P)
    count = 0

    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    for s in range(0, n, chunk):
        i = np.arange(s, min(s + chunk, n))[:, None]
        j = np.arange(n)[None, :]
        mask = j > i + 1
        p1, p2 = P[i], Q[i]
        q1, q2 = P[j], Q[j]
        d1 = cross(p2 - p1, q1 - p1)
        d2 = cross(p2 - p1, q2 - p1)
        d3 = cross(q2 - q1, p1 - q1)
        d4 = cross(q2 - q1, p2 - q1)
        hit = (d1 * d2 < 0) & (d3 * d4 < 0) & mask
        count += int(hit.sum())
    return count


# ----- static MKdV ------------------------------------------------------------
@dataclass(frozen=True)
class SmkdvResult:
    a_est: float
    residual: float
    relative: float
    cubic: float
    a_determined: bool


def _d1(f, h, axis=-1):
    f = np.moveaxis(f, axis, -1)
    out = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / (12 * h)
    return np.moveaxis(out, -1, axis)


def _d3(f, h, axis=-1):
    f = np.moveaxis(f, axis, -1)
    out = (f[..., :-6] - 8 * f[..., 1:-5] + 13 * f[..., 2:-4]
           - 13 * f[..., 4:-2] + 8 * f[..., 5:-1] - f[..., 6:]) / (8 * h ** 3)
    return np.moveaxis(out, -1, axis)


def _uniform_step(t: np.ndarray) -> float:
    d = np.diff(t)
    h = float(np.mean(d))
    if not h > 0 or np.abs(d - h).max() > 1e-9 * max(abs(h), 1e-300) + 1e-12 * np.abs(t).max():
        raise GridTooCoarse("samples are not on a uniform increasing grid")
    return h


def smkdv_residual(samples, cubic: float = SMKDV_CUBIC, period: float | None = None,
                   min_per_period: int = 2000) -> SmkdvResult:
    """Least-squares a for  a theta' + cubic theta'^3 + theta''' = 0  on the tangent angle."""
    t1 = np.array([s.t1 for s in samples])
    th = np.array([s.angle for s in samples])
    if len(t1) < 7:
        raise GridTooCoarse("need at least 7 samples")
    h = _uniform_step(t1)
    if period is not None and period / h < min_per_period:
        raise GridTooCoarse(f"{period / h:.0f} samples per period < {min_per_period}")
    if np.abs(np.diff(th)).max() > 0.5 * np.pi:
        raise GridTooCoarse("tangent angle jumps by more than a quarter turn between samples")
    th = th - th[0]  # stencils on the increment lose less to rounding
    d1 = _d1(th, h)[1:-1]
    d3 = _d3(th, h)
    rest = cubic * d1 ** 3 + d3
    scale = max(np.abs(d3).max(), np.abs(cubic * d1 ** 3).max())
    # a straight line: the angle does not move beyond rounding
    flat = np.abs(d1).max() * (t1[-1] - t1[0]) <= 1e-12 * max(1.0, np.abs(th).max())
    if flat or scale == 0:
        r = float(np.abs(rest).max())
        return SmkdvResult(float("nan"), r, 0.0 if r == 0 else float("inf"), cubic, False)
    a = -float(np.dot(d1, rest)) / float(np.dot(d1, d1))
    res = a * d1 + rest
    r = float(np.abs(res).max())
    return SmkdvResult(a, r, r / scale, cubic, True)


# ----- MKdV -------------------------------------------------------------------
@dataclass(frozen=True)
class MkdvResult:
    residual: float
    relative: float
    cubic: float
    fitted: tuple[float, float, float]  # least squares (t2 scale, cubic, drift)
    fitted_relative: float


def time_mix(ch: PhiChart) -> float:
    """mu = 1 / (lambda_{2g} + e_a)."""
    g = ch.genus
    lam = ch.curve.lam(2 * g)
    den = complex(lam + ch.e_a)
    if abs(den) < 1e-8:
        raise NearSingularTimeMix(f"lambda_2g + e_a = {den!r} is too close to zero")
    return float((1.0 / den).real)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HYPERAM_THREADS", "1")))
    except ValueError:
        return 1


def mkdv_grid(ch: PhiChart, t1_grid, t2_grid, init: DivisorState | None = None,
              rtol: float = 1e-12, atol: float = 1e-14) -> np.ndarray:
    """Tangent angle theta[j, k] at (t2_j, t1_k)."""
    g = ch.genus
    if g < 2:
        raise ValueError("MKdV grid needs genus >= 2")
    mu = time_mix(ch)
    R = scale_R(ch)
    t1_grid = np.asarray(t1_grid, dtype=float)
    t2_grid = np.asarray(t2_grid, dtype=float)
    init = initial_state(ch) if init is None else init
    e_t2 = np.zeros(g)
    e_t2[g - 2] = 1.0 / R
    e_t1 = np.zeros(g)
    e_t1[g - 2], e_t1[g - 1] = mu / R, 1.0 / R
    t2_traj = trajectory(FlowSpec.jacobian(ch, e_t2, rtol=rtol, atol=atol), init, samples=t2_grid)
    spec1 = FlowSpec.jacobian(ch, e_t1, rtol=rtol, atol=atol)

    def slice_(st):
        st0 = DivisorState(st.phis, st.momenta, st.u_partial, 0.0)
        tr = trajectory(spec1, st0, samples=t1_grid)
        return 2 * tr.phis.sum(axis=1)

    with ThreadPoolExecutor(max_workers=_threads()) as ex:
        rows = list(ex.map(slice_, list(t2_traj)))
    theta = np.array(rows)
    # continuous branch along t1, then match neighbouring t2 slices
    theta = np.unwrap(theta, axis=1)
    for j in range(1, len(theta)):
        shift = np.round((theta[j - 1, 0] - theta[j, 0]) / (2 * np.pi))
        theta[j] += 2 * np.pi * shift
        if np.abs(theta[j] - theta[j - 1]).max() > 0.5 * np.pi:
            raise PhaseUnwrapFailure(f"t2 slices {j - 1} and {j} differ by more than a quarter turn")
    return theta


def mkdv_grid_residual(theta: np.ndarray, t1_grid, t2_grid, cubic: float = MKDV_CUBIC) -> MkdvResult:
    """Finite-difference residual of  theta_t2 + cubic theta_t1^3 + theta_t1^3 = 0."""
    theta = np.asarray(theta, dtype=float)
    h1 = _uniform_step(np.asarray(t1_grid, dtype=float))
    h2 = _uniform_step(np.asarray(t2_grid, dtype=float))
    if theta.shape[0] < 5 or theta.shape[1] < 7:
        raise GridTooCoarse("need at least 5 t2 slices and 7 t1 points")
    d2 = _d1(theta, h2, axis=0)[:, 3:-3]
    d1 = _d1(theta, h1, axis=1)[2:-2, 1:-1]
    d3 = _d3(theta, h1, axis=1)[2:-2]
    res = d2 + cubic * d1 ** 3 + d3
    scale = float(np.abs(d3).max())
    r = float(np.abs(res).max())
    rel = r / scale if scale > 0 else (0.0 if r == 0 else float("inf"))
    # diagnostic fit  s theta_t2 + c theta_t1^3 + v theta_t1 = -theta_t1^3
    M = np.stack([d2.ravel(), (d1 ** 3).ravel(), d1.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(M, -d3.ravel(), rcond=None)
    fres = M @ coef + d3.ravel()
    frel = float(np.abs(fres).max() / scale) if scale > 0 else 0.0
    return MkdvResult(r, rel, cubic, tuple(float(c) for c in coef), frel)


def mkdv_residual(ch: PhiChart, t1_grid, t2_grid, init: DivisorState | None = None,
                  cubic: float = MKDV_CUBIC) -> MkdvResult:
    theta = mkdv_grid(ch, t1_grid, t2_grid, init)
    return mkdv_grid_residual(theta, t1_grid, t2_grid, cubic)
