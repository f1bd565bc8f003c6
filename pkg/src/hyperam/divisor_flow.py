"""Real flows of the divisor points x_i = e_a + c exp(2 i phi_i).

Two flows are provided.

``am`` flow
    Each point advances its own unfolded integral u~_i = int |du_g| at rate
    ``rate / g``, so u_g = sum u~_i grows at ``rate``.  Points are integrated
    in their kinematic time sigma (dphi = D dsigma), written in second-order
    form  phi'' = (D^2)'/2  so turning points need no special care.

``jacobian`` flow
    The divisor moves with constant velocity ``target`` in (u_1, .., u_g),
    using the reduced real densities n_k(phi) of du_k.  With
    eta = V^{-1} target, V_{ki} = n_k(phi_i), the equations
    phi_i' = p_i eta_i,  p_i' = (D^2)'(phi_i) eta_i / 2  are smooth through
    turning points and conserve p_i^2 - D^2(phi_i).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .amfun import am_period, am_point, _inverter
from .contour_quad import band_period, chart_model, du_over_dphi_complex
from .curve_model import PhiChart
from .errors import DegenerateDivisor, NonRealVelocity, OutsideAdmissibleRange, StepFailure

COND_MAX = 1e12
# the flow blows up near special divisors well before V is numerically singular
COND_EVENT = 1e6


@dataclass(frozen=True)
class DivisorState:
    phis: tuple[float, ...]
    momenta: tuple[float, ...]  # p_i = dphi_i / dsigma_i
    u_partial: tuple[float, ...]  # unfolded partial integrals u~_i
    t: float = 0.0

    @property
    def sheets(self) -> tuple[int, ...]:
        return tuple(-1 if np.signbit(p) else 1 for p in self.momenta)

    @property
    def u_total(self) -> float:
        return float(sum(self.u_partial))


@dataclass(frozen=True)
class FlowSpec:
    chart: PhiChart
    kind: str = "am"
    target: tuple[float, ...] | None = None
    rate: float = 1.0
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf

    @classmethod
    def am(cls, ch: PhiChart, rate: float = 1.0, **kw) -> "FlowSpec":
        return cls(ch, "am", None, rate, **kw)

    @classmethod
    def jacobian(cls, ch: PhiChart, target: Sequence[float], **kw) -> "FlowSpec":
        target = tuple(float(v) for v in target)
        if len(target) != ch.genus:
            raise ValueError(f"target needs {ch.genus} components")
        return cls(ch, "jacobian", target, **kw)


# ----- helpers -----------------------------------------------------------------
def _moment(model, phi: float, sheet: int) -> float:
    D2 = float(model.D2(phi))
    return sheet * np.sqrt(max(D2, 0.0))


def initial_state(ch: PhiChart, phis: Sequence[float] | None = None,
                  sheets: Sequence[int] | None = None, band: int = 0) -> DivisorState:
    """Starting divisor.

    By default point i starts (i - 1)/(g + 1) of a period along its band from
    the reference point, which keeps the points distinct.
    """
    m = chart_model(ch)
    g = ch.genus
    inv = _inverter(ch, band)
    if phis is None:
        P = am_period(ch, band)
        us = [(i * P) / (g + 1) for i in range(g)]
        phis = [am_point(ch, 1, u, band) for u in us]
        sheets = [1 if inv.rotating or u <= inv.span else -1 for u in us]
    else:
        phis = [float(p) for p in phis]
        if len(phis) != g:
            raise ValueError(f"need {g} angles")
        sheets = [1] * g if sheets is None else [int(s) for s in sheets]
        us = []
        for p, s in zip(phis, sheets):
            bi, n = m.band_of(p)
            b = m.bands[bi]
            ref = b.ref + 2 * np.pi * n
            r = m.integrate("unfolded", ref, p)
            if not b.rotating and s < 0:
                r = 2 * inv.span - r if bi == band else 2 * _inverter(ch, bi).span - r
            us.append(r)
    moms = []
    for p, s in zip(phis, sheets):
        mom = _moment(m, p, s)
        if mom == 0.0:
            # at a turning point: keep the sign of the direction it will move
            mom = 0.0 if m.dD2(p) >= 0 else -0.0
        moms.append(mom)
    return DivisorState(tuple(phis), tuple(moms), tuple(float(u) for u in us), 0.0)


def _check_real(ch: PhiChart, phis) -> None:
    m = chart_model(ch)
    for p in phis:
        try:
            m.band_of(float(p))
        except OutsideAdmissibleRange as exc:
            raise NonRealVelocity(f"divisor point left the admissible ranges: {exc}") from exc
        D2 = float(m.D2(p))
        if D2 > 1e-12:
            v = complex(du_over_dphi_complex(ch, p))
            if abs(v.imag) > 1e-10 * max(1.0, abs(v)):
                raise NonRealVelocity(f"du/dphi = {v!r} at phi = {p!r} is not real")


def _velocity_matrix(model, phis):
    g = model.g
    return np.array([[model.n_row(k, p) for p in phis] for k in range(1, g + 1)])


def _eta(model, phis, target):
    V = _velocity_matrix(model, phis)
    if model.g == 1:
        return np.array(target) / V[0]
    if np.linalg.cond(V) > COND_MAX:
        raise DegenerateDivisor(f"divisor {tuple(phis)} is special: velocity matrix is singular")
    return np.linalg.solve(V, np.asarray(target, dtype=float))


def flow_velocity(ch: PhiChart, state: DivisorState, target: Sequence[float]) -> np.ndarray:
    """d(phi_i)/dt for constant velocity ``target`` in (u_1, .., u_g)."""
    _check_real(ch, state.phis)
    m = chart_model(ch)
    eta = _eta(m, state.phis, target)
    return np.array(state.momenta) * eta


# ----- trajectories ------------------------------------------------------------
class Trajectory(Sequence):
    """Sampled divisor states with continuous access to the angles."""

    def __init__(self, spec: FlowSpec, states: list[DivisorState], phis_fn):
        self.spec = spec
        self.states = states
        self._phis_fn = phis_fn

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k):
        return self.states[k]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def phis(self) -> np.ndarray:
        return np.array([s.phis for s in self.states])

    @property
    def momenta(self) -> np.ndarray:
        return np.array([s.momenta for s in self.states])

    @property
    def u_partial(self) -> np.ndarray:
        return np.array([s.u_partial for s in self.states])

    def phis_at(self, t) -> np.ndarray:
        """Angles at arbitrary times inside the integrated span, shape (len(t), g)."""
        return self._phis_fn(np.atleast_1d(np.asarray(t, dtype=float)))


class _Piecewise:
    """Dense output glued from solve_ivp runs that stop where sin(phi) = 0."""

    def __init__(self, runs, direction):
        self.direction = direction
        self.t = np.concatenate([r.t if k == 0 else r.t[1:] for k, r in enumerate(runs)])
        self.y = np.concatenate([r.y if k == 0 else r.y[:, 1:] for k, r in enumerate(runs)],
                                axis=1)
        self._runs = runs
        # run boundaries as increasing keys direction * sigma
        self._ends = np.array([direction * r.t[-1] for r in runs])

    def sol(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.minimum(np.searchsorted(self._ends, self.direction * s), len(self._runs) - 1)
        out = np.empty((self.y.shape[0], len(s)))
        for j in np.unique(k):
            sel = k == j
            out[:, sel] = self._runs[j].sol(s[sel])
        return out


class _PointPath:
    """One point of the am flow, integrated in its kinematic time.

    u~' = |N| has a kink where sin(phi) = 0 (even g), so each run stops there and
    integrates the smooth signed N on the next piece.
    """

    def __init__(self, model, phi0, p0, u0, band, du_lo, du_hi, spec):
        self.model = model
        self.u0 = u0
        self.y0 = np.array([phi0, p0, u0], dtype=float)
        P = band_period(model.chart, band, "unfolded")
        T = band_period(model.chart, band, "sigma")
        self.sols = {}
        for direction, du in ((1, du_hi), (-1, du_lo)):
            if direction * du <= 0:
                continue
            span = direction * (abs(du) / P + 1.05) * T
            sol = self._integrate(direction, span, spec)
            if direction * (sol.y[2, -1] - u0) < abs(du) * (1 - 1e-12):
                raise StepFailure("kinematic span too short for the requested flow time",
                                  op="trajectory")
            self.sols[direction] = sol

    def _integrate(self, direction, span, spec):
        model = self.model
        even = model.g % 2 == 0
        runs, s0, y = [], 0.0, self.y0.copy()
        on_zero = abs(np.sin(y[0])) < 1e-12
        while direction * (span - s0) > 0:
            # sign of N on the coming piece; on a zero it follows the motion
            if not even:
                sg = 1.0
            elif on_zero:
                sg = float(np.sign(direction * y[1] * np.cos(y[0])))
            else:
                sg = float(np.sign(np.sin(y[0])))

            def rhs(s, yy, sg=sg):
                return [yy[1], 0.5 * model.dD2(yy[0]), sg * model.N(yy[0])]

            def crossing(s, yy, sg=sg):
                return sg * np.sin(yy[0])

            crossing.terminal = True
            crossing.direction = -1
            sol = solve_ivp(rhs, (s0, span), y, method="DOP853", dense_output=True,
                            rtol=spec.rtol, atol=spec.atol, max_step=spec.max_step,
                            events=crossing if even else None)
            if not sol.success:
                raise StepFailure(f"integrator failed: {sol.message}", op="trajectory")
            runs.append(sol)
            if sol.status != 1:
                break
            s0, y = float(sol.t[-1]), sol.y[:, -1].copy()
            y[0] = np.pi * np.round(y[0] / np.pi)
            on_zero = True
        return _Piecewise(runs, direction)

    def at(self, u_targets: np.ndarray) -> np.ndarray:
        """(phi, p, u~) rows for unfolded targets."""
        out = np.empty((len(u_targets), 3))
        d_all = u_targets - self.u0
        for direction, sol in self.sols.items():
            mask = direction * d_all > 0
            if mask.any():
                out[mask] = self._invert(sol, direction, u_targets[mask])
        zero = d_all == 0
        out[zero] = self.y0
        return out

    def _invert(self, sol, direction, targets):
        s_nodes = direction * sol.t
        v_nodes = direction * (sol.y[2] - self.u0)
        v_nodes = np.maximum.accumulate(v_nodes)
        tv = direction * (targets - self.u0)
        j = np.clip(np.searchsorted(v_nodes, tv, side="left") - 1, 0, len(s_nodes) - 2)
        lo, hi = s_nodes[j].copy(), s_nodes[j + 1].copy()
        f = sol.sol
        # bisection narrowed by secant steps; u~ is monotone in sigma
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            vm = direction * (f(direction * mid)[2] - self.u0)
            left = vm < tv
            lo = np.where(left, mid, lo)
            hi = np.where(left, hi, mid)
            if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(hi))):
                break
        s = 0.5 * (lo + hi)
        y = f(direction * s)
        return y.T


def _am_trajectory(spec: FlowSpec, init: DivisorState, times: np.ndarray) -> Trajectory:
    ch = spec.chart
    m = chart_model(ch)
    g = ch.genus
    t0 = init.t
    rate = spec.rate / g
    paths = []
    for i in range(g):
        bi, _ = m.band_of(init.phis[i])
        du_lo = rate * (times.min() - t0)
        du_hi = rate * (times.max() - t0)
        lo, hi = min(du_lo, du_hi, 0.0), max(du_lo, du_hi, 0.0)
        paths.append(_PointPath(m, init.phis[i], init.momenta[i], init.u_partial[i], bi,
                                lo, hi, spec))

    def evaluate(ts):
        cols = [p.at(p.u0 + rate * (ts - t0)) for p in paths]
        return np.stack(cols, axis=1)  # (n, g, 3)

    rows = evaluate(times)
    states = [DivisorState(tuple(r[:, 0]), tuple(r[:, 1]),
                           tuple(init.u_partial[i] + rate * (t - t0) for i in range(g)), float(t))
              for r, t in zip(rows, times)]
    return Trajectory(spec, states, lambda ts: evaluate(ts)[:, :, 0])


def _jacobian_trajectory(spec: FlowSpec, init: DivisorState, times: np.ndarray) -> Trajectory:
    ch = spec.chart
    m = chart_model(ch)
    g = ch.genus
    target = np.array(spec.target, dtype=float)
    _check_real(ch, init.phis)

    def rhs(t, y):
        phis, ps = y[:g], y[g:2 * g]
        eta = _eta(m, phis, target)
        return np.concatenate([ps * eta, 0.5 * m.dD2(phis) * eta, np.abs(m.N(phis) * eta)])

    def special(t, y):
        sv = np.linalg.svd(_velocity_matrix(m, y[:g]), compute_uv=False)
        return sv[-1] / sv[0] - 1.0 / COND_EVENT

    special.terminal = True
    y0 = np.concatenate([init.phis, init.momenta, init.u_partial])
    t0 = init.t
    sols = {}
    for direction in (1, -1):
        tend = times.max() if direction > 0 else times.min()
        if direction * (tend - t0) <= 0:
            continue
        sol = solve_ivp(rhs, (t0, tend), y0, method="DOP853", dense_output=True,
                        rtol=spec.rtol, atol=spec.atol, max_step=spec.max_step,
                        events=special if g > 1 else None)
        if sol.status == 1:
            raise DegenerateDivisor(f"divisor becomes special at t = {sol.t[-1]!r}", op="trajectory")
        if not sol.success:
            raise StepFailure(f"integrator failed: {sol.message}", op="trajectory")
        sols[direction] = sol

    def evaluate(ts):
        out = np.empty((len(ts), 3 * g))
        for k, t in enumerate(ts):
            if t == t0:
                out[k] = y0
            else:
                out[k] = sols[1 if t > t0 else -1].sol(t)
        return out

    rows = evaluate(times)
    states = [DivisorState(tuple(r[:g]), tuple(r[g:2 * g]), tuple(r[2 * g:]), float(t))
              for r, t in zip(rows, times)]
    return Trajectory(spec, states, lambda ts: evaluate(ts)[:, :g])


def trajectory(spec: FlowSpec, init: DivisorState, t_span: tuple[float, float] | None = None,
               samples: int | Sequence[float] = 200) -> Trajectory:
    """Integrate the flow and sample it.

    ``samples`` is either a count (uniform over ``t_span``) or explicit times.
    """
    if np.ndim(samples) == 0:
        if t_span is None:
            raise ValueError("t_span is required when samples is a count")
        times = np.linspace(t_span[0], t_span[1], int(samples))
    else:
        times = np.asarray(samples, dtype=float)
    if spec.kind == "am":
        _check_real(spec.chart, init.phis)
        return _am_trajectory(spec, init, times)
    if spec.kind == "jacobian":
        return _jacobian_trajectory(spec, init, times)
    raise ValueError(f"unknown flow kind {spec.kind!r}")


def step(spec: FlowSpec, state: DivisorState, dt: float) -> DivisorState:
    return trajectory(spec, state, samples=[state.t + dt])[0]


def energy(ch: PhiChart, state: DivisorState) -> np.ndarray:
    """(p cos phi)^2 - (1 - w^2) prod(A_j + B_j w^2) per point, w = sin phi."""
    m = chart_model(ch)
    phis = np.array(state.phis)
    ps = np.array(state.momenta)
    w = np.sin(phis)
    prod = np.ones_like(w)
    for A, B in zip(m.A, m.B):
        prod = prod * (A + B * w * w)
    return (ps * np.cos(phis)) ** 2 - (1 - w * w) * prod


def kinematic_defect(ch: PhiChart, state: DivisorState) -> np.ndarray:
    """p^2 - D^2(phi) per point; zero on exact trajectories."""
    m = chart_model(ch)
    phis = np.array(state.phis)
    return np.array(state.momenta) ** 2 - m.D2(phis)
