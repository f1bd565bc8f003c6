"""Acceptance criteria; each test prints one PASS/FAIL line."""
import time

import numpy as np
import pytest
from scipy.special import roots_legendre

from hyperam import (
    FlowSpec,
    IntegrandSpec,
    am_point,
    check_reality,
    classify_case,
    energy,
    initial_state,
    integrate_phi,
    new_curve,
    periods,
    shape,
    smkdv_residual,
    synthesize_curve,
    trajectory,
    winding_number,
)
from hyperam.amfun import am_period, chart_am_oracle
from hyperam.contour_quad import chart_model, du_over_dphi_complex
from hyperam.soliton import mkdv_grid, mkdv_grid_residual, period_trajectory
from oracles import am_ode, genus2_v_integral
from samplers import GENUS1_CASES, GENUS2_CASES, random_chart

pytestmark = pytest.mark.acceptance

WINDING = {"I-1": 1, "I-2": 0, "II-1": 2, "II-2": 0, "II-3a": 2, "II-3b": 0, "II-3c": 0}


def verdict(report, n, ok, detail):
    report(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def test_moduli_lines(report, rng):
    t0 = time.perf_counter()
    worst = {}
    for case, target in (("I-1", 0.5), ("I-2", 0.0)):
        errs = []
        for _ in range(50):
            tau = periods(random_chart(rng, case)).tau
            errs.append(abs(tau.real - target) if tau.imag > 0 else np.inf)
        worst[case] = max(errs)
    dt = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-8 and dt < 10
    verdict(report, 1, ok, f"Re tau error I-1 {worst['I-1']:.1e}, I-2 {worst['I-2']:.1e}, {dt:.1f} s")


def test_winding_table(report, rng):
    t0 = time.perf_counter()
    bad = []
    for case in GENUS1_CASES + GENUS2_CASES:
        for _ in range(10):
            ch = random_chart(rng, case)
            w = winding_number(period_trajectory(ch, 400, rtol=1e-10, atol=1e-12), ch)
            if w != WINDING[case]:
                bad.append((case, w))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    verdict(report, 2, ok, f"{70 - len(bad)}/70 windings match the table, {dt:.1f} s")


def test_am_oracle_equivalence(report, rng):
    worst = 0.0
    for case in GENUS1_CASES:
        for ch in [random_chart(rng, case) for _ in range(3)]:
            m = chart_model(ch)
            u = np.linspace(0.0, 3 * am_period(ch), 1000)
            got = np.array([am_point(ch, 1, v) for v in u])
            agm = chart_am_oracle(ch, u)
            phi0 = got[0]
            ode = am_ode(m.A[0], m.B[0], u, phi0, np.sqrt(max(m.D2(phi0), 0.0)))
            worst = max(worst, np.abs(got - agm).max(), np.abs(got - ode).max())
    verdict(report, 3, worst < 1e-8, f"max |am - oracle| {worst:.1e} on 1000-point grids, 3 curves per case")


def _imag_u(ch, phis):
    # path integral of the principal-root density along each point's path
    m = chart_model(ch)
    x, w = roots_legendre(8)
    total = 0.0
    for path in phis.T:
        for a, b in zip(path[:-1], path[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            nodes = mid + half * x
            if m.D2(nodes).min() <= 1e-10:
                continue  # turning point: the real density is the boundary limit
            total = max(total, abs(half * np.dot(w, du_over_dphi_complex(ch, nodes)).imag))
    return total


def test_reality_invariants(report, rng):
    im_u, tang = 0.0, 0.0
    for case in GENUS1_CASES + GENUS2_CASES:
        for _ in range(2):
            ch = random_chart(rng, case)
            tr = period_trajectory(ch, 600)
            im_u = max(im_u, _imag_u(ch, tr.phis))
            tang = max(tang, max(abs(abs(s.tangent) - 1) for s in shape(tr)))
    ok = im_u < 1e-9 and tang < 1e-10
    verdict(report, 4, ok, f"max |Im du_g| {im_u:.1e}, max ||tangent| - 1| {tang:.1e}")


def test_static_mkdv(report, rng):
    t0 = time.perf_counter()
    worst, fitted = 0.0, 0.0
    for case in GENUS1_CASES:
        for _ in range(5):
            ch = random_chart(rng, case)
            sh = shape(period_trajectory(ch, 4001, rtol=1e-13, atol=1e-15))
            period = sh[-1].t1 - sh[0].t1
            worst = max(worst, smkdv_residual(sh, period=period).relative)
            fitted = max(fitted, smkdv_residual(sh, 0.5, period=period).relative)
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and dt < 30
    verdict(report, 5, ok, f"cubic 1/3 max relative residual {worst:.1e} "
            f"(cubic 1/2 gives {fitted:.1e}), {dt:.1f} s")


def test_mkdv(report, rng):
    t0 = time.perf_counter()
    t1 = np.linspace(0.0, 0.1, 200)
    t2 = np.linspace(-0.0025, 0.0025, 20)
    worst, fitted, fit_rel = 0.0, [], 0.0
    for case in ("II-1", "II-2", "II-3a"):
        ch = random_chart(rng, case)
        r = mkdv_grid_residual(mkdv_grid(ch, t1, t2), t1, t2)
        worst = max(worst, r.relative)
        fitted.append(r.fitted[1])
        fit_rel = max(fit_rel, r.fitted_relative)
    dt = time.perf_counter() - t0
    ok = worst < 1e-3 and dt < 300
    verdict(report, 6, ok, f"cubic 1/4 max relative residual {worst:.1e} (fitted cubic "
            f"{', '.join(f'{c:.3f}' for c in fitted)} with relative residual {fit_rel:.1e}), {dt:.1f} s")


def test_genus2_elliptic_reduction(report, rng):
    worst = 0.0
    for k in range(100):
        ch = random_chart(rng, GENUS2_CASES[k % len(GENUS2_CASES)])
        m = chart_model(ch)
        b = m.bands[0]
        lo, hi = (0.0, np.pi / 2) if b.rotating else (max(b.lo, 0.0), min(b.hi, np.pi / 2))
        p0, p1 = np.sort(rng.uniform(lo, hi, 2))
        direct = integrate_phi(IntegrandSpec(ch, 1, "u"), p0, p1)
        ref = genus2_v_integral(m.A, m.B, m.c, p0, p1)
        worst = max(worst, abs(direct - ref) / max(abs(ref), 1e-300))
    verdict(report, 7, worst < 1e-10, f"max relative gap to the Carlson form {worst:.1e} over 100 pairs")


def test_energy_conservation(report, rng):
    worst = 0.0
    for case in GENUS1_CASES + GENUS2_CASES:
        ch = random_chart(rng, case)
        tr = period_trajectory(ch, 300, rtol=1e-13, atol=1e-15)
        E = np.array([energy(ch, s) for s in tr])
        worst = max(worst, np.abs(E - E[0]).max())
        if ch.genus == 2:
            spec = FlowSpec.jacobian(ch, [0.0, 1.0], rtol=1e-12, atol=1e-14)
            # short span: longer runs can reach a special divisor
            st = initial_state(ch)
            E = np.array([energy(ch, s) for s in trajectory(spec, st, (0.0, 0.02), 50)])
            worst = max(worst, np.abs(E - E[0]).max())
    verdict(report, 8, worst < 1e-9, f"max energy drift {worst:.1e}")


def test_pairing_checker(report, rng):
    accepted = rejected = 0
    for k in range(100):
        g = 2 + k % 2
        e_a = -rng.uniform(0.5, 3.0)
        c = abs(e_a)
        ratios = c * np.exp(rng.uniform(0.1, 2.0, g) * rng.choice([-1, 1], g))
        signs = rng.choice([-1, 1], g)
        curve, _ = synthesize_curve(g, e_a, ratios, signs)
        accepted += check_reality(curve, 1).passed
        pts = np.array(curve.branch_points)
        scale = np.abs(pts).max()
        j = rng.integers(1, len(pts))
        pts[j] += 1e-3 * scale * rng.choice([-1, 1])
        rep = check_reality(new_curve(pts), 1)
        rejected += (not rep.passed) and bool(rep.violations)
    ok = accepted == 100 and rejected == 100
    verdict(report, 9, ok, f"{accepted}/100 synthesized curves accepted, {rejected}/100 perturbed rejected")
