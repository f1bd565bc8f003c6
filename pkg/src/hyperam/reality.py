"""Reality conditions, case classification and curve synthesis."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .curve_model import Curve, PhiChart, chart, new_curve
from .errors import (
    DegenerateSynthesis,
    EmptyAdmissibleRange,
    NonRealBranchPoint,
    UnclassifiableSigns,
)

PAIR_RTOL = 1e-10
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class RealityReport:
    passed: bool
    a: int
    e_a: float
    pairs: tuple[tuple[int, int], ...]
    R: float
    violations: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def sigma(self) -> tuple[int, ...]:
        return tuple(b for p in self.pairs for b in p)


@dataclass(frozen=True)
class CaseClass:
    genus: int
    label: str
    k_sq: tuple[float, ...]
    w_ranges: tuple[tuple[float, float], ...]
    rotating: bool
    signs: tuple[int, ...] = field(default=())

    @property
    def predicted_winding(self) -> int:
        return predicted_winding(self)


def _real_points(curve: Curve) -> np.ndarray:
    pts = np.array(curve.branch_points)
    bad = [i + 1 for i, p in enumerate(pts) if abs(p.imag) > IMAG_TOL * curve.scale]
    if bad:
        raise NonRealBranchPoint(f"branch points {bad} are not real")
    return pts.real


def _matchings(items: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, other in enumerate(rest):
        for tail in _matchings(rest[:k] + rest[k + 1:]):
            yield [(first, other)] + tail


def _order_pairs(pairs, x: np.ndarray, e_a: float):
    # each pair (lower, upper); pairs right of e_a first, then by position
    pairs = [tuple(sorted(p, key=lambda b: x[b - 1])) for p in pairs]
    return tuple(sorted(pairs, key=lambda p: (x[p[0] - 1] < e_a, x[p[0] - 1])))


def check_reality(curve: Curve, a: int) -> RealityReport:
    """Test whether the chart around e_a carries real am/al data."""
    x = _real_points(curve)
    n = len(x)
    if not 1 <= a <= n:
        raise ValueError(f"branch index a={a} out of range 1..{n}")
    e_a = float(x[a - 1])
    others = [b for b in range(1, n + 1) if b != a]
    g = curve.genus

    if g == 1:
        b, c = others
        dprod = (x[b - 1] - e_a) * (x[c - 1] - e_a)
        pairs = _order_pairs([(b, c)], x, e_a)
        if dprod <= 0:
            return RealityReport(False, a, e_a, pairs, float("nan"),
                                 ("offsets e_b - e_a and e_c - e_a have opposite signs",))
        return RealityReport(True, a, e_a, pairs, float(np.sqrt(dprod)),
                             notes=("genus 1: the pair product need not equal e_a^2",))

    violations = []
    if not e_a < 0:
        violations.append(f"e_a = {e_a!r} must be strictly negative")
    target = e_a * e_a
    found = None
    for m in _matchings(others):
        if all(abs((x[c - 1] - e_a) * (x[d - 1] - e_a) - target) <= PAIR_RTOL * max(target, 1e-300)
               for c, d in m):
            found = m
            break
    if found is None:
        violations.append("no pairing of the remaining branch points has offset products e_a^2")
        return RealityReport(False, a, e_a, (), float("nan"), tuple(violations))
    pairs = _order_pairs(found, x, e_a)
    R = abs(e_a) ** g
    return RealityReport(not violations, a, e_a, pairs, R, tuple(violations))


def reality_chart(curve: Curve, a: int) -> tuple[RealityReport, PhiChart]:
    rep = check_reality(curve, a)
    if not rep.passed:
        raise NonRealBranchPoint("; ".join(rep.violations), op="check_reality")
    return rep, chart(curve, a, rep.sigma)


def _sign_intervals(A: np.ndarray, B: np.ndarray) -> list[tuple[float, float]]:
    """Subintervals of [0, 1] where prod_j (A_j + B_j w^2) > 0."""
    cuts = {0.0, 1.0}
    for a_, b_ in zip(A, B):
        if a_ * b_ < 0 and -a_ / b_ < 1:
            cuts.add(float(1 / np.sqrt(-b_ / a_)))
    cuts = sorted(cuts)
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        w = 0.5 * (lo + hi)
        if np.prod(A + B * w * w) > 0:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return out


def _mirror(pos: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    """Symmetric set in [-1, 1] from its part in [0, 1], merged across 0."""
    out = []
    for lo, hi in pos:
        if lo == 0.0:
            out.append((-hi, hi))
        else:
            out.append((lo, hi))
            out.append((-hi, -lo))
    return tuple(out)


def classify_case(ch: PhiChart) -> CaseClass:
    """Case label and admissible w = sin(phi) ranges of a real chart."""
    g = ch.genus
    offs = np.array(ch.offsets)
    if np.any(np.abs(offs.imag) > IMAG_TOL * ch.curve.scale):
        raise NonRealBranchPoint("chart offsets are not real", op="classify_case")
    offs = offs.real
    signs = []
    for j in range(g):
        d, e = offs[2 * j], offs[2 * j + 1]
        if d * e <= 0:
            raise UnclassifiableSigns(f"pair {j + 1} has offsets of opposite sign ({d}, {e})")
        signs.append(1 if d > 0 else -1)
    A = np.array(ch.A).real
    B = np.array(ch.B).real
    k_sq = tuple(float(-b / a) for a, b in zip(A, B))
    neg = [j for j in range(g) if signs[j] < 0]
    npos = g - len(neg)
    rotating = False

    if g == 1:
        if npos == 1:
            label, ranges, rotating = "I-1", ((-1.0, 1.0),), True
        else:
            k2 = k_sq[0]
            if k2 <= 1:
                raise EmptyAdmissibleRange(f"negative pair with k^2 = {k2} <= 1 admits no real w")
            w0 = 1 / np.sqrt(k2)
            label, ranges = "I-2", ((w0, 1.0), (-1.0, -w0))
    elif g == 2:
        if npos == 2:
            label, ranges, rotating = "II-1", ((-1.0, 1.0),), True
        elif npos == 1:
            k2 = k_sq[neg[0]]
            if k2 <= 1:
                raise EmptyAdmissibleRange(f"negative pair with k^2 = {k2} <= 1 admits no real w")
            w0 = 1 / np.sqrt(k2)
            label, ranges = "II-2", ((w0, 1.0), (-1.0, -w0))
        else:
            k1, k2 = sorted(np.sqrt(k_sq))
            if k2 < 1:
                label, ranges, rotating = "II-3a", ((-1.0, 1.0),), True
            elif k1 > 1:
                label, ranges = "II-3c", ((1 / k1, 1.0), (-1.0, -1 / k1))
            else:
                label, ranges = "II-3b", ((-1 / k2, 1 / k2),)
    else:
        ranges = _mirror(_sign_intervals(A, B))
        if not ranges:
            raise EmptyAdmissibleRange("product of pair factors is negative on all of [-1, 1]")
        rotating = ranges == ((-1.0, 1.0),)
        label = "G-general"
    return CaseClass(g, label, k_sq, tuple((float(lo), float(hi)) for lo, hi in ranges),
                     rotating, tuple(signs))


_WINDING = {"I-1": 1, "I-2": 0, "II-1": 2, "II-2": 0, "II-3a": 2, "II-3b": 0, "II-3c": 0}


def predicted_winding(cc: CaseClass) -> int:
    if cc.label in _WINDING:
        return _WINDING[cc.label]
    return cc.genus if cc.rotating else 0


def synthesize_curve(g: int, e_a: float, ratios: Sequence[float],
                     signs: Sequence[int] | None = None) -> tuple[Curve, PhiChart]:
    """Curve with pairs (e_a + s r, e_a + s e_a^2 / r), which passes the reality check."""
    if g < 1:
        raise ValueError("genus must be >= 1")
    if not e_a < 0:
        raise ValueError(f"e_a must be negative, got {e_a}")
    if len(ratios) != g:
        raise ValueError(f"need {g} ratios, got {len(ratios)}")
    signs = [1] * g if signs is None else [int(s) for s in signs]
    if len(signs) != g or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be a sequence of +1/-1 of length g")
    c = abs(e_a)
    pts = [float(e_a)]
    for r, s in zip(ratios, signs):
        if not r > 0:
            raise ValueError(f"ratios must be positive, got {r}")
        if abs(r - c) <= 1e-9 * c:
            raise DegenerateSynthesis(f"ratio {r} equals |e_a|: the pair collapses to a double point")
        pts += [e_a + s * r, e_a + s * c * c / r]
    arr = np.array(pts)
    gaps = np.abs(arr[:, None] - arr[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= 1e-9 * (1 + np.abs(arr).max()):
        raise DegenerateSynthesis("synthesized branch points collide")
    curve = new_curve(pts)
    rep = check_reality(curve, 1)
    if not rep.passed:
        raise DegenerateSynthesis("; ".join(rep.violations))
    # keep the caller's pair order, each pair sorted
    sigma = []
    for j in range(g):
        b, c = 2 + 2 * j, 3 + 2 * j
        sigma += [b, c] if pts[b - 1] < pts[c - 1] else [c, b]
    return curve, chart(curve, 1, sigma)
