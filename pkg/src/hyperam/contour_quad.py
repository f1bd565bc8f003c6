"""Real integrals of the holomorphic differentials along the phi-chart.

On the chart x = e_a + c exp(2 i phi) the top differential reduces to

    du_g = N(phi) / D(phi) dphi,
    N = (2 sqrt(c) sin phi)^(g-1),   D^2 = prod_j (A_j + B_j sin^2 phi).

``kind`` selects the integrand: ``"u"`` (signed N/D), ``"unfolded"`` (|N|/D,
monotone in phi) or ``"sigma"`` (1/D, the kinematic time used by the flows).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .curve_model import PhiChart
from .errors import (
    NoConvergence,
    OutsideAdmissibleRange,
    SingularInterior,
    UnclassifiedChart,
    WrongGenus,
)
from .quadrature import chebyshev_converged, tanh_sinh
from .reality import CaseClass, classify_case

KINDS = ("u", "unfolded", "sigma")
HALF_PI = 0.5 * np.pi
BAND_TOL = 1e-12


@dataclass(frozen=True)
class IntegrandSpec:
    chart: PhiChart
    i: int = 1
    kind: str = "u"


@dataclass(frozen=True)
class Band:
    """phi-interval [lo, hi] (mod 2 pi) of one admissible w-range."""

    lo: float
    hi: float
    rotating: bool
    sign: int  # orientation making u increase at the reference point

    @property
    def ref(self) -> float:
        return 0.0 if self.rotating else self.lo

    def shift(self, phi: float, tol: float = BAND_TOL) -> int | None:
        """n with phi - 2 pi n in [lo, hi], or None."""
        if self.rotating:
            return 0
        n = np.floor((phi - self.lo + tol) / (2 * np.pi))
        r = phi - 2 * np.pi * n
        return int(n) if r <= self.hi + tol else None


def _phi_band(lo_w: float, hi_w: float) -> tuple[float, float]:
    if lo_w <= -1 and hi_w >= 1:
        return -np.inf, np.inf
    if hi_w >= 1:
        t = float(np.arcsin(lo_w))
        return t, np.pi - t
    if lo_w <= -1:
        t = float(np.arcsin(-hi_w))
        return -np.pi + t, -t
    return float(np.arcsin(lo_w)), float(np.arcsin(hi_w))


class ChartModel:
    """Real-valued evaluation of the chart integrands for a classified chart."""

    def __init__(self, ch: PhiChart):
        self.chart = ch
        self.g = ch.genus
        try:
            self.case: CaseClass = classify_case(ch)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise UnclassifiedChart(f"chart cannot be classified: {exc}", op="chart_model") from exc
        self.A = np.array(ch.A).real
        self.B = np.array(ch.B).real
        self.c = float(abs(ch.c1))
        self.sqc2 = 2.0 * np.sqrt(self.c)
        # zero angles theta_j of the factors B sin(phi - theta) sin(phi + theta)
        self.theta = [None] * self.g
        for j in range(self.g):
            if self.A[j] < 0 and self.case.k_sq[j] > 1:
                self.theta[j] = float(np.arcsin(1.0 / np.sqrt(self.case.k_sq[j])))
        bands = []
        for lo_w, hi_w in self.case.w_ranges:
            lo, hi = _phi_band(lo_w, hi_w)
            rot = not np.isfinite(lo)
            if rot:
                sign = 1
            else:
                probe = lo + 1e-3 * (hi - lo)
                sign = 1 if self.g == 1 or np.sin(probe) ** (self.g - 1) > 0 else -1
            bands.append(Band(lo, hi, rot, sign))
        self.bands = tuple(bands)
        self._quarter = {}

    # ----- pointwise pieces -------------------------------------------------
    @staticmethod
    def _sin_rel(shift, e, sgn, d):
        """sin(phi + shift) with phi = e + sgn d, exact near the zeros of the factor."""
        n = np.round((e + shift) / np.pi)
        z = -shift + n * np.pi
        off = e - z
        # endpoints built by another float path may miss the zero by an ulp
        off = np.where(np.abs(off) < 1e-14 * np.maximum(1.0, np.abs(e)), 0.0, off)
        r = off + sgn * d
        return np.where(n % 2 == 0, 1.0, -1.0) * np.sin(r)

    def _factors(self, phi, e=None, sgn=None, d=None):
        """Per-pair factors of D^2; pairs with real zeros use the factored form."""
        phi = np.asarray(phi, dtype=float)
        if e is None:
            e, sgn, d = phi, 1.0, 0.0
        s2 = np.sin(phi) ** 2
        out = []
        for j in range(self.g):
            th = self.theta[j]
            if th is None:
                out.append(self.A[j] + self.B[j] * s2)
            else:
                # A + B sin^2 = B sin(phi - theta) sin(phi + theta), exact near the zeros
                out.append(self.B[j] * self._sin_rel(-th, e, sgn, d) * self._sin_rel(th, e, sgn, d))
        return out

    def D2(self, phi, e=None, sgn=None, d=None):
        out = np.ones(np.shape(phi))
        for f in self._factors(phi, e, sgn, d):
            out = out * f
        return out

    def dD2(self, phi):
        """d(D^2)/dphi, consistent with the factored D^2."""
        phi = np.asarray(phi, dtype=float)
        ds2 = np.sin(2 * phi)
        facs = self._factors(phi)
        tot = np.zeros_like(phi)
        for j in range(self.g):
            term = self.B[j] * ds2
            for k in range(self.g):
                if k != j:
                    term = term * facs[k]
            tot = tot + term
        return tot

    def N(self, phi):
        return (self.sqc2 * np.sin(phi)) ** (self.g - 1)

    def n_row(self, k: int, phi):
        """Reduced real density of du_k (k = 1..g) relative to dsigma."""
        return (self.sqc2 * np.sin(phi)) ** (k - 1) / np.sqrt(self.c) ** (self.g - k)

    def integrand(self, kind: str, a: float, b: float):
        if kind not in KINDS:
            raise ValueError(f"unknown integrand kind {kind!r}")

        def f(x, dlo, dhi):
            near_a = dlo <= dhi
            e = np.where(near_a, a, b)
            sgn = np.where(near_a, 1.0, -1.0)
            d = np.where(near_a, dlo, dhi)
            D2 = self.D2(x, e, sgn, d)
            with np.errstate(invalid="ignore", divide="ignore"):
                inv = 1.0 / np.sqrt(D2)
            if kind == "sigma":
                return inv
            nv = self.N(x)
            return (np.abs(nv) if kind == "unfolded" else nv) * inv

        return f

    # ----- bands ------------------------------------------------------------
    def band_of(self, phi: float, band: int | None = None) -> tuple[int, int]:
        """(band index, 2 pi shift) of the band containing phi."""
        idx = range(len(self.bands)) if band is None else [band]
        for bi in idx:
            n = self.bands[bi].shift(phi)
            if n is not None:
                return bi, n
        raise OutsideAdmissibleRange(f"phi = {phi!r} lies outside the admissible ranges "
                                     f"{self.case.w_ranges}")

    def zeros_between(self, a: float, b: float) -> list[float]:
        out = []
        for th in self.theta:
            if th is None:
                continue
            for base in (th, -th):
                n0 = int(np.ceil((a - base) / np.pi)) - 1
                for n in range(n0, n0 + int((b - a) / np.pi) + 3):
                    z = base + n * np.pi
                    if a + BAND_TOL < z < b - BAND_TOL:
                        out.append(z)
        return sorted(out)

    # ----- integration ------------------------------------------------------
    def _piece(self, kind, a, b, method):
        f = self.integrand(kind, a, b)
        if method == "tanh-sinh":
            return tanh_sinh(f, a, b)
        if method == "chebyshev":
            return chebyshev_converged(f, a, b)
        if method == "both":
            t = tanh_sinh(f, a, b)
            c = chebyshev_converged(f, a, b)
            if abs(t - c) > 1e-11 * (1 + abs(t)):
                raise NoConvergence(f"tanh-sinh {t!r} and Chebyshev {c!r} disagree on [{a}, {b}]")
            return t
        raise ValueError(f"unknown method {method!r}")

    def quarter(self, kind: str, method: str = "tanh-sinh") -> float:
        """Integral over [0, pi/2] of the unsigned integrand (rotating charts)."""
        key = ("sigma" if kind == "sigma" else "unfolded", method)
        if key not in self._quarter:
            self._quarter[key] = self._piece(key[0], 0.0, HALF_PI, method)
        return self._quarter[key]

    def integrate(self, kind: str, a: float, b: float, method: str = "tanh-sinh") -> float:
        if a == b:
            return 0.0
        if b < a:
            return -self.integrate(kind, b, a, method)
        mid = 0.5 * (a + b)
        if self.zeros_between(a, b) or not self.D2(mid) > 0:
            raise SingularInterior(f"D^2 vanishes or is negative inside [{a}, {b}]",
                                   op="integrate_phi")
        k0 = int(np.ceil(a / HALF_PI - 1e-13))
        k1 = int(np.floor(b / HALF_PI + 1e-13))
        cuts = [a] + [k * HALF_PI for k in range(k0, k1 + 1) if a < k * HALF_PI < b] + [b]
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            kq = np.floor(lo / HALF_PI + 1e-13)
            full = (abs(lo - kq * HALF_PI) < 1e-13 and abs(hi - (kq + 1) * HALF_PI) < 1e-13)
            if full and self.case.rotating:
                q = self.quarter(kind, method)
                if kind == "u" and self.g % 2 == 0 and np.sin(0.5 * (lo + hi)) < 0:
                    q = -q
                total += q
            else:
                total += self._piece(kind, lo, hi, method)
        return total


@lru_cache(maxsize=256)
def chart_model(ch: PhiChart) -> ChartModel:
    return ChartModel(ch)


# ----- public operations -----------------------------------------------------
def du_over_dphi(ch: PhiChart, i: int, phi: float) -> float:
    """Real density du_g/dphi at phi, oriented so u grows at the reference point."""
    _check_index(ch, i)
    m = chart_model(ch)
    bi, _ = m.band_of(float(phi))
    D2 = m.D2(float(phi))
    if not D2 > 0:
        raise OutsideAdmissibleRange(f"D^2 = {D2!r} at turning point phi = {phi!r}")
    return float(m.bands[bi].sign * m.N(phi) / np.sqrt(D2))


def du_over_dphi_complex(ch: PhiChart, phi):
    """The same density from principal complex roots, before taking real parts."""
    phi = np.asarray(phi, dtype=float)
    s2 = np.sin(phi) ** 2
    den = np.ones(phi.shape, dtype=complex)
    for A, B in zip(ch.A, ch.B):
        den = den * np.sqrt(A + B * s2 + 0j)
    num = (2 * np.sqrt(ch.c1 + 0j) * np.sin(phi)) ** (ch.genus - 1)
    return num / den


def integrate_phi(spec: IntegrandSpec, phi_from: float, phi_to: float,
                  method: str = "tanh-sinh") -> float:
    _check_index(spec.chart, spec.i)
    return chart_model(spec.chart).integrate(spec.kind, float(phi_from), float(phi_to), method)


def u_of_phi(ch: PhiChart, i: int, phi: float, method: str = "tanh-sinh") -> float:
    """Signed u_g from the reference point of the band containing phi."""
    _check_index(ch, i)
    m = chart_model(ch)
    bi, n = m.band_of(float(phi))
    b = m.bands[bi]
    ref = b.ref + 2 * np.pi * n
    return b.sign * m.integrate("u", ref, float(phi), method)


def unfolded_u(ch: PhiChart, phi: float, band: int | None = None,
               method: str = "tanh-sinh") -> float:
    """Monotone integral of |du_g| from the band reference point."""
    m = chart_model(ch)
    bi, n = m.band_of(float(phi), band)
    ref = m.bands[bi].ref + 2 * np.pi * n
    return m.integrate("unfolded", ref, float(phi), method)


def band_period(ch: PhiChart, band: int = 0, kind: str = "unfolded") -> float:
    """Length in the given integral of one closed cycle of a point in ``band``."""
    m = chart_model(ch)
    b = m.bands[band]
    if b.rotating:
        return 2 * m.quarter(kind)
    return 2 * m.integrate(kind, b.lo, b.hi)


@dataclass(frozen=True)
class PeriodLattice:
    omega: float
    omega_prime: complex
    tau: complex
    case: str

    @property
    def tau_raw(self) -> complex:
        return self.omega_prime / self.omega


def _wint(fun, a, b):
    return tanh_sinh(fun, a, b)


def periods(ch: PhiChart) -> PeriodLattice:
    """Half-periods of a genus-1 real chart and the normalized modulus tau.

    tau = 2 omega' / (4 omega), i.e. the lattice spanned by the am-period 4 omega
    and 2 omega', with Re tau reduced into [0, 1).
    """
    if ch.genus != 1:
        raise WrongGenus(f"periods need genus 1, got {ch.genus}")
    m = chart_model(ch)
    A, B = m.A[0], m.B[0]
    label = m.case.label
    if label == "I-1":
        # omega = int_0^1 dw / sqrt((1 - w^2)(A + B w^2))
        omega = _wint(lambda w, dl, dh: 1 / np.sqrt(dh * (1 + w) * (A + B * w * w)), 0.0, 1.0)
        v0 = np.sqrt(A / B)
        im = _wint(lambda v, dl, dh: 1 / np.sqrt((1 + v * v) * B * dh * (v0 + v)), 0.0, v0)
        omega_p = complex(-omega, im)
    elif label == "I-2":
        w0 = np.sqrt(-A / B)
        omega = 2 * _wint(lambda w, dl, dh: 1 / np.sqrt((1 - w * w) * B * dh * (w0 + w)), 0.0, w0)
        im = _wint(lambda w, dl, dh: 1 / np.sqrt(dh * (1 + w) * B * dl * (w + w0)), w0, 1.0)
        omega_p = complex(0.0, im)
    else:
        raise UnclassifiedChart(f"unexpected genus-1 case {label}")
    tau = omega_p / (2 * omega)
    re = tau.real - np.floor(tau.real + 1e-12)
    return PeriodLattice(float(omega), omega_p, complex(re, tau.imag), label)


def _check_index(ch: PhiChart, i: int):
    if not 1 <= i <= ch.genus:
        raise ValueError(f"divisor index i={i} out of range 1..{ch.genus}")
