"""Hyperelliptic am and al functions.

Each divisor point runs along its admissible phi-band. ``am_point`` inverts the
unfolded integral  u~(phi) = int |du_g|,  which is monotone along the motion:
on a rotating band phi gains pi per period, on a librating band the point
travels lo -> hi and back.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .contour_quad import chart_model
from .curve_model import PhiChart, x_of_phi
from .elliptic import ellipk, jacobi_am, jacobi_sn
from .errors import InversionFailure

GRID = 33


@dataclass(frozen=True)
class AmEvaluation:
    u: float
    phis: tuple[float, ...]
    phi_total: float
    al: complex
    tangent: complex  # prod (x_i - e_a) / R evaluated directly


class _Inverter:
    """Inverse of the unfolded integral on one band."""

    def __init__(self, ch: PhiChart, band: int):
        m = chart_model(ch)
        b = m.bands[band]
        self.model = m
        self.rotating = b.rotating
        if b.rotating:
            self.lo, self.hi = 0.0, np.pi
        else:
            self.lo, self.hi = b.lo, b.hi
        th = np.linspace(0.0, np.pi, GRID)
        self.theta = th
        self.phi_nodes = np.array([self._phi(t) for t in th])
        self.phi_nodes[0], self.phi_nodes[-1] = self.lo, self.hi
        steps = [m.integrate("unfolded", p0, p1)
                 for p0, p1 in zip(self.phi_nodes[:-1], self.phi_nodes[1:])]
        self.cum = np.concatenate([[0.0], np.cumsum(steps)])
        # rotating: one period moves phi by pi; librating: there and back
        self.span = self.cum[-1]
        self.period = self.span if self.rotating else 2 * self.span

    def _phi(self, th: float) -> float:
        if self.rotating:
            return th
        h = self.hi - self.lo
        # lo + h (1 - cos th) / 2, written to hit both endpoints exactly
        if th <= 0.5 * np.pi:
            return self.lo + h * np.sin(0.5 * th) ** 2
        return self.hi - h * np.cos(0.5 * th) ** 2

    def phi_of(self, r: float) -> float:
        """phi with unfolded integral r from the band start, 0 <= r <= span."""
        if r <= 0:
            return self.lo
        if r >= self.span:
            return self.hi
        k = int(np.searchsorted(self.cum, r, side="right")) - 1
        k = min(max(k, 0), GRID - 2)
        p0 = self.phi_nodes[k]
        base = self.cum[k]

        def f(t):
            return base + self.model.integrate("unfolded", p0, self._phi(t)) - r

        try:
            t = brentq(f, self.theta[k], self.theta[k + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
        except (ValueError, RuntimeError) as exc:
            raise InversionFailure(f"no bracketed root for u~ = {r!r}: {exc}") from exc
        return float(self._phi(t))

    def am(self, u: float) -> float:
        n = np.floor(u / self.period)
        r = u - n * self.period
        if self.rotating:
            return float(n * np.pi + self.phi_of(r))
        if r > self.span:
            r = self.period - r
        return self.phi_of(r)


@lru_cache(maxsize=64)
def _inverter(ch: PhiChart, band: int) -> _Inverter:
    return _Inverter(ch, band)


def am_point(ch: PhiChart, i: int, u: float, band: int = 0) -> float:
    """Angle of divisor point i after unfolded time u from its reference point."""
    if not 1 <= i <= ch.genus:
        raise ValueError(f"divisor index i={i} out of range 1..{ch.genus}")
    return _inverter(ch, band).am(float(u))


def am_period(ch: PhiChart, band: int = 0) -> float:
    return _inverter(ch, band).period


def hyper_am(ch: PhiChart, states: Sequence) -> list[AmEvaluation]:
    """am/al values for divisor states (anything with ``phis`` and ``t``)."""
    R = abs(ch.c1) ** ch.genus
    out = []
    for st in states:
        phis = tuple(float(p) for p in st.phis)
        tot = float(sum(phis))
        xs = x_of_phi(ch, np.array(phis))
        tan = complex(np.prod(np.asarray(xs) - ch.e_a) / R)
        out.append(AmEvaluation(float(st.t), phis, tot, complex(np.exp(1j * tot)), tan))
    return out


def am_genus1_oracle(k_sq: float, u):
    """Classical Jacobi amplitude am(u | k^2), computed by the AGM scheme."""
    return jacobi_am(u, float(k_sq))


def chart_am_oracle(ch: PhiChart, u):
    """Closed form of the genus-1 chart am function in Jacobi functions."""
    m = chart_model(ch)
    if ch.genus != 1:
        raise ValueError("closed form only for genus 1")
    k_sq = m.case.k_sq[0]
    scale = np.sqrt(abs(m.A[0]))
    u = np.asarray(u, dtype=float)
    if m.case.label == "I-1":
        return jacobi_am(scale * u, k_sq)
    k = np.sqrt(k_sq)
    nu = 1.0 - 1.0 / k_sq
    sn = jacobi_sn(k * scale * u + ellipk(nu), nu)
    return 0.5 * np.pi - np.arcsin(np.sqrt(nu) * sn)


def default_offsets(ch: PhiChart, band: int = 0) -> tuple[float, ...]:
    """Unfolded starting positions (i - 1) P / (g + 1) of the divisor points."""
    g = ch.genus
    P = am_period(ch, band)
    return tuple(i * P / (g + 1) for i in range(g))


def hyper_am_function(ch: PhiChart, u: float, band: int = 0,
                      offsets: Sequence[float] | None = None) -> AmEvaluation:
    """phi_a(u) = sum_i phi_i, each point at unfolded position offset_i + u / g."""
    g = ch.genus
    offs = default_offsets(ch, band) if offsets is None else tuple(offsets)
    phis = tuple(am_point(ch, i + 1, offs[i] + u / g, band) for i in range(g))
    tot = float(sum(phis))
    R = abs(ch.c1) ** g
    xs = x_of_phi(ch, np.array(phis))
    tan = complex(np.prod(np.asarray(xs) - ch.e_a) / R)
    return AmEvaluation(float(u), phis, tot, complex(np.exp(1j * tot)), tan)
