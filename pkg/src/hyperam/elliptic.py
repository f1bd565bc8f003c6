"""Classical elliptic helpers (parameter convention m = k^2).

Used as independent oracles for the genus-1 am function.
"""
from __future__ import annotations

import numpy as np


def agm(a: float, b: float, tol: float = 1e-16) -> float:
    for _ in range(64):
        if abs(a - b) <= tol * abs(a):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return a


def ellipk(m: float) -> float:
    """Complete integral K(m) for m < 1 (negative m allowed)."""
    if m >= 1:
        raise ValueError("K(m) diverges for m >= 1")
    return np.pi / (2 * agm(1.0, np.sqrt(1.0 - m)))


def _am_agm(u, m: float):
    # descending Landen/AGM scheme, 0 <= m < 1
    u = np.asarray(u, dtype=float)
    if m == 0:
        return u.copy()
    a, b, c = 1.0, np.sqrt(1.0 - m), np.sqrt(m)
    cs, as_ = [], []
    while abs(c) > 1e-17 and len(as_) < 64:
        as_.append(a)
        cs.append(c)
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
    n = len(as_)
    phi = 2.0 ** n * a * u
    for j in range(n - 1, -1, -1):
        # c_{j+1}/a_{j+1} with the arrays shifted by one
        cj = cs[j + 1] if j + 1 < n else c
        aj = as_[j + 1] if j + 1 < n else a
        phi = 0.5 * (phi + np.arcsin(cj / aj * np.sin(phi)))
    return phi


def jacobi_am(u, m: float):
    """Amplitude am(u | m) for any real m, lifted continuously in u."""
    u = np.asarray(u, dtype=float)
    if 0 <= m < 1:
        return _am_agm(u, m)
    if m < 0:
        mu = -m / (1.0 - m)
        s = np.sqrt(1.0 - m)
        psi = _am_agm(s * u, mu)
        phi = np.arctan2(np.sin(psi), s * np.cos(psi))
        return phi + 2 * np.pi * np.round((psi - phi) / (2 * np.pi))
    if m == 1:
        return 2 * np.arctan(np.tanh(0.5 * u))  # gd(u)
    k = np.sqrt(m)
    return np.arcsin(np.sin(_am_agm(k * u, 1.0 / m)) / k)


def jacobi_sn(u, m: float):
    return np.sin(jacobi_am(u, m))
