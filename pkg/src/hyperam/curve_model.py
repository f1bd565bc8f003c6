"""Hyperelliptic curves y^2 = prod(x - e_b) and the phi-chart around a branch point."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DuplicateBranchPoint, EvenCount


@dataclass(frozen=True)
class Curve:
    """Odd-degree hyperelliptic curve given by its finite branch points.

    ``coeffs`` holds lambda_0 .. lambda_{2g}; the leading coefficient of the
    monic polynomial (lambda_{2g+1} = 1) is implicit.
    """

    branch_points: tuple[complex, ...]
    coeffs: tuple[complex, ...]

    @property
    def genus(self) -> int:
        return (len(self.branch_points) - 1) // 2

    @property
    def scale(self) -> float:
        return 1.0 + max(abs(e) for e in self.branch_points)

    def e(self, b: int) -> complex:
        """Branch point e_b (1-based)."""
        return self.branch_points[b - 1]

    def lam(self, j: int) -> complex:
        if j == 2 * self.genus + 1:
            return 1.0 + 0j
        return self.coeffs[j]

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(abs(e.imag) <= tol * self.scale for e in self.branch_points)


def new_curve(points: Sequence[complex], tol: float = 1e-12) -> Curve:
    pts = tuple(complex(p) for p in points)
    n = len(pts)
    if n < 3 or n % 2 == 0:
        raise EvenCount(f"need an odd number >= 3 of branch points, got {n}")
    scale = 1.0 + max(abs(p) for p in pts)
    arr = np.array(pts)
    gaps = np.abs(arr[:, None] - arr[None, :])
    gaps[np.diag_indices(n)] = np.inf
    if gaps.min() <= tol * scale:
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise DuplicateBranchPoint(f"branch points {i + 1} and {j + 1} coincide: {pts[i]}")
    # np.poly returns the monic coefficients, highest power first
    lam = np.poly(arr)[::-1][:-1]
    if all(p.imag == 0 for p in pts):
        lam = lam.real.astype(complex)
    return Curve(pts, tuple(complex(c) for c in lam))


def eval_y_squared(curve: Curve, x):
    """prod_b (x - e_b); accepts scalars or arrays."""
    x = np.asarray(x, dtype=complex)
    out = np.ones_like(x)
    for e in curve.branch_points:
        out = out * (x - e)
    return out if out.ndim else complex(out)


def eval_y_squared_coeffs(curve: Curve, x):
    """Same polynomial through the coefficients (Horner)."""
    x = np.asarray(x, dtype=complex)
    out = np.ones_like(x)
    for c in reversed(curve.coeffs):
        out = out * x + c
    return out if out.ndim else complex(out)


def _quarter_root(z: complex) -> complex:
    # principal fourth root; sqrt(sqrt(z)) has the same branch
    return np.sqrt(np.sqrt(complex(z)))


@dataclass(frozen=True)
class PhiChart:
    """Circle chart x = e_a + c_1 exp(2 i phi) around the branch point e_a.

    ``sigma`` lists the remaining branch points (1-based) grouped in pairs
    (sigma_1, sigma_2), (sigma_3, sigma_4), ...
    For pair j, with offsets d = e_{sigma_{2j-1}} - e_a and e = e_{sigma_{2j}} - e_a:

    * ``c_pairs[j]``  = sqrt(d e)
    * ``k_moduli[j]`` = 2 i (d e)^(1/4) / (sqrt d - sqrt e)
    * ``A[j]`` = (sqrt d - sqrt e)^2,  ``B[j]`` = 4 sqrt(d e)

    so that the chart integrand denominator squared is prod_j (A_j + B_j sin^2 phi).
    All roots are principal.
    """

    curve: Curve
    a: int
    sigma: tuple[int, ...]
    offsets: tuple[complex, ...]
    c_pairs: tuple[complex, ...]
    k_moduli: tuple[complex, ...]
    A: tuple[complex, ...]
    B: tuple[complex, ...]
    prefactor: complex

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def e_a(self) -> complex:
        return self.curve.e(self.a)

    @property
    def c1(self) -> complex:
        return self.c_pairs[0]

    @property
    def k_sq(self) -> tuple[complex, ...]:
        # -B/A is the same number as k^2 but avoids the fourth roots
        return tuple(-b / a for a, b in zip(self.A, self.B))

    def pair(self, j: int) -> tuple[int, int]:
        """1-based branch indices of pair j (0-based)."""
        return self.sigma[2 * j], self.sigma[2 * j + 1]


def chart(curve: Curve, a: int, sigma: Sequence[int] | None = None) -> PhiChart:
    n = len(curve.branch_points)
    if not 1 <= a <= n:
        raise ValueError(f"branch index a={a} out of range 1..{n}")
    if sigma is None:
        sigma = [b for b in range(1, n + 1) if b != a]
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != [b for b in range(1, n + 1) if b != a]:
        raise ValueError(f"sigma {sigma} is not a permutation of the other branch indices")
    e_a = curve.e(a)
    offs = tuple(curve.e(s) - e_a for s in sigma)
    cs, ks, As, Bs = [], [], [], []
    pref = 1.0 + 0j
    for j in range(curve.genus):
        d, e = offs[2 * j], offs[2 * j + 1]
        sd, se = np.sqrt(d), np.sqrt(e)
        diff = sd - se
        cs.append(complex(np.sqrt(d * e)))
        ks.append(complex(2j * _quarter_root(d * e) / diff))
        As.append(complex(diff * diff))
        Bs.append(complex(4 * np.sqrt(d * e)))
        pref *= diff
    return PhiChart(curve, a, sigma, offs, tuple(cs), tuple(ks), tuple(As), tuple(Bs), complex(pref))


def x_of_phi(ch: PhiChart, phi):
    phi = np.asarray(phi, dtype=float)
    out = ch.e_a + ch.c1 * np.exp(2j * phi)
    return out if out.ndim else complex(out)
