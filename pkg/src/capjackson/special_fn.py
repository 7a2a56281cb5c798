"""Gegenbauer polynomials, normalized Legendre polynomials and sphere volumes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "UltrasphericalIndex",
    "gegenbauer_eval",
    "gegenbauer_at_one",
    "legendre_ratio",
    "legendre_table",
    "sphere_volume",
    "lambda_of",
]

T_SLACK = 1e-12


@dataclass(frozen=True)
class UltrasphericalIndex:
    lam: float
    degree: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if int(self.degree) != self.degree or self.degree < 0:
            raise ValueError(f"degree must be a non-negative integer, got {self.degree}")


def lambda_of(n: int) -> float:
    """Gegenbauer index (n - 2) / 2 attached to S^{n-1}."""
    if n < 3:
        raise ValueError(f"dimension n must be >= 3, got {n}")
    return (n - 2) / 2.0


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + T_SLACK):
        raise ValueError("argument t outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def gegenbauer_eval(idx: UltrasphericalIndex, t):
    """G_j^lambda(t) by the three-term recurrence. Accepts scalar or array t."""
    x = _check_t(t)
    lam, j = idx.lam, idx.degree
    g_prev = np.ones_like(x)
    if j == 0:
        return g_prev if g_prev.ndim else float(g_prev)
    g = 2.0 * lam * x
    for i in range(2, j + 1):
        g_prev, g = g, (2.0 * (i + lam - 1.0) * x * g - (i + 2.0 * lam - 2.0) * g_prev) / i
    return g if g.ndim else float(g)


def gegenbauer_at_one(idx: UltrasphericalIndex) -> float:
    # Gamma(2 lam + j) / (Gamma(j + 1) Gamma(2 lam)) as a running product
    value = 1.0
    for i in range(idx.degree):
        value *= (2.0 * idx.lam + i) / (i + 1.0)
    return value


def legendre_table(n: int, j_max: int, t) -> np.ndarray:
    """Rows P_0^n(t) .. P_{j_max}^n(t), shape (j_max + 1,) + t.shape.

    Uses the recurrence for the normalized polynomials directly, so values
    stay within [-1, 1] for any degree.
    """
    lam = lambda_of(n)
    x = _check_t(t)
    out = np.empty((j_max + 1,) + x.shape)
    out[0] = 1.0
    if j_max >= 1:
        out[1] = x
    for j in range(2, j_max + 1):
        denom = 2.0 * lam + j - 1.0
        out[j] = (2.0 * (j + lam - 1.0) * x * out[j - 1] - (j - 1.0) * out[j - 2]) / denom
    return out


def legendre_ratio(n: int, j: int, t):
    """P_j^n(t) = G_j^lambda(t) / G_j^lambda(1) with lambda = (n - 2) / 2."""
    if n < 3:
        raise ValueError(f"dimension n must be >= 3, got {n}")
    if j < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(t, dtype=float)
    p = legendre_table(n, j, x)[j]
    return p if p.ndim else float(p)


def sphere_volume(n: int) -> float:
    """Surface measure of S^{n-1} in R^n."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
