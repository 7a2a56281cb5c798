"""Multiplier tables, translation operators and the cap Jackson-type operator.

Every operator has two routes: the spectral one (multipliers acting on the
degree components) and an integral one built from quadrature in theta.
For m = 1 on S^2 the integral route uses the geometric circle average and
never touches a harmonic expansion, which makes it an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .harmonic import (
    GriddedCapFunction,
    HarmonicExpansion,
    SpectralFunction,
    ZonalCapFunction,
    circle_points,
    expand,
    synthesize,
)
from .kernel import KernelSpec, kernel_normalize
from .quadrature import integrate_adaptive
from .special_fn import lambda_of, legendre_table

__all__ = [
    "MultiplierTable",
    "multiplier_table",
    "cached_multiplier_table",
    "translation_multipliers",
    "translate_spectral",
    "translate_geometric",
    "jackson_apply_spectral",
    "jackson_apply_integral",
    "IntegralJacksonFunction",
    "int_power",
]

CIRCLE_POINTS = 512
TABLE_BUDGET = 8_000_000


@dataclass(frozen=True)
class MultiplierTable:
    m: int
    spec: KernelSpec
    n: int
    values: np.ndarray

    @property
    def j_max(self) -> int:
        return self.values.size - 1

    def rows(self):
        return [(j, float(x)) for j, x in enumerate(self.values)]

    def eigen_ratios(self, j_max: int = 6) -> np.ndarray:
        """(1 - xi(j)) / (1 - xi(1)) for j = 0..j_max."""
        xi = self.values[: j_max + 1]
        return (1.0 - xi) / (1.0 - xi[1])


def multiplier_table(spec: KernelSpec, m: int, j_max: int, n: int | None = None,
                     tol: float = 1e-10) -> MultiplierTable:
    """xi_k^m(j) = int_0^gamma D(theta) (P_j^n(cos theta))^m sin^{2 lam} theta d theta."""
    if m < 1:
        raise ValueError("translation power m must be >= 1")
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if n is None:
        n = int(round(2 * spec.lam + 2))
    if abs(lambda_of(n) - spec.lam) > 1e-12:
        raise ValueError("dimension does not match kernel lambda")

    def integrand(th):
        return int_power(legendre_table(n, j_max, np.cos(th)), m) * spec.weight(th)

    panels = max(spec.min_panels, j_max // 4)
    # blocks bound the (j_max + 1) x nodes working array
    per_block = max(1, TABLE_BUDGET // ((j_max + 1) * 48))
    blocks = max(1, -(-panels // per_block))
    edges = np.linspace(0.0, spec.gamma, blocks + 1)
    vals = np.zeros(j_max + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        vals += np.atleast_1d(integrate_adaptive(integrand, lo, hi, tol=tol / blocks,
                                                 min_panels=-(-panels // blocks)))
    return MultiplierTable(m, spec, n, vals)


@lru_cache(maxsize=256)
def _cached_table(k, s, gamma, n, m, j_max, tol):
    spec = kernel_normalize(k, s, gamma, lambda_of(n))
    return multiplier_table(spec, m, j_max, n, tol)


def cached_multiplier_table(k: int, s: int, gamma: float, n: int, m: int, j_max: int,
                            tol: float = 1e-10) -> MultiplierTable:
    return _cached_table(int(k), int(s), float(gamma), int(n), int(m), int(j_max), float(tol))


def int_power(a: np.ndarray, m: int) -> np.ndarray:
    """a**m for integer m >= 1 by repeated squaring (float pow is slow on large arrays)."""
    result = None
    base = a
    while m:
        if m & 1:
            result = base.copy() if result is None else result * base
        m >>= 1
        if m:
            base = base * base
    return result


def translation_multipliers(n: int, theta: float, m: int, j_max: int) -> np.ndarray:
    return int_power(legendre_table(n, j_max, math.cos(theta)), m)


def _expansion(f, j_max):
    if isinstance(f, SpectralFunction):
        raise TypeError("pass the expansion, not a synthesized function")
    return f if isinstance(f, HarmonicExpansion) else expand(f, j_max)


def translate_spectral(f, theta: float, m: int = 1, j_max: int = 128) -> SpectralFunction:
    """S_theta^m f = sum_j (P_j^n(cos theta))^m Y_j(f)."""
    if not 0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    if m < 1:
        raise ValueError("m must be >= 1")
    e = _expansion(f, j_max)
    return synthesize(e, translation_multipliers(e.geometry.n, theta, m, e.j_max))


def _circle_average(f, thetas, points, n_phi=CIRCLE_POINTS, budget=2048):
    """Average of f over {y : x . y = cos theta}; returns shape (T, P)."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty((thetas.size, pts.shape[0]))
    step = max(1, budget // max(1, pts.shape[0]))
    for start in range(0, thetas.size, step):
        ring = circle_points(pts, thetas[start:start + step], n_phi)
        out[start:start + step] = np.asarray(f(ring)).mean(axis=-1)
    return out


def translate_geometric(f, theta, x, n_phi: int = CIRCLE_POINTS):
    """Circle average of f* at geodesic distance theta from x (S^2 only).

    The trapezoid rule on the uniformly sampled circle is used.
    """
    geom = f.geometry
    if geom.n != 3:
        raise ValueError("geometric translation is implemented on S^2 (n = 3) only")
    if not np.all((np.asarray(theta) > 0) & (np.asarray(theta) < math.pi)):
        raise ValueError("theta must lie in (0, pi)")
    if isinstance(f, GriddedCapFunction) and f.func is None:
        raise ValueError("geometric translation needs a pointwise-evaluable function")
    x = np.asarray(x, dtype=float)
    vals = _circle_average(f, theta, x, n_phi)
    th = np.asarray(theta)
    shape = th.shape + x.shape[:-1]
    out = vals.reshape(shape)
    return out if out.ndim else float(out)


def jackson_apply_spectral(f, table: MultiplierTable) -> SpectralFunction:
    """J_{k,s}^m f = sum_j xi_k^m(j) Y_j(f)."""
    e = _expansion(f, table.j_max)
    if e.j_max > table.j_max:
        raise ValueError(f"multiplier table covers j <= {table.j_max}, expansion needs {e.j_max}")
    return synthesize(e, table.values)


@dataclass
class IntegralJacksonFunction:
    """J_{k,s}^m f evaluated pointwise by quadrature in theta."""

    f: object
    spec: KernelSpec
    m: int
    j_max: int | None = None
    tol: float = 1e-10
    n_phi: int = CIRCLE_POINTS

    @property
    def geometry(self):
        return self.f.geometry

    @property
    def is_zonal(self) -> bool:
        return isinstance(self.f, ZonalCapFunction) or (
            isinstance(self.f, HarmonicExpansion) and self.f.is_zonal)

    def _components(self, pts):
        e = _expansion(self.f, self.j_max)
        if e.is_zonal:
            psi = e.geometry.polar_angle(pts)
            tab = legendre_table(e.geometry.n, e.j_max, np.cos(psi))
            return (e.coefficients * e.scale)[:, None] * tab
        rows = [e.component(j)(pts) for j in range(e.j_max + 1)]
        return np.asarray(rows)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, pts.shape[-1])
        if self.m == 1 and self.geometry.n == 3 and not isinstance(self.f, HarmonicExpansion):
            def integrand(th):
                return _circle_average(self.f, th, flat, self.n_phi).T * self.spec.weight(th)
        else:
            if self.j_max is None and not isinstance(self.f, HarmonicExpansion):
                raise ValueError("spectral-integrand route needs j_max")
            comps = self._components(flat)
            n = self.geometry.n
            jm = comps.shape[0] - 1

            def integrand(th):
                mult = int_power(legendre_table(n, jm, np.cos(th)), self.m)
                return (comps.T @ mult) * self.spec.weight(th)

        vals = integrate_adaptive(integrand, 0.0, self.spec.gamma, tol=self.tol,
                                  min_panels=self.spec.min_panels)
        return np.asarray(vals).reshape(pts.shape[:-1])

    def profile(self, theta):
        if not self.is_zonal:
            raise TypeError("profile is defined for zonal inputs only")
        th = np.asarray(theta, dtype=float)
        out = self(self.geometry.meridian(th))
        return out if out.ndim else float(out)


def jackson_apply_integral(f, spec: KernelSpec, m: int = 1, j_max: int | None = None,
                           tol: float = 1e-10) -> IntegralJacksonFunction:
    """J_{k,s}^m f(x) = int_0^gamma S_theta^m f(x) D(theta) sin^{2 lam} theta d theta.

    m = 1 on S^2 uses circle averages of f*; otherwise S_theta^m comes from
    the degree components of f up to ``j_max``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    return IntegralJacksonFunction(f, spec, m, j_max, tol)

