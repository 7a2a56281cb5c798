"""Cap functions, degree projections, zonal expansions and spectral synthesis.

Zonal functions (depending only on the angle to the cap center) are handled
for any dimension n >= 3 through 1-D integrals. General functions are
supported on S^2 only, sampled on a ``SphereGrid``; their degree components
come from the addition theorem evaluated against the grid quadrature.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import SphereGrid, cap_mask, integrate_adaptive, orthonormal_complement
from .special_fn import (
    UltrasphericalIndex,
    gegenbauer_at_one,
    lambda_of,
    legendre_table,
    sphere_volume,
)

__all__ = [
    "CapGeometry",
    "ZonalCapFunction",
    "GriddedCapFunction",
    "HarmonicExpansion",
    "SpectralFunction",
    "TruncationWarning",
    "projection_constant",
    "degree_norm_sq",
    "project_degree",
    "expand",
    "synthesize",
    "laplace_beltrami",
    "laplacian_eigenvalues",
    "zonal_laplacian",
    "load_zonal_csv",
    "load_gridded_csv",
    "DECAY_THRESHOLD",
]

DECAY_THRESHOLD = 1e-10
DEFAULT_J_MAX = 128


class TruncationWarning(RuntimeWarning):
    """Expansion coefficients have not decayed by the truncation degree."""


@dataclass(frozen=True)
class CapGeometry:
    n: int
    x0: tuple
    gamma: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("dimension n must be >= 3")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.n,):
            raise ValueError(f"x0 must have length n = {self.n}")
        if abs(np.linalg.norm(x0) - 1.0) > 1e-12:
            raise ValueError("x0 must be a unit vector")
        if not 0 < self.gamma <= math.pi / 2 + 1e-15:
            raise ValueError(f"gamma must lie in (0, pi/2], got {self.gamma}")
        object.__setattr__(self, "x0", tuple(float(v) for v in x0))

    @classmethod
    def north(cls, n: int = 3, gamma: float = math.pi / 2) -> "CapGeometry":
        x0 = [0.0] * n
        x0[-1] = 1.0
        return cls(n, tuple(x0), gamma)

    @property
    def lam(self) -> float:
        return lambda_of(self.n)

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.x0)

    def polar_angle(self, points) -> np.ndarray:
        """Geodesic angle between each point and the cap center."""
        return np.arccos(np.clip(np.asarray(points) @ self.center, -1.0, 1.0))

    def contains(self, points) -> np.ndarray:
        return cap_mask(points, self.center, self.gamma)

    def meridian(self, theta) -> np.ndarray:
        """Points at polar angle ``theta`` along a fixed meridian through x0."""
        th = np.asarray(theta, dtype=float)
        u = np.zeros(self.n)
        # any unit vector orthogonal to x0
        basis = np.eye(self.n)
        for e in basis:
            cand = e - (e @ self.center) * self.center
            if np.linalg.norm(cand) > 0.5:
                u = cand / np.linalg.norm(cand)
                break
        return np.cos(th)[..., None] * self.center + np.sin(th)[..., None] * u

    @property
    def area(self) -> float:
        """Surface measure of the cap."""
        lam = self.lam
        return sphere_volume(self.n - 1) * integrate_adaptive(
            lambda t: np.sin(t) ** (2 * lam), 0.0, self.gamma, tol=1e-14)


@dataclass(frozen=True)
class ZonalCapFunction:
    """f(x) = g(angle(x, x0)) on the cap, extended by zero to the sphere.

    ``full_sphere=True`` disables the zero extension; it exists only so the
    projection constants can be checked against genuine spherical harmonics.
    """

    geometry: CapGeometry
    profile: Callable
    full_sphere: bool = False

    @property
    def support(self) -> float:
        return math.pi if self.full_sphere else self.geometry.gamma

    def value(self, theta):
        th = np.asarray(theta, dtype=float)
        inside = th <= self.support + 1e-14 if not self.full_sphere else np.ones(th.shape, bool)
        safe = np.where(inside, th, 0.0)
        out = np.where(inside, np.asarray(self.profile(safe), dtype=float) * np.ones(th.shape), 0.0)
        return out if out.ndim else float(out)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        th = self.geometry.polar_angle(pts)
        vals = np.asarray(self.profile(th), dtype=float) * np.ones(th.shape)
        if self.full_sphere:
            return vals
        return np.where(self.geometry.contains(pts), vals, 0.0)


@dataclass(frozen=True)
class GriddedCapFunction:
    """Samples of a function on S^2 at the nodes of a grid, zero off the cap."""

    geometry: CapGeometry
    grid: SphereGrid
    values: np.ndarray
    func: Callable | None = None

    def __post_init__(self):
        if self.geometry.n != 3:
            raise ValueError("gridded functions are supported for n = 3 only")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.points.shape[0],):
            raise ValueError("values must have one entry per grid point")
        vals = np.where(self.geometry.contains(self.grid.points), vals, 0.0)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, geometry: CapGeometry, func: Callable, grid: SphereGrid):
        return cls(geometry, grid, np.asarray(func(grid.points), dtype=float), func)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        if self.func is not None:
            return np.where(self.geometry.contains(pts), self.func(pts), 0.0)
        if pts.shape == self.grid.points.shape and np.array_equal(pts, self.grid.points):
            return self.values
        raise ValueError("sampled function can only be evaluated at its grid nodes")


def projection_constant(n: int, j: int) -> float:
    """Reproducing constant (j + lam) / (lam * |S^{n-1}|) of the degree-j projection."""
    lam = lambda_of(n)
    return (j + lam) / (lam * sphere_volume(n))


def degree_norm_sq(n: int, j_max: int) -> np.ndarray:
    """||P_j^n(x . x0)||_2^2 over the sphere for j = 0..j_max."""
    if n == 3:
        return 4.0 * math.pi / (2.0 * np.arange(j_max + 1) + 1.0)
    lam = lambda_of(n)
    out = np.empty(j_max + 1)
    for j in range(j_max + 1):
        out[j] = 1.0 / (projection_constant(n, j) * gegenbauer_at_one(UltrasphericalIndex(lam, j)))
    return out


def laplacian_eigenvalues(n: int, j_max: int) -> np.ndarray:
    lam = lambda_of(n)
    j = np.arange(j_max + 1, dtype=float)
    return -j * (j + 2.0 * lam)


def _zonal_coefficients(f: ZonalCapFunction, j_max: int, tol: float) -> np.ndarray:
    n = f.geometry.n
    lam = f.geometry.lam
    h = degree_norm_sq(n, j_max)
    omega = sphere_volume(n - 1)

    def integrand(th):
        return legendre_table(n, j_max, np.cos(th)) * (f.profile(th) * np.sin(th) ** (2 * lam))

    panels = max(32, j_max // 4)
    moments = integrate_adaptive(integrand, 0.0, f.support, tol=tol, min_panels=panels)
    return omega * np.atleast_1d(moments) / h


@dataclass
class HarmonicExpansion:
    """Degree components of f* up to ``j_max``.

    Zonal expansions store coefficients a_j with f* ~ sum a_j P_j^n(x . x0).
    Gridded expansions store the quadrature-weighted samples; their degree
    components are evaluated lazily through the addition theorem. ``scale``
    holds per-degree factors applied on synthesis (e.g. Laplace-Beltrami
    eigenvalues).
    """

    geometry: CapGeometry
    j_max: int
    coefficients: np.ndarray | None = None
    grid: SphereGrid | None = None
    weighted_samples: np.ndarray | None = None
    scale: np.ndarray | None = None
    insufficient: bool = False
    full_sphere: bool = False
    _sphere_norm_sq: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.scale is None:
            self.scale = np.ones(self.j_max + 1)
        if self.coefficients is None and self.weighted_samples is None:
            raise ValueError("expansion needs zonal coefficients or grid samples")

    @property
    def is_zonal(self) -> bool:
        return self.coefficients is not None

    @property
    def lam(self) -> float:
        return self.geometry.lam

    @classmethod
    def from_coefficients(cls, geometry: CapGeometry, coefficients) -> "HarmonicExpansion":
        """Zonal sphere function sum a_j P_j^n(x . x0), taken as given (no zero extension)."""
        a = np.asarray(coefficients, dtype=float)
        return cls(geometry, a.size - 1, coefficients=a, full_sphere=True)

    @classmethod
    def pure_degree(cls, geometry: CapGeometry, j: int, amplitude: float = 1.0,
                    j_max: int | None = None) -> "HarmonicExpansion":
        a = np.zeros((j if j_max is None else j_max) + 1)
        a[j] = amplitude
        return cls.from_coefficients(geometry, a)

    def effective_coefficients(self, multipliers=None) -> np.ndarray:
        if not self.is_zonal:
            raise TypeError("effective coefficients exist for zonal expansions only")
        mu = _multipliers(multipliers, self.j_max)
        return self.coefficients * self.scale * mu

    def sphere_norm_sq(self, multipliers=None) -> float:
        """Parseval: ||sum mu_j Y_j||_2^2 over the whole sphere."""
        if self.is_zonal:
            c = self.effective_coefficients(multipliers)
            return float(np.sum(c**2 * degree_norm_sq(self.geometry.n, self.j_max)))
        mu = _multipliers(multipliers, self.j_max) * self.scale
        # <Y_i, Y_j> = delta_ij c_j sum_ab w_a f_a w_b f_b P_j(y_a . y_b)
        y = self.grid.points
        wf = self.weighted_samples
        total = 0.0
        gram = np.clip(y @ y.T, -1.0, 1.0)
        tab = legendre_table(3, self.j_max, gram)
        for j in range(self.j_max + 1):
            total += mu[j] ** 2 * projection_constant(3, j) * (wf @ tab[j] @ wf)
        return float(total)

    def component(self, j: int) -> "SpectralFunction":
        mu = np.zeros(self.j_max + 1)
        mu[j] = 1.0
        return SpectralFunction(self, mu)


def _multipliers(multipliers, j_max):
    if multipliers is None:
        return np.ones(j_max + 1)
    mu = np.asarray(multipliers, dtype=float)
    if mu.shape[0] < j_max + 1:
        raise ValueError(f"need at least {j_max + 1} multipliers, got {mu.shape[0]}")
    return mu[: j_max + 1]


def _decayed(a: np.ndarray) -> bool:
    peak = np.max(np.abs(a))
    if peak == 0:
        return True
    tail = np.abs(a[-4:]) if a.size > 4 else np.abs(a[-1:])
    return bool(np.max(tail) <= DECAY_THRESHOLD * peak)


def expand(f, j_max: int = DEFAULT_J_MAX, tol: float = 1e-12, warn: bool = True) -> HarmonicExpansion:
    """All degree components of f* up to j_max.

    Zonal inputs whose coefficients have not decayed below 1e-10 of their
    peak by j_max are flagged ``insufficient`` (and a TruncationWarning is
    issued when ``warn``).
    """
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if isinstance(f, HarmonicExpansion):
        return f
    if isinstance(f, ZonalCapFunction):
        a = _zonal_coefficients(f, j_max, tol)
        exp = HarmonicExpansion(f.geometry, j_max, coefficients=a, full_sphere=f.full_sphere)
        exp.insufficient = not _decayed(a)
        if exp.insufficient and warn:
            warnings.warn(f"zonal coefficients not decayed by j_max = {j_max}",
                          TruncationWarning, stacklevel=2)
        return exp
    if isinstance(f, GriddedCapFunction):
        return HarmonicExpansion(f.geometry, j_max, grid=f.grid,
                                 weighted_samples=f.grid.weights * f.values)
    raise TypeError(f"cannot expand object of type {type(f).__name__}")


def project_degree(f, j: int, tol: float = 1e-12) -> "SpectralFunction":
    """Degree-j component Y_j(f) of the zero extension f*."""
    if j < 0:
        raise ValueError("degree must be non-negative")
    if isinstance(f, ZonalCapFunction):
        n, lam = f.geometry.n, f.geometry.lam
        omega = sphere_volume(n - 1)

        def integrand(th):
            return legendre_table(n, j, np.cos(th))[j] * f.profile(th) * np.sin(th) ** (2 * lam)

        moment = integrate_adaptive(integrand, 0.0, f.support, tol=tol, min_panels=max(32, j // 4))
        a = np.zeros(j + 1)
        a[j] = omega * moment / degree_norm_sq(n, j)[j]
        exp = HarmonicExpansion(f.geometry, j, coefficients=a, full_sphere=f.full_sphere)
        return exp.component(j)
    exp = expand(f, j) if not isinstance(f, HarmonicExpansion) else f
    return exp.component(j)


@dataclass
class SpectralFunction:
    """x -> sum_j mu_j (degree-j component of an expansion)(x), on the whole sphere.

    The result is a sphere function; it generally does not vanish off the cap.
    """

    expansion: HarmonicExpansion
    multipliers: np.ndarray

    def __post_init__(self):
        self.multipliers = _multipliers(self.multipliers, self.expansion.j_max)

    @property
    def geometry(self) -> CapGeometry:
        return self.expansion.geometry

    @property
    def is_zonal(self) -> bool:
        return self.expansion.is_zonal

    @property
    def insufficient(self) -> bool:
        return self.expansion.insufficient

    @property
    def coefficients(self) -> np.ndarray:
        return self.expansion.effective_coefficients(self.multipliers)

    def profile(self, theta):
        """Zonal profile sum_j c_j P_j^n(cos theta)."""
        th = np.asarray(theta, dtype=float)
        tab = legendre_table(self.geometry.n, self.expansion.j_max, np.cos(th))
        out = np.tensordot(self.coefficients, tab, axes=(0, 0))
        return out if out.ndim else float(out)

    def __call__(self, points, chunk: int = 256):
        pts = np.asarray(points, dtype=float)
        if self.is_zonal:
            return self.profile(self.geometry.polar_angle(pts))
        exp = self.expansion
        mu = self.multipliers * exp.scale
        coef = np.array([mu[j] * projection_constant(3, j) for j in range(exp.j_max + 1)])
        flat = pts.reshape(-1, 3)
        out = np.empty(flat.shape[0])
        y = exp.grid.points
        for start in range(0, flat.shape[0], chunk):
            t = np.clip(flat[start:start + chunk] @ y.T, -1.0, 1.0)
            tab = legendre_table(3, exp.j_max, t)
            kern = np.tensordot(coef, tab, axes=(0, 0))
            out[start:start + chunk] = kern @ exp.weighted_samples
        return out.reshape(pts.shape[:-1])

    def sphere_norm_sq(self) -> float:
        return self.expansion.sphere_norm_sq(self.multipliers)

    def then(self, multipliers) -> "SpectralFunction":
        """Apply a further multiplier sequence."""
        return SpectralFunction(self.expansion, self.multipliers * _multipliers(multipliers, self.expansion.j_max))


def synthesize(e: HarmonicExpansion, multipliers=None) -> SpectralFunction:
    return SpectralFunction(e, _multipliers(multipliers, e.j_max))


def laplace_beltrami(e: HarmonicExpansion) -> HarmonicExpansion:
    """Scale each degree-j component by -j (j + 2 lam)."""
    eig = laplacian_eigenvalues(e.geometry.n, e.j_max)
    return HarmonicExpansion(e.geometry, e.j_max, coefficients=e.coefficients, grid=e.grid,
                             weighted_samples=e.weighted_samples, scale=e.scale * eig,
                             insufficient=e.insufficient, full_sphere=e.full_sphere)


def zonal_laplacian(g, dg, d2g, n: int):
    """Closed-form Laplace-Beltrami of a zonal profile: g'' + (n - 2) cot(theta) g'."""
    def lap(theta):
        th = np.asarray(theta, dtype=float)
        return d2g(th) + (n - 2) * np.cos(th) / np.sin(th) * dg(th)
    return lap


def load_zonal_csv(path, geometry: CapGeometry) -> ZonalCapFunction:
    """Zonal profile from a CSV with columns theta, value (radians)."""
    from scipy.interpolate import CubicSpline

    theta, value = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            theta.append(float(row["theta"]))
            value.append(float(row["value"]))
    theta = np.asarray(theta)
    value = np.asarray(value)
    idx = np.argsort(theta)
    theta, value = theta[idx], value[idx]
    if theta.size < 2:
        raise ValueError("need at least two profile samples")
    if theta.size >= 4:
        spline = CubicSpline(theta, value)
        profile = lambda t: spline(np.clip(t, theta[0], theta[-1]))  # noqa: E731
    else:
        profile = lambda t: np.interp(t, theta, value)  # noqa: E731
    return ZonalCapFunction(geometry, profile)


def load_gridded_csv(path, geometry: CapGeometry) -> GriddedCapFunction:
    """Gridded S^2 function from a CSV with columns theta, phi, value.

    The samples must sit on a ``SphereGrid`` about the z-axis (Gauss-Legendre
    in cos theta, uniform in phi).
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((float(row["theta"]), float(row["phi"]), float(row["value"])))
    data = np.asarray(rows)
    n_theta = np.unique(np.round(data[:, 0], 12)).size
    n_phi = np.unique(np.round(data[:, 1], 12)).size
    grid = SphereGrid(n_theta, n_phi)
    lookup = {(round(t, 9), round(p, 9)): v for t, p, v in data}
    try:
        vals = [lookup[(round(t, 9), round(p, 9))] for t, p in zip(grid.theta, grid.phi)]
    except KeyError as exc:
        raise ValueError("CSV samples do not match a Gauss-Legendre x uniform grid") from exc
    return GriddedCapFunction(geometry, grid, np.asarray(vals))


def circle_points(x, theta, n_phi: int = 512):
    """Uniform samples of {y : x . y = cos theta} on S^2, shape (..., n_phi, 3)."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, 3)
    u = np.empty_like(flat)
    v = np.empty_like(flat)
    for i, xi in enumerate(flat):
        u[i], v[i] = orthonormal_complement(xi)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    th = np.asarray(theta, dtype=float)
    c, s = np.cos(th)[..., None, None, None], np.sin(th)[..., None, None, None]
    ring = np.cos(phi)[:, None] * u[:, None, :] + np.sin(phi)[:, None] * v[:, None, :]
    pts = c * flat[:, None, :] + s * ring
    return pts.reshape(th.shape + x.shape[:-1] + (n_phi, 3))
