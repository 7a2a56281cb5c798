"""Gauss-Legendre rules, panel-adaptive integration on intervals, and S^2 product grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "ConvergenceError",
    "QuadratureRule",
    "SphereGrid",
    "gauss_legendre_rule",
    "composite_rule",
    "integrate_adaptive",
    "sphere_grid",
    "cap_mask",
    "integrate_cap",
    "CAP_SLACK",
    "check_p",
    "orthonormal_complement",
]

CAP_SLACK = 1e-14
DEFAULT_ORDER = 16
MAX_DEPTH = 30
MAX_ACTIVE_PANELS = 1 << 18


class ConvergenceError(RuntimeError):
    """Adaptive refinement did not reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")

    def integrate(self, values) -> np.ndarray:
        """Contract the last axis of ``values`` against the weights."""
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=64)
def _reference_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_rule(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    if order < 1:
        raise ValueError("order must be >= 1")
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    x, w = _reference_rule(order)
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, float(a), float(b))


def composite_rule(order: int, a: float, b: float, panels: int) -> QuadratureRule:
    """Gauss-Legendre of the given order on each of ``panels`` equal subintervals."""
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    x, w = _reference_rule(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return QuadratureRule(nodes, weights, float(a), float(b))


def _panel_nodes(lo, hi, x):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid[:, None] + half[:, None] * x, half


def integrate_adaptive(f, a: float, b: float, tol: float = 1e-10, min_panels: int = 1,
                       order: int = DEFAULT_ORDER, rtol: float = 0.0):
    """Panel-wise Gauss-Legendre with bisection of unconverged panels.

    ``f`` maps a 1-D array of abscissae to an array whose LAST axis runs over
    those abscissae; leading axes are treated as independent components and
    integrated together (a panel is accepted once every component meets the
    tolerance). A panel is accepted when its one-level and two-level estimates
    differ by at most ``max(tol, rtol * |estimate|)``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if min_panels < 1:
        raise ValueError("min_panels must be >= 1")
    if a == b:
        return 0.0
    if a > b:
        return -integrate_adaptive(f, b, a, tol, min_panels, order, rtol)

    x, w = _reference_rule(order)
    edges = np.linspace(a, b, min_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    done_left: list[np.ndarray] = []
    done_val: list[np.ndarray] = []
    depth = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        c_nodes, c_half = _panel_nodes(lo, hi, x)
        l_nodes, f_half = _panel_nodes(lo, mid, x)
        r_nodes, _ = _panel_nodes(mid, hi, x)
        npan = lo.size
        nodes = np.concatenate([c_nodes.ravel(), l_nodes.ravel(), r_nodes.ravel()])
        vals = np.asarray(f(nodes), dtype=float)
        lead = vals.shape[:-1]
        vals = vals.reshape(lead + (3, npan, order))
        coarse = (vals[..., 0, :, :] @ w) * c_half
        fine = (vals[..., 1, :, :] @ w + vals[..., 2, :, :] @ w) * f_half
        err = np.abs(coarse - fine)
        allowed = np.maximum(tol, rtol * np.abs(fine))
        ok = np.all((err <= allowed).reshape(-1, npan), axis=0)
        if not np.all(np.isfinite(fine)):
            raise ConvergenceError("integrand produced non-finite values")
        if np.any(ok):
            done_left.append(lo[ok])
            done_val.append(fine[..., ok])
        if np.all(ok):
            break
        depth += 1
        if depth > MAX_DEPTH:
            raise ConvergenceError(
                f"adaptive quadrature on [{a}, {b}] exceeded depth {MAX_DEPTH} (tol={tol})")
        if 2 * np.count_nonzero(~ok) > MAX_ACTIVE_PANELS:
            raise ConvergenceError(
                f"adaptive quadrature on [{a}, {b}] needs more than {MAX_ACTIVE_PANELS} panels (tol={tol})")
        lo_bad, hi_bad, mid_bad = lo[~ok], hi[~ok], mid[~ok]
        lo = np.concatenate([lo_bad, mid_bad])
        hi = np.concatenate([mid_bad, hi_bad])
    # fixed left-to-right reduction keeps results bit-stable
    lefts = np.concatenate(done_left)
    contrib = np.concatenate(done_val, axis=-1)
    order_idx = np.argsort(lefts, kind="stable")
    total = contrib[..., order_idx].sum(axis=-1)
    return float(total) if np.ndim(total) == 0 else total


@dataclass(frozen=True)
class SphereGrid:
    """Product grid on S^2: Gauss-Legendre in cos(theta), uniform in phi.

    Polar angles are measured from ``axis``.
    """

    n_theta: int
    n_phi: int
    axis: tuple = (0.0, 0.0, 1.0)
    points: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_theta < 1:
            raise ValueError("n_theta must be >= 1")
        if self.n_phi < 2 * self.n_theta:
            raise ValueError("n_phi must be at least 2 * n_theta")
        z = np.asarray(self.axis, dtype=float)
        if z.shape != (3,) or abs(np.linalg.norm(z) - 1.0) > 1e-12:
            raise ValueError("axis must be a unit 3-vector")
        u, v = orthonormal_complement(z)
        ct, wt = _reference_rule(self.n_theta)
        ct = ct[::-1]
        wt = wt[::-1]
        th = np.arccos(ct)
        ph = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        st = np.sqrt(1.0 - ct**2)
        pts = (ct[:, None, None] * z
               + (st[:, None] * np.cos(ph))[..., None] * u
               + (st[:, None] * np.sin(ph))[..., None] * v)
        w = np.repeat(wt * (2.0 * np.pi / self.n_phi), self.n_phi)
        object.__setattr__(self, "points", pts.reshape(-1, 3))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "theta", np.repeat(th, self.n_phi))
        object.__setattr__(self, "phi", np.tile(ph, self.n_theta))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def sphere_grid(n_theta: int = 64, n_phi: int | None = None, axis=(0.0, 0.0, 1.0)) -> SphereGrid:
    return SphereGrid(n_theta, n_phi if n_phi is not None else 2 * n_theta, tuple(axis))


def orthonormal_complement(z):
    """Two unit vectors completing ``z`` to a right-handed orthonormal frame."""
    z = np.asarray(z, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = helper - (helper @ z) * z
    u /= np.linalg.norm(u)
    v = np.cross(z, u)
    return u, v


def cap_mask(points, x0, gamma: float) -> np.ndarray:
    """Closed-cap membership x . x0 >= cos(gamma), with a 1e-14 slack."""
    return np.asarray(points) @ np.asarray(x0, dtype=float) >= math.cos(gamma) - CAP_SLACK


def integrate_cap(f, geom, grid: SphereGrid, p=2) -> float:
    """Discrete L^p norm over the cap D(x0, gamma) on a sphere grid.

    ``f`` is either a callable on (N, 3) point arrays or an array of values
    at ``grid.points``. p = inf is the grid maximum over the cap.
    """
    if geom.n != 3:
        raise ValueError("grid integration is only defined on S^2 (n = 3)")
    p = check_p(p)
    vals = f(grid.points) if callable(f) else np.asarray(f, dtype=float)
    inside = cap_mask(grid.points, geom.x0, geom.gamma)
    a = np.abs(vals[inside])
    if a.size == 0:
        return 0.0
    if p == math.inf:
        return float(a.max())
    return float((grid.weights[inside] @ a**p) ** (1.0 / p))


def check_p(p):
    if p in (1, 2):
        return int(p)
    if p == math.inf or (isinstance(p, str) and p.lower() in ("inf", "infinity")):
        return math.inf
    raise ValueError(f"norm exponent must be 1, 2 or inf, got {p!r}")

