"""Cap L^p norms, the second-order modulus of smoothness, and a K-functional upper estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .harmonic import (
    CapGeometry,
    GriddedCapFunction,
    HarmonicExpansion,
    SpectralFunction,
    ZonalCapFunction,
    expand,
    laplacian_eigenvalues,
)
from .operators import cached_multiplier_table
from .quadrature import check_p, composite_rule, integrate_cap, sphere_grid
from .special_fn import legendre_table, sphere_volume

__all__ = [
    "ModulusRequest",
    "cap_norm",
    "zonal_cap_norms",
    "modulus_smoothness",
    "modulus_theta_grid",
    "k_functional_estimate",
    "k_functional_candidates",
]

CAP_PANELS = 256
CAP_ORDER = 16


@lru_cache(maxsize=32)
def _cap_rule(gamma: float, lam: float, n: int, panels: int):
    rule = composite_rule(CAP_ORDER, 0.0, gamma, panels)
    w = sphere_volume(n - 1) * rule.weights * np.sin(rule.nodes) ** (2 * lam)
    return rule.nodes, w


@lru_cache(maxsize=16)
def _cap_table(n: int, j_max: int, gamma: float, panels: int):
    nodes, _ = _cap_rule(gamma, (n - 2) / 2.0, n, panels)
    tab = legendre_table(n, j_max, np.cos(nodes))
    tab.setflags(write=False)
    return tab


def _norm_from_samples(values, weights, p):
    a = np.abs(values)
    if p == math.inf:
        return a.max(axis=0)
    return (weights @ a**p) ** (1.0 / p)


def zonal_cap_norms(expansion: HarmonicExpansion, multipliers, p=2, panels: int = CAP_PANELS,
                    gamma: float | None = None) -> np.ndarray:
    """Cap norms of sum_j mu_j Y_j(f) for each column of a (j_max + 1, K) multiplier array."""
    p = check_p(p)
    geom = expansion.geometry
    gamma = geom.gamma if gamma is None else gamma
    mu = np.asarray(multipliers, dtype=float)
    one = mu.ndim == 1
    mu = mu.reshape(mu.shape[0], -1)[: expansion.j_max + 1]
    coef = (expansion.coefficients * expansion.scale)[:, None] * mu
    _, w = _cap_rule(gamma, geom.lam, geom.n, panels)
    tab = _cap_table(geom.n, expansion.j_max, gamma, panels)
    vals = tab.T @ coef
    out = _norm_from_samples(vals, w, p)
    return float(out[0]) if one else out


def cap_norm(f, geom: CapGeometry | None = None, p=2, grid=None, panels: int = CAP_PANELS) -> float:
    """||f||_{D,p}. Zonal inputs use 1-D quadrature in the polar angle (any n);
    anything else is sampled on an S^2 grid aligned with the cap axis."""
    p = check_p(p)
    geom = f.geometry if geom is None else geom
    if isinstance(f, SpectralFunction) and f.is_zonal:
        return zonal_cap_norms(f.expansion, f.multipliers, p, panels, geom.gamma)
    if isinstance(f, HarmonicExpansion) and f.is_zonal:
        return zonal_cap_norms(f, np.ones(f.j_max + 1), p, panels, geom.gamma)
    if isinstance(f, ZonalCapFunction):
        profile = f.value
    elif getattr(f, "is_zonal", False):
        profile = f.profile
    else:
        profile = None
    if profile is not None:
        nodes, w = _cap_rule(geom.gamma, geom.lam, geom.n, panels)
        vals = np.asarray(profile(nodes), dtype=float)
        if p == math.inf:
            ends = np.asarray(profile(np.array([0.0, geom.gamma])), dtype=float)
            return float(max(np.abs(vals).max(), np.abs(ends).max()))
        return float(_norm_from_samples(vals, w, p))
    if geom.n != 3:
        raise ValueError("non-zonal functions are supported on S^2 only")
    if isinstance(f, GriddedCapFunction) and grid is None:
        return integrate_cap(f.values, geom, f.grid, p)
    if grid is None:
        grid = sphere_grid(64, axis=geom.x0)
    return integrate_cap(f, geom, grid, p)


@dataclass
class ModulusRequest:
    f: object
    delta: float
    p: object = 2
    theta_grid_size: int = 64
    j_max: int = 128

    def __post_init__(self):
        if not 0 < self.delta <= math.pi:
            raise ValueError("delta must lie in (0, pi]")
        if self.theta_grid_size < 16:
            raise ValueError("theta_grid_size must be >= 16")
        self.p = check_p(self.p)


def modulus_theta_grid(delta: float, size: int = 64) -> np.ndarray:
    """Half geometric {delta 2^-i}, half uniform in (0, delta]; sorted, deduplicated."""
    n_geo = size // 2
    n_uni = size - n_geo
    geo = delta * 2.0 ** -np.arange(n_geo)
    uni = delta * np.arange(1, n_uni + 1) / n_uni
    return np.unique(np.concatenate([geo, uni]))


def _difference_multipliers(n, thetas, j_max, m=1):
    tab = legendre_table(n, j_max, np.cos(thetas)) ** m
    return tab - 1.0


def modulus_smoothness(req: ModulusRequest) -> float:
    """Grid approximation (from below) of sup_{0 < theta <= delta} ||S_theta f - f||_{D,p}."""
    e = req.f if isinstance(req.f, HarmonicExpansion) else expand(req.f, req.j_max, warn=False)
    thetas = modulus_theta_grid(req.delta, req.theta_grid_size)
    mu = _difference_multipliers(e.geometry.n, thetas, e.j_max)
    if e.is_zonal:
        return float(np.max(zonal_cap_norms(e, mu, req.p)))
    best = 0.0
    for col in range(mu.shape[1]):
        best = max(best, cap_norm(SpectralFunction(e, mu[:, col]), e.geometry, req.p))
    return best


def k_functional_candidates(f, delta2: float, p=2, ks=None, s: int = 3, j_max: int = 128,
                            tol: float = 1e-10):
    """List of (label, ||f - g|| + delta2 ||Lap g||) over the candidate family."""
    if not delta2 > 0:
        raise ValueError("delta2 must be positive")
    p = check_p(p)
    e = f if isinstance(f, HarmonicExpansion) else expand(f, j_max, warn=False)
    geom = e.geometry
    eig = laplacian_eigenvalues(geom.n, e.j_max)
    ks = [2**i for i in range(9)] if ks is None else list(ks)
    labels, mus = [], []
    for k in ks:
        xi = cached_multiplier_table(k, s, geom.gamma, geom.n, 1, e.j_max, tol).values
        labels.append(f"jackson_k{k}")
        mus.append(xi)
    degrees = sorted({min(2**i, e.j_max) for i in range(int(math.log2(max(e.j_max, 1))) + 1)} | {e.j_max})
    for d in degrees:
        cut = (np.arange(e.j_max + 1) <= d).astype(float)
        labels.append(f"truncate_{d}")
        mus.append(cut)
    out = []
    for label, mu in zip(labels, mus):
        diff = SpectralFunction(e, 1.0 - mu)
        lap = SpectralFunction(e, eig * mu)
        out.append((label, cap_norm(diff, geom, p) + delta2 * cap_norm(lap, geom, p)))
    return out


def k_functional_estimate(f, delta2: float, p=2, ks=None, s: int = 3, j_max: int = 128) -> float:
    """Upper estimate of K(f, delta2)_{D,p}: the best value over a concrete candidate family."""
    return min(v for _, v in k_functional_candidates(f, delta2, p, ks, s, j_max))
