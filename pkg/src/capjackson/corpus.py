"""Test functions: C-infinity zonal bumps and band-limited zonal polynomials."""

from __future__ import annotations

import numpy as np

from .harmonic import CapGeometry, HarmonicExpansion, ZonalCapFunction
from .special_fn import legendre_table

__all__ = [
    "bump_profile",
    "bump_derivatives",
    "bump",
    "BAND_COEFFICIENTS",
    "band_limited_expansion",
    "band_limited_cap_function",
    "degree_component",
    "make_corpus",
]

# fixed, deterministic band-limited coefficients for degrees 0..8
BAND_COEFFICIENTS = tuple(1.0 / (1.0 + j) ** 2 * (-1.0) ** j for j in range(9))


def bump_profile(rho: float):
    """g(theta) = exp(1 - 1 / (1 - (theta / rho)^2)) for theta < rho, else 0."""
    def g(theta):
        th = np.asarray(theta, dtype=float)
        u2 = (th / rho) ** 2
        inside = u2 < 1.0
        den = np.where(inside, 1.0 - u2, 1.0)
        out = np.where(inside, np.exp(1.0 - 1.0 / den), 0.0)
        return out if out.ndim else float(out)
    return g


def bump_derivatives(rho: float):
    """First and second theta-derivatives of the bump profile (closed form)."""
    def parts(theta):
        th = np.asarray(theta, dtype=float)
        inside = np.abs(th) < rho
        u = np.where(inside, th / rho, 0.0)
        q = 1.0 - u**2
        g = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
        # d/du [-1/q] = -2u / q^2
        h1 = -2.0 * u / q**2
        h2 = -2.0 / q**2 - 8.0 * u**2 / q**3
        return inside, g, h1, h2

    def d1(theta):
        inside, g, h1, _ = parts(theta)
        return np.where(inside, g * h1 / rho, 0.0)

    def d2(theta):
        inside, g, h1, h2 = parts(theta)
        return np.where(inside, g * (h1**2 + h2) / rho**2, 0.0)

    return d1, d2


def bump(geometry: CapGeometry, rho: float) -> ZonalCapFunction:
    if not 0 < rho <= geometry.gamma:
        raise ValueError("bump radius must lie in (0, gamma]")
    return ZonalCapFunction(geometry, bump_profile(rho))


def band_limited_expansion(geometry: CapGeometry, coefficients=BAND_COEFFICIENTS) -> HarmonicExpansion:
    """sum_j a_j P_j^n(x . x0) as a sphere function (exactly band-limited)."""
    return HarmonicExpansion.from_coefficients(geometry, coefficients)


def band_limited_cap_function(geometry: CapGeometry, coefficients=BAND_COEFFICIENTS) -> ZonalCapFunction:
    """The same polynomial restricted to the cap and extended by zero."""
    a = np.asarray(coefficients, dtype=float)
    n = geometry.n

    def g(theta):
        th = np.asarray(theta, dtype=float)
        out = np.tensordot(a, legendre_table(n, a.size - 1, np.cos(th)), axes=(0, 0))
        return out if out.ndim else float(out)

    return ZonalCapFunction(geometry, g)


def degree_component(geometry: CapGeometry, j: int, amplitude: float = 1.0) -> HarmonicExpansion:
    """The single zonal harmonic amplitude * P_j^n(x . x0)."""
    return HarmonicExpansion.pure_degree(geometry, j, amplitude)


def make_corpus(geometry: CapGeometry, rhos=None, band=True, degrees=()):
    """Named corpus entries: bumps at the given radii (default gamma/2, 3 gamma/4),
    the band-limited sphere polynomial, and optional pure degree components."""
    rhos = (geometry.gamma / 2, 3 * geometry.gamma / 4) if rhos is None else rhos
    out = {}
    for r in rhos:
        out[f"bump_rho{r / geometry.gamma:.4g}g"] = bump(geometry, r)
    if band:
        out["band_limited"] = band_limited_expansion(geometry)
    for j in degrees:
        out[f"degree_{j}"] = degree_component(geometry, j)
    return out


