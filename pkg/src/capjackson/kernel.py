"""Modified Jackson kernel on [0, gamma], its normalization and moments."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quadrature import integrate_adaptive

__all__ = [
    "KernelSpec",
    "kernel_raw",
    "kernel_normalize",
    "kernel_moment",
    "kernel_tail_mass",
    "classical_kernel",
    "kernel_panels",
]


def kernel_raw(theta, k: int, s: int):
    """sin^{2s}(k theta / 2) / sin^{2s-1}(theta / 2), extended by 0 at theta = 0."""
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > math.pi):
        raise ValueError("theta must lie in [0, pi]")
    num = np.sin(0.5 * k * th)
    half = np.sin(0.5 * th)
    # the ratio num / half is bounded by k, so no underflow near 0
    ratio = np.where(half > 0, num / np.where(half > 0, half, 1.0), float(k))
    out = np.where(th > 0, num * ratio ** (2 * s - 1), 0.0)
    return out if out.ndim else float(out)


def classical_kernel(theta, k: int, s: int):
    """(sin(k theta / 2) / sin(theta / 2))^{2s} on (0, pi]."""
    th = np.asarray(theta, dtype=float)
    if np.any(th <= 0) or np.any(th > math.pi):
        raise ValueError("theta must lie in (0, pi]")
    out = (np.sin(0.5 * k * th) / np.sin(0.5 * th)) ** (2 * s)
    return out if out.ndim else float(out)


def kernel_panels(k: int) -> int:
    # sin^{2s}(k theta / 2) has period 2 pi / k; keep several panels per period
    return max(32, 4 * k)


@dataclass(frozen=True)
class KernelSpec:
    k: int
    s: int
    gamma: float
    lam: float
    A: float

    def __post_init__(self):
        if self.k < 1 or self.s < 1:
            raise ValueError("k and s must be positive integers")
        if not 0 < self.gamma <= math.pi / 2 + 1e-15:
            raise ValueError(f"gamma must lie in (0, pi/2], got {self.gamma}")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.A > 0:
            raise ValueError("normalization constant must be positive")

    @property
    def scale(self) -> float:
        """Growth k^{2s - 2 - 2 lam} of A; used to keep integrands O(1)."""
        return float(self.k) ** (2 * self.s - 2 - 2 * self.lam)

    def eval(self, theta):
        return kernel_raw(theta, self.k, self.s) / self.A

    def weight(self, theta):
        """Normalized kernel times sin^{2 lam} theta (the measure of the operator)."""
        th = np.asarray(theta, dtype=float)
        return kernel_raw(th, self.k, self.s) * np.sin(th) ** (2 * self.lam) / self.A

    @property
    def min_panels(self) -> int:
        return kernel_panels(self.k)


def kernel_normalize(k: int, s: int, gamma: float, lam: float, tol: float = 1e-10) -> KernelSpec:
    """Compute A = int_0^gamma kernel_raw sin^{2 lam} and return the populated KernelSpec."""
    if not 0 < gamma <= math.pi / 2 + 1e-15:
        raise ValueError(f"gamma must lie in (0, pi/2], got {gamma}")
    if k < 1 or s < 1:
        raise ValueError("k and s must be positive integers")
    scale = float(k) ** (2 * s - 2 - 2 * lam)

    def integrand(th):
        return kernel_raw(th, k, s) * np.sin(th) ** (2 * lam) / scale

    A = scale * integrate_adaptive(integrand, 0.0, gamma, tol=tol, min_panels=kernel_panels(k))
    return KernelSpec(k, s, float(gamma), float(lam), A)


def kernel_moment(spec: KernelSpec, beta: float, tol: float = 1e-10) -> float:
    """int_0^gamma theta^beta D(theta) sin^{2 lam} theta d theta.

    The moment behaves like k^{-beta} when 2s > beta + 2 lam + 1; outside that
    range a warning is issued and the value is still returned.
    """
    if beta < -2:
        raise ValueError("beta must be >= -2")
    if not 2 * spec.s > beta + 2 * spec.lam + 1:
        warnings.warn(
            f"2s > beta + 2 lam + 1 violated (s={spec.s}, beta={beta}, lam={spec.lam})",
            RuntimeWarning, stacklevel=2)
    scale = float(spec.k) ** beta

    def integrand(th):
        return scale * th**beta * spec.weight(th)

    return integrate_adaptive(integrand, 0.0, spec.gamma, tol=tol,
                              min_panels=spec.min_panels) / scale


def kernel_tail_mass(spec: KernelSpec, delta: float, tol: float = 1e-14) -> float:
    """Kernel mass on [delta, gamma]; decays like k^{-3} for fixed delta."""
    if not 0 < delta < spec.gamma:
        raise ValueError("delta must lie in (0, gamma)")
    return integrate_adaptive(spec.weight, delta, spec.gamma, tol=tol,
                              min_panels=spec.min_panels, rtol=1e-12)
