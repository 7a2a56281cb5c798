"""Convergence-order fits and the numerical probes for the approximation theorems.

Bounded ratios are operationalized as a fitted log-log slope near zero
together with a bounded max/min spread over the k range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .harmonic import HarmonicExpansion, SpectralFunction, expand, laplacian_eigenvalues
from .metrics import ModulusRequest, cap_norm, modulus_smoothness, zonal_cap_norms
from .operators import cached_multiplier_table
from .quadrature import check_p

__all__ = [
    "DegenerateSeriesError",
    "ConvergenceReport",
    "ProbeResult",
    "fit_order",
    "approximation_errors",
    "moduli_at",
    "bernstein_series",
    "eigen_ratio_table",
    "converse_threshold",
    "probe_direct",
    "probe_converse",
    "probe_saturation",
    "probe_equivalence",
    "DEFAULT_KS",
]

DEFAULT_KS = (16, 32, 64, 128, 256)
BOUNDED_SLOPE_TOL = 0.3
BOUNDED_SPREAD = 10.0
SATURATION_TOL = 0.15
SATURATION_R2 = 0.995
EQUIVALENCE_TOL = 0.25


class DegenerateSeriesError(ValueError):
    """Series cannot be fitted on a log-log scale."""


@dataclass(frozen=True)
class ConvergenceReport:
    series: tuple
    slope: float
    intercept: float
    r_squared: float

    @property
    def ks(self):
        return [k for k, _ in self.series]

    @property
    def values(self):
        return [v for _, v in self.series]


def fit_order(series) -> ConvergenceReport:
    """Ordinary least squares of log(value) on log(k)."""
    series = tuple((float(k), float(v)) for k, v in series)
    if len(series) < 3:
        raise DegenerateSeriesError("need at least 3 points")
    k = np.array([p[0] for p in series])
    v = np.array([p[1] for p in series])
    if np.any(v <= 0) or np.any(k <= 0):
        raise DegenerateSeriesError("values and abscissae must be positive")
    if np.all(k == k[0]):
        raise DegenerateSeriesError("all abscissae are equal")
    x, y = np.log(k), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    # a constant series leaves only rounding noise in ss_tot
    flat = ss_tot <= y.size * (64 * np.finfo(float).eps * max(1.0, np.max(np.abs(y)))) ** 2
    r2 = 1.0 if flat else max(0.0, 1.0 - np.sum(resid**2) / ss_tot)
    return ConvergenceReport(series, float(slope), float(intercept), float(r2))


@dataclass
class ProbeResult:
    name: str
    rows: list
    slopes: dict
    passed: bool
    tolerance: float
    notes: str = ""
    parameters: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    skipped: bool = False
    r_squared: float | None = None

    @property
    def slope(self) -> float | None:
        return next(iter(self.slopes.values()), None)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "slope": self.slope,
            "r_squared": self.r_squared,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "parameters": self.parameters,
            "slopes": self.slopes,
            "skipped": self.skipped,
            "notes": self.notes,
            "diagnostics": self.diagnostics,
        }


def _as_expansion(f, j_max):
    return f if isinstance(f, HarmonicExpansion) else expand(f, j_max, warn=False)


def approximation_errors(f, ks, s: int = 3, m: int = 1, p=2, j_max: int = 768,
                         tol: float = 1e-10) -> np.ndarray:
    """||J_{k,s}^m f - f||_{D,p} for each k, computed on the spectral route."""
    e = _as_expansion(f, j_max)
    geom = e.geometry
    mus = np.column_stack([
        cached_multiplier_table(k, s, geom.gamma, geom.n, m, e.j_max, tol).values - 1.0 for k in ks])
    if e.is_zonal:
        return np.atleast_1d(zonal_cap_norms(e, mus, p))
    return np.array([cap_norm(SpectralFunction(e, mus[:, i]), geom, p) for i in range(mus.shape[1])])


def moduli_at(f, deltas, p=2, j_max: int = 768, theta_grid_size: int = 64) -> np.ndarray:
    e = _as_expansion(f, j_max)
    return np.array([modulus_smoothness(ModulusRequest(e, d, p, theta_grid_size)) for d in deltas])


def _bounded(ratios, ks):
    rep = fit_order(list(zip(ks, ratios)))
    spread = float(np.max(ratios) / np.min(ratios))
    ok = abs(rep.slope) <= BOUNDED_SLOPE_TOL and spread <= BOUNDED_SPREAD
    return rep, spread, ok


def _degenerate(e: HarmonicExpansion) -> bool:
    if e.is_zonal:
        return not np.any(np.abs(e.coefficients[1:] * e.scale[1:]) > 0)
    return False


def _params(**kw):
    return {k: (list(v) if isinstance(v, (tuple, list, np.ndarray)) else v) for k, v in kw.items()}


def probe_direct(f, ks=DEFAULT_KS, s: int = 3, m: int = 1, p=2, j_max: int = 768,
                 name: str = "probe-direct") -> ProbeResult:
    """r_k = ||J_k f - f|| / omega^2(f, 1/k) should stay bounded."""
    p = check_p(p)
    ks = list(ks)
    params = _params(ks=ks, s=s, m=m, p=str(p), j_max=j_max)
    e = _as_expansion(f, j_max)
    errs = approximation_errors(e, ks, s, m, p, j_max)
    mods = moduli_at(e, [1.0 / k for k in ks], p, j_max)
    if np.any(mods <= 0) or np.any(errs <= 0):
        return ProbeResult(name, [], {}, False, BOUNDED_SLOPE_TOL,
                           "zero modulus or error: probe skipped", params, skipped=True)
    ratios = errs / mods
    rep, spread, ok = _bounded(ratios, ks)
    rows = [{"k": k, "error": er, "modulus": md, "ratio": r}
            for k, er, md, r in zip(ks, errs, mods, ratios)]
    return ProbeResult(name, rows, {"ratio": rep.slope}, ok, BOUNDED_SLOPE_TOL,
                       f"max/min ratio = {spread:.4g} (limit {BOUNDED_SPREAD:g})", params,
                       {"spread": spread, "insufficient_j_max": e.insufficient}, r_squared=rep.r_squared)


def converse_threshold(n: int) -> float:
    """m must exceed 2([n/2] + 3) / (n - 2) for the Bernstein-type bound."""
    return 2.0 * (n // 2 + 3) / (n - 2)


def _dyadic_upto(k):
    v, out = 1, []
    while v <= k:
        out.append(v)
        v *= 2
    return out


def probe_converse(f, ks=DEFAULT_KS, s: int = 3, m: int = 9, p=2, v_max_factor: int = 4,
                   j_max: int = 768, name: str = "probe-converse") -> ProbeResult:
    """c_k = omega^2(f, 1/k) / max_{k <= v <= V k} ||J_v f - f|| should stay bounded.

    The max over v >= k is truncated to a dyadic grid up to ``v_max_factor * k``.
    Marchaud-type and weighted-max ratios are reported as diagnostics.
    """
    p = check_p(p)
    ks = list(ks)
    e = _as_expansion(f, j_max)
    n = e.geometry.n
    if not m > converse_threshold(n):
        raise ValueError(f"m = {m} violates m > {converse_threshold(n):g} required for n = {n}")
    params = _params(ks=ks, s=s, m=m, p=str(p), j_max=j_max, v_max_factor=v_max_factor)
    vs = sorted(set(v for k in ks for v in _dyadic_upto(v_max_factor * k)))
    errs = dict(zip(vs, approximation_errors(e, vs, s, m, p, j_max)))
    mods = moduli_at(e, [1.0 / k for k in ks], p, j_max)
    if np.any(mods <= 0):
        return ProbeResult(name, [], {}, False, BOUNDED_SLOPE_TOL,
                           "zero modulus: probe skipped", params, skipped=True)
    denom = np.array([max(errs[v] for v in vs if k <= v <= v_max_factor * k) for k in ks])
    ratios = mods / denom
    rep, spread, ok = _bounded(ratios, ks)

    def block(v):
        return 1.0 if v == 1 else v / 2.0

    diag_cols = {
        "marchaud_sum": lambda k: k**-2.0 * sum(v * errs[v] * block(v) for v in _dyadic_upto(k)),
        "sqrt_weighted_sum": lambda k: k**-1.5 * sum(v**0.5 * errs[v] * block(v) for v in _dyadic_upto(k)),
        "max_weighted_v2": lambda k: k**-2.0 * max(v**2 * errs[v] for v in _dyadic_upto(k)),
        "max_weighted_v9_4": lambda k: k**-2.25 * max(v**2.25 * errs[v] for v in _dyadic_upto(k)),
    }
    rows, diag = [], {}
    table = {key: np.array([mods[i] / fn(k) for i, k in enumerate(ks)]) for key, fn in diag_cols.items()}
    for key, vals in table.items():
        drep = fit_order(list(zip(ks, vals)))
        diag[key] = {"slope": drep.slope, "spread": float(vals.max() / vals.min())}
    for i, k in enumerate(ks):
        row = {"k": k, "error": denom[i], "modulus": mods[i], "ratio": ratios[i]}
        row.update({key: table[key][i] for key in table})
        rows.append(row)
    diag["spread"] = spread
    diag["insufficient_j_max"] = e.insufficient
    return ProbeResult(name, rows, {"ratio": rep.slope}, ok, BOUNDED_SLOPE_TOL,
                       f"max over v truncated to v <= {v_max_factor}k on a dyadic grid; "
                       f"max/min ratio = {spread:.4g}", params, diag, r_squared=rep.r_squared)


def eigen_ratio_table(k: int, s: int = 3, m: int = 1, n: int = 3, gamma: float = math.pi / 2,
                      j_top: int = 6, tol: float = 1e-10):
    """Rows (j, (1 - xi(j)) / (1 - xi(1)), j(j+2 lam)/(2 lam+1), j(j+2 lam)/(2 lam))."""
    lam = (n - 2) / 2.0
    tab = cached_multiplier_table(k, s, gamma, n, m, max(j_top, 1), tol)
    ratios = tab.eigen_ratios(j_top)
    return [(j, float(ratios[j]), j * (j + 2 * lam) / (2 * lam + 1), j * (j + 2 * lam) / (2 * lam))
            for j in range(1, j_top + 1)]


def probe_saturation(f, ks=DEFAULT_KS, s: int = 3, m: int = 1, p=2, j_max: int = 768,
                     name: str = "probe-saturation") -> ProbeResult:
    """Slope of ||J_k f - f|| against k should be -2."""
    p = check_p(p)
    ks = list(ks)
    e = _as_expansion(f, j_max)
    if _degenerate(e):
        raise ValueError("saturation probe needs a component of degree >= 1")
    params = _params(ks=ks, s=s, m=m, p=str(p), j_max=j_max)
    errs = approximation_errors(e, ks, s, m, p, j_max)
    rep = fit_order(list(zip(ks, errs)))
    ok = abs(rep.slope + 2.0) <= SATURATION_TOL and rep.r_squared >= SATURATION_R2
    n = e.geometry.n
    limits = eigen_ratio_table(max(ks), s, m, n, e.geometry.gamma)
    err_25 = max(abs(r - a) / a for _, r, a, _ in limits[1:])
    err_th = max(abs(r - b) / b for _, r, _, b in limits[1:])
    supported = "j(j+2lam)/(2lam+1)" if err_25 <= err_th else "j(j+2lam)/(2lam)"
    rows = [{"k": k, "error": er, "ratio": er * k**2} for k, er in zip(ks, errs)]
    diag = {
        "multiplier_limits": [{"j": j, "ratio": r, "limit_2lam_plus_1": a, "limit_2lam": b}
                              for j, r, a, b in limits],
        "max_rel_dev_2lam_plus_1": err_25,
        "max_rel_dev_2lam": err_th,
        "data_supports": supported,
        "insufficient_j_max": e.insufficient,
    }
    return ProbeResult(name, rows, {"error": rep.slope}, ok, SATURATION_TOL,
                       f"multiplier-limit table at k = {max(ks)} supports {supported}",
                       params, diag, r_squared=rep.r_squared)


def probe_equivalence(f, ks=DEFAULT_KS, s: int = 3, m: int = 1, p=2, j_max: int = 768,
                      name: str = "probe-equivalence") -> ProbeResult:
    """Orders from ||J_k f - f|| ~ k^-a1 and omega^2(f, delta) ~ delta^a2 should coincide."""
    p = check_p(p)
    ks = list(ks)
    e = _as_expansion(f, j_max)
    params = _params(ks=ks, s=s, m=m, p=str(p), j_max=j_max)
    errs = approximation_errors(e, ks, s, m, p, j_max)
    deltas = [1.0 / k for k in ks]
    mods = moduli_at(e, deltas, p, j_max)
    if np.any(mods <= 0) or np.any(errs <= 0):
        return ProbeResult(name, [], {}, False, EQUIVALENCE_TOL,
                           "zero modulus or error: probe skipped", params, skipped=True)
    a1 = -fit_order(list(zip(ks, errs))).slope
    rep2 = fit_order(list(zip(deltas, mods)))
    a2 = rep2.slope
    ok = abs(a1 - a2) <= EQUIVALENCE_TOL
    rows = [{"k": k, "error": er, "modulus": md, "ratio": er / md} for k, er, md in zip(ks, errs, mods)]
    return ProbeResult(name, rows, {"alpha_error": a1, "alpha_modulus": a2}, ok, EQUIVALENCE_TOL,
                       f"|alpha1 - alpha2| = {abs(a1 - a2):.4g}", params,
                       {"insufficient_j_max": e.insufficient}, r_squared=rep2.r_squared)


def bernstein_series(ks=DEFAULT_KS, s: int = 3, m: int = 9, n: int = 3, gamma: float = math.pi / 2,
                     j_max: int = 128, tol: float = 1e-10):
    """B(k) = max_{1 <= j <= j_max} j (j + 2 lam) |xi_k^m(j)| and its fitted order."""
    eig = -laplacian_eigenvalues(n, j_max)
    vals = []
    for k in ks:
        xi = cached_multiplier_table(k, s, gamma, n, m, j_max, tol).values
        vals.append(float(np.max(eig[1:] * np.abs(xi[1:]))))
    return vals, fit_order(list(zip(ks, vals)))
