import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capjackson.analysis import fit_order, moduli_at
from capjackson.corpus import band_limited_expansion, bump
from capjackson.harmonic import HarmonicExpansion, ZonalCapFunction, expand
from capjackson.metrics import (
    ModulusRequest,
    cap_norm,
    k_functional_candidates,
    k_functional_estimate,
    modulus_smoothness,
    modulus_theta_grid,
)
from capjackson.quadrature import sphere_grid

G = math.pi / 2
DELTAS = [0.4, 0.2, 0.1, 0.05]


@pytest.fixture(scope="module")
def corpus(geom):
    return {
        "bump_half": expand(bump(geom, G / 2), 768),
        "bump_3q": expand(bump(geom, 3 * G / 4), 768),
        "band": band_limited_expansion(geom),
    }


def const(geom, c):
    return ZonalCapFunction(geom, lambda t: c * np.ones_like(np.asarray(t, float)))


def test_cap_norm_examples(geom):
    assert cap_norm(const(geom, 0.0)) == 0.0
    assert cap_norm(const(geom, 1.0), p=2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert cap_norm(const(geom, 1.0), p=1) == pytest.approx(2 * math.pi, rel=1e-12)
    assert cap_norm(const(geom, -2.0), p=math.inf) == 2.0
    with pytest.raises(ValueError):
        cap_norm(const(geom, 1.0), p=3)


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_cap_norm_1d_vs_2d(geom, p):
    f = bump(geom, 3 * G / 4)
    one_d = cap_norm(f, p=p)
    two_d = cap_norm(lambda x: f(x), geom, p, grid=sphere_grid(256))
    assert two_d == pytest.approx(one_d, abs=1e-7 if p != math.inf else 1e-4)


def test_cap_norm_expansion_paths(geom, corpus):
    e = corpus["bump_half"]
    assert cap_norm(e) == pytest.approx(cap_norm(bump(geom, G / 2)), rel=1e-9)


def test_request_validation(geom):
    with pytest.raises(ValueError):
        ModulusRequest(const(geom, 1.0), 0.0)
    with pytest.raises(ValueError):
        ModulusRequest(const(geom, 1.0), 0.1, theta_grid_size=8)
    with pytest.raises(ValueError):
        ModulusRequest(const(geom, 1.0), 0.1, p=4)


def test_theta_grid():
    g = modulus_theta_grid(0.4, 64)
    assert g.max() == pytest.approx(0.4) and g.min() > 0
    assert np.all(np.diff(g) > 0)


def test_modulus_zero(geom):
    assert modulus_smoothness(ModulusRequest(const(geom, 0.0), 0.3, j_max=16)) == 0.0


@given(d1=st.floats(0.001, 3.0), d2=st.floats(0.001, 3.0))
@settings(max_examples=15, deadline=None)
def test_modulus_monotone(corpus, d1, d2):
    lo, hi = sorted((d1, d2))
    e = corpus["bump_3q"]
    a = modulus_smoothness(ModulusRequest(e, lo))
    b = modulus_smoothness(ModulusRequest(e, hi))
    # nested theta grids are not guaranteed, so allow the grid resolution
    assert a <= b * (1 + 1e-2) + 1e-12


@pytest.mark.parametrize("p", [1, 2, math.inf])
def test_modulus_bounded_by_twice_norm(corpus, p):
    for e in corpus.values():
        ref = math.sqrt(e.sphere_norm_sq()) if p == 2 else None
        w = modulus_smoothness(ModulusRequest(e, math.pi, p))
        assert w >= 0
        if p == 2:
            assert w <= 2 * ref * (1 + 1e-8)


def test_modulus_grid_stability(corpus):
    for e in corpus.values():
        for d in DELTAS:
            a = modulus_smoothness(ModulusRequest(e, d, theta_grid_size=64))
            b = modulus_smoothness(ModulusRequest(e, d, theta_grid_size=128))
            assert abs(a - b) <= 0.01 * b


def test_modulus_order_example(corpus):
    # example range from the module description; pre-asymptotic for the bump
    e = corpus["bump_half"]
    rep = fit_order(list(zip(DELTAS, moduli_at(e, DELTAS))))
    assert abs(rep.slope - 2) <= 0.2


@pytest.mark.parametrize("name", ["bump_half", "bump_3q", "band"])
def test_modulus_order_small_delta(corpus, name):
    ds = [0.05, 0.025, 0.0125, 0.00625]
    rep = fit_order(list(zip(ds, moduli_at(corpus[name], ds))))
    assert abs(rep.slope - 2) <= 0.2


def test_k_functional_constant(geom):
    e = HarmonicExpansion.from_coefficients(geom, [2.0])
    assert k_functional_estimate(e, 0.1) == pytest.approx(0.0, abs=1e-15)


def test_k_functional_vanishes_for_band_limited(corpus):
    e = corpus["band"]
    vals = [k_functional_estimate(e, d2) for d2 in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-3


def test_k_functional_envelope(corpus):
    for e in corpus.values():
        for d in DELTAS:
            r = k_functional_estimate(e, d * d) / modulus_smoothness(ModulusRequest(e, d))
            assert 0.1 <= r <= 10


def test_k_functional_candidate_monotone(corpus):
    e = corpus["bump_3q"]
    full = k_functional_estimate(e, 0.01)
    fewer = k_functional_estimate(e, 0.01, ks=[1, 4])
    assert full <= fewer
    labels = [lab for lab, _ in k_functional_candidates(e, 0.01)]
    assert "jackson_k256" in labels and "truncate_768" in labels
    with pytest.raises(ValueError):
        k_functional_estimate(e, 0.0)
