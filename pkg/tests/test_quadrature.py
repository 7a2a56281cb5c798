import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import simpson

from capjackson.harmonic import CapGeometry
from capjackson.kernel import kernel_panels
from capjackson.quadrature import (
    ConvergenceError,
    check_p,
    composite_rule,
    gauss_legendre_rule,
    integrate_adaptive,
    integrate_cap,
    sphere_grid,
)
from capjackson.special_fn import sphere_volume


def simpson_oracle(f, a, b, n=10**6):
    x = np.linspace(a, b, n + 1)
    return simpson(f(x), x=x)


def test_rule_examples():
    r1 = gauss_legendre_rule(1)
    assert r1.nodes == pytest.approx([0.0]) and r1.weights == pytest.approx([2.0])
    r2 = gauss_legendre_rule(2)
    assert r2.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=1e-15)
    assert r2.weights == pytest.approx([1.0, 1.0], abs=1e-15)
    r20 = gauss_legendre_rule(20, 0.0, math.pi)
    assert r20.integrate(np.sin(r20.nodes)) == pytest.approx(2.0, abs=1e-12)


def test_rule_errors():
    with pytest.raises(ValueError):
        gauss_legendre_rule(3, 1.0, 1.0)
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)


@given(order=st.integers(1, 40), a=st.floats(-5, 5), width=st.floats(1e-3, 10))
def test_rule_invariants(order, a, width):
    r = gauss_legendre_rule(order, a, a + width)
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(width, abs=1e-10)
    assert np.all(np.diff(r.nodes) > 0)
    assert r.nodes[0] >= a and r.nodes[-1] <= a + width


@given(order=st.integers(1, 12), data=st.data())
def test_rule_polynomial_exactness(order, data):
    deg = data.draw(st.integers(0, 2 * order - 1))
    c = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=deg + 1, max_size=deg + 1)))
    r = gauss_legendre_rule(order, -0.5, 1.5)
    P = np.polynomial.Polynomial(c)
    exact = P.integ()(1.5) - P.integ()(-0.5)
    assert r.integrate(P(r.nodes)) == pytest.approx(exact, abs=1e-11 * (1 + np.abs(c).sum()))


def test_composite_rule_weights():
    r = composite_rule(16, 0.0, 2.0, 37)
    assert r.weights.sum() == pytest.approx(2.0, abs=1e-13)
    assert r.nodes.size == 16 * 37


def test_adaptive_examples():
    g = math.pi / 2
    assert integrate_adaptive(lambda t: np.ones_like(t), 0, g) == pytest.approx(g, abs=1e-10)
    assert integrate_adaptive(lambda t: t**2, 0, 1) == pytest.approx(1 / 3, abs=1e-10)

    def f(t):
        t = np.asarray(t, float)
        safe = np.where(t > 0, np.sin(t / 2), 1.0)
        return np.where(t > 0, np.sin(8 * t / 2) ** 2 / safe * np.sin(t), 0.0)

    got = integrate_adaptive(f, 0, g, tol=1e-12, min_panels=32)
    assert got == pytest.approx(simpson_oracle(f, 0, g), abs=1e-8)


def test_adaptive_vector_valued():
    got = integrate_adaptive(lambda t: np.stack([t, t**2, np.cos(t)]), 0.0, 1.0)
    assert got == pytest.approx([0.5, 1 / 3, math.sin(1.0)], abs=1e-12)


def test_adaptive_reversed_and_empty():
    assert integrate_adaptive(np.cos, 1.0, 0.0) == pytest.approx(-math.sin(1.0), abs=1e-12)
    assert integrate_adaptive(np.cos, 1.0, 1.0) == 0.0


def test_adaptive_nonconvergence():
    with pytest.raises(ConvergenceError):
        # coarse and fine estimates of noise never agree
        integrate_adaptive(lambda t: np.random.default_rng(t.size).standard_normal(t.size),
                           0.0, 1.0, tol=1e-12)
    with pytest.raises(ValueError):
        integrate_adaptive(np.cos, 0, 1, tol=0)
    with pytest.raises(ValueError):
        integrate_adaptive(np.cos, 0, 1, min_panels=0)


def test_adaptive_deterministic():
    f = lambda t: np.sin(50 * t) ** 2 * np.exp(-t)
    a = integrate_adaptive(f, 0, 3, tol=1e-13)
    b = integrate_adaptive(f, 0, 3, tol=1e-13)
    assert a == b


@pytest.mark.parametrize("k", [1, 8, 64, 256, 512])
@pytest.mark.parametrize("s", [1, 3, 5])
def test_oscillation_safety(k, s):
    # integrand scaled to O(1) as in kernel_normalize
    scale = float(k) ** (2 * s - 2 - 1)

    def f(t):
        safe = np.where(t > 0, np.sin(t / 2), 1.0)
        return np.where(t > 0, np.sin(k * t / 2) ** (2 * s) / safe ** (2 * s - 1), 0.0) * np.sin(t) / scale

    base = integrate_adaptive(f, 0, math.pi / 2, min_panels=kernel_panels(k))
    doubled = integrate_adaptive(f, 0, math.pi / 2, min_panels=2 * kernel_panels(k))
    assert abs(base - doubled) <= 1e-9 * abs(doubled)


def test_sphere_grid_invariants():
    g = sphere_grid(32)
    assert g.total_weight == pytest.approx(sphere_volume(3), abs=1e-8)
    assert g.n_phi >= 2 * g.n_theta
    assert np.allclose(np.linalg.norm(g.points, axis=1), 1.0)
    with pytest.raises(ValueError):
        sphere_grid(32, 40)


def test_integrate_cap_examples():
    geom = CapGeometry.north(3, math.pi / 2)
    grid = sphere_grid(64)
    one = lambda x: np.ones(len(x))
    assert integrate_cap(one, geom, grid, 1) == pytest.approx(2 * math.pi, abs=1e-6)
    assert integrate_cap(lambda x: np.zeros(len(x)), geom, grid, 2) == 0.0
    assert integrate_cap(lambda x: -3.5 * np.ones(len(x)), geom, grid, math.inf) == 3.5
    with pytest.raises(ValueError):
        integrate_cap(one, geom, grid, 3)


def test_integrate_cap_refinement():
    # smooth f*: a smooth function times a bump supported inside the cap
    geom = CapGeometry(3, (0.0, 0.6, 0.8), 1.0)

    def f(x):
        th = np.arccos(np.clip(x @ geom.center, -1, 1)) / 0.9
        q = np.maximum(1 - th**2, 1e-300)
        return (np.exp(x[:, 0]) * (2 + np.cos(2 * x[:, 1])) + x[:, 2] ** 2) * np.where(th < 1, np.exp(1 - 1 / q), 0)

    for p in (1, 2):
        a = integrate_cap(f, geom, sphere_grid(64, axis=geom.x0), p)
        b = integrate_cap(f, geom, sphere_grid(128, axis=geom.x0), p)
        assert abs(a - b) < 1e-5 * abs(b)


def test_integrate_cap_hemisphere_refinement():
    geom = CapGeometry(3, (0.0, 0.6, 0.8), math.pi / 2)
    f = lambda x: np.exp(x[:, 0]) * np.cos(2 * x[:, 1]) + x[:, 2] ** 2
    a = integrate_cap(f, geom, sphere_grid(64, axis=geom.x0), 2)
    b = integrate_cap(f, geom, sphere_grid(128, axis=geom.x0), 2)
    assert abs(a - b) < 1e-5 * abs(b)


@given(c=st.just(0.0) | st.floats(0.01, 10) | st.floats(-10, -0.01), p=st.sampled_from([1, 2, math.inf]))
def test_integrate_cap_positivity(c, p):
    geom = CapGeometry.north(3, 0.8)
    v = integrate_cap(lambda x: c * x[:, 0], geom, sphere_grid(16), p)
    assert v >= 0
    assert (v == 0) == (c == 0)


def test_check_p():
    assert check_p(1) == 1 and check_p(2) == 2
    assert check_p("inf") == math.inf and check_p(math.inf) == math.inf
    for bad in (0, 3, 1.5, "two"):
        with pytest.raises(ValueError):
            check_p(bad)
