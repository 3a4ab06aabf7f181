import math

import numpy as np
import pytest

from clifford_manifolds import algebra as al
from clifford_manifolds.integrals import (
    IntegralError,
    omega,
    reproduce_integral,
    sphere_quadrature,
    torus_harmonic_field,
)
from clifford_manifolds.kernels import cauchy_G, green_H
from clifford_manifolds.periodization import HopfParams, Lattice, TruncationPolicy, hopf_series

from conftest import const_one


def test_omega_values():
    assert math.isclose(omega(3), 4 * math.pi)
    assert math.isclose(omega(4), 2 * math.pi**2)
    assert math.isclose(omega(2), 2 * math.pi)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sphere_area_and_normals(n):
    s = sphere_quadrature(np.zeros(n), 1.5, 12, n)
    assert math.isclose(s.area(), omega(n) * 1.5 ** (n - 1), rel_tol=1e-10)
    assert np.allclose(np.linalg.norm(s.normals, axis=1), 1.0)
    assert np.all(s.weights > 0)
    assert np.allclose(s.integrate(s.nodes), 0.0, atol=1e-12)


def test_sphere_area_order_24():
    s = sphere_quadrature(np.array([0.3, -1.0, 2.0]), 0.7, 24, 3)
    assert abs(s.area() - 4 * math.pi * 0.49) < 1e-10


def test_sphere_polynomial_exactness():
    # mean of x_1^2 over S^{n-1} is 1/n
    for n in (3, 4, 5):
        s = sphere_quadrature(np.zeros(n), 1.0, 8, n)
        assert math.isclose(s.integrate(s.nodes[:, 0] ** 2) / omega(n), 1 / n, rel_tol=1e-12)


def test_sphere_validation():
    with pytest.raises(IntegralError):
        sphere_quadrature(np.zeros(2), 1.0, 8, 2)
    with pytest.raises(IntegralError):
        sphere_quadrature(np.zeros(3), 1.0, 3, 3)
    with pytest.raises(IntegralError):
        sphere_quadrature(np.zeros(3), -1.0, 8, 3)


def test_mean_value_integral():
    n = 3
    s = sphere_quadrature(np.zeros(n), 1.0, 24, n)
    val = s.integrate(al.gp(cauchy_G(s.nodes), al.vec_to_mv(s.normals)))
    # G(x) n(x) = -1 on the unit sphere, so the integral is -omega
    assert np.allclose(val, -omega(n) * al.scalar(1.0, n), atol=1e-8)


def test_euclid_cauchy_examples():
    n = 3
    s = sphere_quadrature(np.zeros(n), 1.0, 24, n)
    r = reproduce_integral("euclid_cauchy", const_one(n), s, np.zeros(n))
    assert r.abs_error < 1e-8
    f = lambda x: cauchy_G(np.asarray(x) - np.array([3.0, 0, 0]))
    r = reproduce_integral("euclid_cauchy", f, s, np.array([0.0, 0.3, 0.0]))
    assert r.abs_error < 1e-5


def test_euclid_cauchy_order_sweep():
    n = 3
    # singularity close to the sphere so the error stays above rounding up to order 32
    f = lambda x: cauchy_G(np.asarray(x) - np.array([1.15, 0.3, 0]))
    y = np.array([0.4, 0.1, -0.3])
    errs = [
        reproduce_integral("euclid_cauchy", f, sphere_quadrature(np.zeros(n), 1.0, o, n), y).abs_error
        for o in (8, 16, 24, 32)
    ]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_euclid_cauchy_n4():
    n = 4
    s = sphere_quadrature(np.zeros(n), 1.0, 16, n)
    f = lambda x: cauchy_G(np.asarray(x) - np.array([0, 2.5, 0, 0]))
    assert reproduce_integral("euclid_cauchy", f, s, np.array([0.1, 0, 0.2, 0])).abs_error < 1e-6


def test_hopf_cauchy_reproduces_section():
    y0 = np.array([0.2, 1.5, 0.3])
    c = np.array([1.3, 0.2, 0.1])
    s = sphere_quadrature(c, 0.2, 24, 3)
    f = lambda x: hopf_series(x, y0, HopfParams(2), "G", TruncationPolicy(25)).value
    r = reproduce_integral("hopf_cauchy", f, s, c + np.array([0.05, 0.02, -0.03]))
    assert r.abs_error < 1e-6


def test_hopf_green_reproduces_harmonic_function():
    a = np.array([0.0, 2.0, 0.5])
    f = lambda x: green_H(np.asarray(x) - a)
    df = lambda x: -cauchy_G(np.asarray(x) - a)  # D |x - a|^-1 = -G(x - a) in R^3
    c = np.array([1.4, 0.1, 0.2])
    s = sphere_quadrature(c, 0.25, 24, 3)
    r = reproduce_integral("hopf_green", f, s, c + np.array([0.03, -0.05, 0.02]), {"max_shell": 20}, df=df)
    assert r.abs_error < 1e-6


def test_hopf_green_needs_df():
    s = sphere_quadrature(np.array([1.4, 0, 0]), 0.2, 8, 3)
    with pytest.raises(IntegralError):
        reproduce_integral("hopf_green", const_one(3), s, np.array([1.4, 0, 0.05]))


def test_torus_green_4pt():
    n = 3
    L = Lattice.standard(n, n, 0)
    aux = np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.2], [0.2, 0.2, 0.8]])
    K = TruncationPolicy(4)
    f, df = torus_harmonic_field([[0.6, 0.6, 0.6], [0.9, 0.3, 0.5], [0.3, 0.9, 0.4], [0.5, 0.5, 0.9]], L, K)
    c = np.array([0.35, 0.35, 0.3])
    s = sphere_quadrature(c, 0.12, 12, n)
    y = c + np.array([0.02, -0.01, 0.03])
    r = reproduce_integral("torus_green_4pt", f, s, y, {"lattice": L, "anchors": aux, "truncation": K}, df=df)
    assert r.abs_error < 1e-6


def test_torus_green_anchor_checks():
    n = 3
    L = Lattice.standard(n, n, 0)
    f, df = torus_harmonic_field([[0.6, 0.6, 0.6], [0.9, 0.3, 0.5], [0.3, 0.9, 0.4], [0.5, 0.5, 0.9]], L)
    c = np.array([0.35, 0.35, 0.3])
    s = sphere_quadrature(c, 0.12, 8, n)
    inside = np.array([[0.36, 0.35, 0.3], [0.1, 0.8, 0.2], [0.2, 0.2, 0.8]])
    with pytest.raises(IntegralError):
        reproduce_integral("torus_green_4pt", f, s, c, {"lattice": L, "anchors": inside}, df=df)


@pytest.mark.parametrize(
    "theorem,params",
    [("hopf_hyper", {}), ("cylinder_hyper", {"lattice": Lattice(np.eye(3)[:1], 0)})],
)
def test_hyper_formulas_reproduce_constants(theorem, params):
    n = 3
    c = np.array([0.1, 0.0, 1.4])
    s = sphere_quadrature(c, 0.1, 24, n)
    r = reproduce_integral(theorem, const_one(n), s, c + np.array([0.01, 0.02, 0.0]), params)
    assert r.abs_error < 1e-2
    assert set(r.readings) == {"both", "literal"}


def test_hyper_needs_upper_half_space():
    s = sphere_quadrature(np.array([0, 0, 0.05]), 0.1, 8, 3)
    with pytest.raises(IntegralError):
        reproduce_integral("hopf_hyper", const_one(3), s, np.array([0, 0, 0.05]))


def test_point_must_be_inside():
    s = sphere_quadrature(np.zeros(3), 1.0, 8, 3)
    with pytest.raises(IntegralError):
        reproduce_integral("euclid_cauchy", const_one(3), s, np.array([2.0, 0, 0]))
    with pytest.raises(IntegralError):
        reproduce_integral("nonsense", const_one(3), s, np.zeros(3))


def test_report_serializes():
    s = sphere_quadrature(np.zeros(3), 1.0, 12, 3)
    d = reproduce_integral("euclid_cauchy", const_one(3), s, np.zeros(3)).to_dict()
    assert d["theorem"] == "euclid_cauchy"
    assert d["tolerance_budget"]["quadrature"] >= 0
