import warnings

import numpy as np
import pytest

from clifford_manifolds import algebra as al
from clifford_manifolds.hopf_boundary import (
    BoundaryWarning,
    cauchy_transform_matrix,
    dirichlet_solve,
    half_hopf_boundary_mesh,
    half_hopf_kernel,
    hardy_project,
    identified_pairs,
    kerzman_stein_matrix,
    riesz_symbol,
    szego_projection_matrix,
)
from clifford_manifolds.integrals import IntegralError, SurfaceQuadrature
from clifford_manifolds.operators import laplace_fd
from clifford_manifolds.periodization import HopfParams, TruncationPolicy


@pytest.fixture(scope="module")
def mesh8():
    return half_hopf_boundary_mesh(2, 8, 8)


@pytest.mark.parametrize("m", [2, 3])
def test_mesh_area_and_shape(m):
    s = half_hopf_boundary_mesh(m, 6, 10)
    assert len(s) == 60
    assert abs(s.area() - np.pi * (m * m - 1)) < 1e-6
    assert np.allclose(s.normals, [0, 0, -1])
    r = np.linalg.norm(s.nodes, axis=1)
    assert np.all((r >= 1) & (r < m)) and np.all(s.nodes[:, 2] == 0)


def test_identification_map():
    s = half_hopf_boundary_mesh(2, 6, 10)
    inner, outer = identified_pairs(s)
    ri = np.linalg.norm(s.nodes[inner], axis=1)
    ro = np.linalg.norm(s.nodes[outer], axis=1)
    assert np.allclose(ri, ri[0]) and np.allclose(ro, ro[0])
    assert ri[0] < 1.1 and ro[0] > 1.8
    ang = lambda p: np.arctan2(p[:, 1], p[:, 0])
    assert np.allclose(ang(s.nodes[inner]), ang(s.nodes[outer]))


def test_mesh_validation():
    with pytest.raises(IntegralError):
        half_hopf_boundary_mesh(2, 4, 4, n=4)
    with pytest.raises(IntegralError):
        half_hopf_boundary_mesh(1, 4, 4)


def test_one_node_matrix_is_half():
    s = half_hopf_boundary_mesh(2, 1, 1)
    H = cauchy_transform_matrix(s, method="nystrom")
    assert np.array_equal(H.matrix, 0.5 * np.eye(4))


def test_degenerate_mesh_rejected():
    p = np.array([[1.2, 0, 0], [1.2, 0, 0]])
    s = SurfaceQuadrature(p, np.tile([0, 0, -1.0], (2, 1)), np.ones(2), {})
    with pytest.raises(IntegralError):
        cauchy_transform_matrix(s, method="nystrom")


def test_spectral_preconditions(mesh8):
    with pytest.raises(IntegralError):
        cauchy_transform_matrix(half_hopf_boundary_mesh(2, 5, 8))
    with pytest.raises(IntegralError):
        cauchy_transform_matrix(mesh8, HopfParams(3))


def test_riesz_symbol_is_unimodular():
    k = np.arange(-4, 5)[:, None]
    tau = np.linspace(-20, 20, 9)[None, :]
    assert np.allclose(np.abs(riesz_symbol(k, tau)), 1.0)


def test_kerzman_stein_structure(mesh8):
    A = kerzman_stein_matrix(mesh8)
    assert np.abs((A + A.adjoint()).matrix).max() < 1e-12
    assert np.all(np.diag(A.matrix) == 0)


def test_kerzman_stein_nystrom_skew():
    s = half_hopf_boundary_mesh(2, 4, 6)
    A = kerzman_stein_matrix(s, K=TruncationPolicy(12), method="nystrom")
    assert np.abs((A + A.adjoint()).matrix).max() < 1e-12


def test_spectral_transform_is_a_projection(mesh8):
    H = cauchy_transform_matrix(mesh8)
    assert H.idempotency_defect() < 1e-12


@pytest.mark.parametrize("variant", ["resolvent", "as_printed"])
def test_szego_variants(mesh8, variant):
    r = szego_projection_matrix(mesh8, variant=variant)
    assert r.variant == variant and r.defect < 1e-12
    with pytest.raises(IntegralError):
        szego_projection_matrix(mesh8, variant="inverse")


def test_hardy_split(mesh8):
    z = np.zeros((len(mesh8), 8))
    gp_, gm = hardy_project(z, mesh8)
    assert not gp_.any() and not gm.any()
    g = np.random.default_rng(1).normal(size=(len(mesh8), 8))
    H = cauchy_transform_matrix(mesh8)
    gp_, gm = hardy_project(g, mesh8, H=H)
    assert np.abs(gp_ + gm - g).max() < 1e-13
    again, _ = hardy_project(gp_, mesh8, H=H)
    defect = szego_projection_matrix(mesh8, H=H).defect
    assert np.linalg.norm(again - gp_) <= (defect + 1e-12) * np.linalg.norm(g)


def test_operator_apply_shape_check(mesh8):
    H = cauchy_transform_matrix(mesh8)
    with pytest.raises(IntegralError):
        H.apply(np.zeros((3, 8)))


# kernels -----------------------------------------------------------------
def test_poisson_is_twice_scalar_szego():
    x = np.array([[1.2, 0.4, 0.0], [-0.7, 1.1, 0.0]])
    w = np.array([0.3, -0.2, 0.6])
    S = half_hopf_kernel(x, w, "szego")
    P = half_hopf_kernel(x, w, "poisson")
    assert np.allclose(P[:, 0], 2 * S[:, 0]) and not P[:, 1:].any()


def test_poisson_positivity():
    rng = np.random.default_rng(2)
    r = np.exp(rng.uniform(0, np.log(2), 100))
    t = rng.uniform(0, 2 * np.pi, 100)
    x = np.stack([r * np.cos(t), r * np.sin(t), np.zeros(100)], -1)
    for k in range(100):
        w = np.append(rng.uniform(-1.5, 1.5, 2), rng.uniform(0.1, 1.5))
        assert half_hopf_kernel(x[k], w, "poisson")[0] > 0


def test_poisson_harmonic_in_w():
    x = np.array([1.3, 0.2, 0.0])
    f = lambda w: np.stack([half_hopf_kernel(x, p, "poisson") for p in np.reshape(w, (-1, 3))]).reshape(np.shape(w)[:-1] + (8,))
    assert abs(laplace_fd(f, np.array([0.4, -0.3, 0.7]))[0]) < 1e-3


def test_bergman_kernels():
    x = np.array([1.3, 0.2, 0.0])
    w = np.array([0.4, -0.3, 0.7])
    h = 1e-4
    up, dn = w + [0, 0, h], w - [0, 0, h]
    fd = 2 * (half_hopf_kernel(x, up, "szego") - half_hopf_kernel(x, dn, "szego")) / (2 * h)
    B = half_hopf_kernel(x, w, "bergman_monogenic")
    assert np.allclose(B, fd, atol=1e-6)
    Bh = half_hopf_kernel(x, w, "bergman_harmonic")
    assert Bh[0] == B[0] and not Bh[1:].any()


def test_kernel_preconditions():
    with pytest.raises(IntegralError):
        half_hopf_kernel(np.array([1.2, 0, 0.1]), np.array([0, 0, 1.0]), "szego")
    with pytest.raises(IntegralError):
        half_hopf_kernel(np.array([1.2, 0, 0]), np.array([0, 0, -1.0]), "szego")
    with pytest.raises(IntegralError):
        half_hopf_kernel(np.array([1.2, 0, 0]), np.array([0, 0, 1.0]), "cauchy")


# Dirichlet problem ----------------------------------------------------------
@pytest.fixture(scope="module")
def mesh_fine():
    return half_hopf_boundary_mesh(2, 16, 32)


def test_dirichlet_reproduces_inverse_radius(mesh_fine):
    # the Poisson extension of 1/r is 1/|w|
    pts = np.array([[1.4, 0, 0.5], [0, 1.3, 0.8], [-1.2, 0.5, 0.4]])
    g = 1 / np.linalg.norm(mesh_fine.nodes, axis=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        u = dirichlet_solve(g, mesh_fine, eval_points=pts)
    assert np.allclose(u, 1 / np.linalg.norm(pts, axis=1), atol=1e-3)


def test_dirichlet_constant_data(mesh_fine):
    pts = np.array([[1.4, 0, 1.0], [0, 1.3, 1.2], [-1.2, 0.5, 0.9]])
    u = dirichlet_solve(np.ones(len(mesh_fine)), mesh_fine, eval_points=pts)
    assert np.all(np.abs(u - 1) < 0.2)


def test_dirichlet_warns_near_boundary(mesh_fine):
    with pytest.warns(BoundaryWarning):
        dirichlet_solve(np.ones(len(mesh_fine)), mesh_fine, eval_points=np.array([[1.4, 0, 0.05]]))


def test_dirichlet_clifford_data(mesh_fine):
    g = np.zeros((len(mesh_fine), 8))
    g[:, 0] = 1 / np.linalg.norm(mesh_fine.nodes, axis=1)
    g[:, 3] = 2 * g[:, 0]
    u = dirichlet_solve(g, mesh_fine, eval_points=np.array([[1.4, 0, 1.0]]))
    assert u.shape == (1, 8) and np.isclose(u[0, 3], 2 * u[0, 0])


def test_dirichlet_data_shape(mesh_fine):
    with pytest.raises(IntegralError):
        dirichlet_solve(np.ones(3), mesh_fine, eval_points=np.array([[1.4, 0, 1.0]]))
