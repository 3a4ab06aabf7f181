import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clifford_manifolds.algebra import basis_blade, gp, reverse, scalar, vec_to_mv
from clifford_manifolds.kernels import cauchy_G
from clifford_manifolds.moebius import (
    MoebiusPoleError,
    VahlenError,
    VahlenMatrix,
    cocycle_check,
    compose,
    hyper_conformal_pullback,
    matrix_inverse,
    moebius_apply,
    random_word,
    vahlen_check,
    weight_factor,
)
from clifford_manifolds.operators import dirac_fd

N = 3
seeds = st.integers(0, 2**31 - 1)


def e(i, n=N):
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


def test_vahlen_check_examples():
    rep = vahlen_check(VahlenMatrix.identity(N))
    assert rep.passed and rep.details["pseudo_determinant"] == 1.0
    assert vahlen_check(VahlenMatrix.inversion(N), "special").passed
    one, zero = scalar(1.0, N), np.zeros(8)
    bad = VahlenMatrix(one, basis_blade(N, 1, 2), zero, one)
    rep = vahlen_check(bad)
    assert not rep.passed
    assert rep.details["a_inv_b_vector"] is False


def test_vahlen_check_special_mode():
    dil = VahlenMatrix.dilation(4.0, N)
    assert vahlen_check(dil, "special").passed
    two = VahlenMatrix(scalar(2.0, N), np.zeros(8), np.zeros(8), scalar(1.0, N))
    assert vahlen_check(two).passed
    assert not vahlen_check(two, "special").passed


def test_compose_translations():
    t = VahlenMatrix.translation(e(1))
    assert compose(t, t).allclose(VahlenMatrix.translation(2 * e(1)))


def test_inverse_of_J():
    J = VahlenMatrix.inversion(N)
    inv = matrix_inverse(J)
    expect = VahlenMatrix(np.zeros(8), scalar(1.0, N), scalar(-1.0, N), np.zeros(8))
    assert inv.allclose(expect)
    assert compose(J, inv).allclose(VahlenMatrix.identity(N))


def test_apply_examples():
    J = VahlenMatrix.inversion(N)
    assert np.allclose(moebius_apply(J, e(3)), e(3))
    assert np.allclose(moebius_apply(J, 2 * e(1)), 0.5 * e(1))
    x = np.array([0.3, -0.7, 1.1])
    assert np.allclose(moebius_apply(VahlenMatrix.translation(e(1)), x), x + e(1))


def test_pole_is_signalled():
    with pytest.raises(MoebiusPoleError):
        moebius_apply(VahlenMatrix.inversion(N), np.zeros(N))


def test_weight_examples():
    x = np.array([0.4, 1.3, -0.2])
    I = VahlenMatrix.identity(N)
    assert np.allclose(weight_factor(I, x, "j1"), scalar(1.0, N))
    assert np.allclose(weight_factor(I, x, "j2"), scalar(1.0, N))
    J = VahlenMatrix.inversion(N)
    assert np.allclose(weight_factor(J, x, "j1"), cauchy_G(x))
    assert np.isclose(weight_factor(J, 2 * e(1), "j2")[0], 0.5)


def test_cocycle_examples():
    x = np.array([0.4, 1.3, -0.2])
    I, J = VahlenMatrix.identity(N), VahlenMatrix.inversion(N)
    T = VahlenMatrix.translation(e(1))
    assert cocycle_check(I, I, x) == 0.0
    assert cocycle_check(J, T, x, "j1") < 1e-10
    assert cocycle_check(J, T, x, "j2") < 1e-10


def test_pullback_examples():
    one = lambda y: np.broadcast_to(scalar(1.0, N), np.shape(y)[:-1] + (8,))
    x = np.array([0.2, 0.1, 0.8])
    g = lambda y: vec_to_mv(np.asarray(y) ** 2)
    assert np.allclose(hyper_conformal_pullback(VahlenMatrix.identity(N), g, x), g(x))
    T = VahlenMatrix.translation(e(1))
    assert np.allclose(hyper_conformal_pullback(T, one, x), scalar(1.0, N))
    J = VahlenMatrix.inversion(N)
    assert np.allclose(hyper_conformal_pullback(J, one, e(3)), scalar(1.0, N))


def test_pullback_preconditions():
    one = lambda y: scalar(1.0, N)
    with pytest.raises(VahlenError):
        hyper_conformal_pullback(VahlenMatrix.translation(e(3)), one, e(3))
    with pytest.raises(VahlenError):
        hyper_conformal_pullback(VahlenMatrix.identity(N), one, -e(3))


def test_json_roundtrip():
    M = random_word(np.random.default_rng(3), N, 5)
    assert VahlenMatrix.from_json(M.to_json()).allclose(M, 0.0)


@given(seeds, st.integers(3, 4))
def test_action_law(seed, n):
    rng = np.random.default_rng(seed)
    M1, M2 = random_word(rng, n, 4), random_word(rng, n, 4)
    x = rng.normal(size=n)
    try:
        lhs = moebius_apply(compose(M1, M2), x)
        rhs = moebius_apply(M1, moebius_apply(M2, x))
    except MoebiusPoleError:
        return
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, np.max(np.abs(lhs))))


@given(seeds)
def test_matrix_inverse_property(seed):
    M = random_word(np.random.default_rng(seed), N, 6)
    assert compose(M, matrix_inverse(M)).allclose(VahlenMatrix.identity(N), 1e-9)


@given(seeds, st.sampled_from(["j1", "j2"]))
def test_cocycle_property(seed, kind):
    rng = np.random.default_rng(seed)
    M1, M2 = random_word(rng, N, 3), random_word(rng, N, 3)
    x = rng.normal(size=N)
    try:
        r = cocycle_check(M1, M2, x, kind)
    except MoebiusPoleError:
        return
    scale = np.max(np.abs(weight_factor(compose(M1, M2), x, kind)))
    assert r < 1e-10 * max(1.0, scale)


@given(seeds)
def test_half_space_preserved(seed):
    rng = np.random.default_rng(seed)
    M = random_word(rng, N, 6, upper=True)
    x = np.append(rng.normal(size=N - 1), rng.uniform(0.1, 3.0))
    assert moebius_apply(M, x)[-1] > 0


def test_conformal_covariance():
    # f = G(. - a) is monogenic away from a; its j1-weighted pullback stays so
    a = np.array([3.0, 0.5, -1.0])
    f = lambda y: cauchy_G(np.asarray(y) - a)
    rng = np.random.default_rng(11)
    for _ in range(5):
        M = random_word(rng, N, 3)
        x = rng.normal(size=N) * 0.5
        try:
            pulled = lambda y, M=M: gp(weight_factor(M, y, "j1"), f(moebius_apply(M, y)))
            res = np.linalg.norm(dirac_fd(pulled, x))
        except (MoebiusPoleError, ArithmeticError):
            continue
        assert res < 1e-4


def test_j1_is_reverse_normalised():
    M = random_word(np.random.default_rng(5), N, 4)
    x = np.array([0.3, 0.2, 0.9])
    g = gp(M.c, vec_to_mv(x)) + M.d
    assert np.allclose(weight_factor(M, x, "j1"), reverse(g) / np.linalg.norm(g) ** N)
