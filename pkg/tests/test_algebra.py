import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from clifford_manifolds import algebra as al
from clifford_manifolds.algebra import DimensionError, Multivector, geometric_product, norm

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def mv_arrays(n):
    return arrays(np.float64, (1 << n,), elements=finite)


def vec_arrays(n):
    return arrays(np.float64, (n,), elements=finite)


def blade_product_bruteforce(i: int, j: int, n: int) -> tuple[float, int]:
    """Sign and index of e_I e_J by bubble-sorting generator lists."""
    word = [k for k in range(n) if i >> k & 1] + [k for k in range(n) if j >> k & 1]
    sign = 1.0
    changed = True
    while changed:
        changed = False
        for p in range(len(word) - 1):
            if word[p] > word[p + 1]:
                word[p], word[p + 1] = word[p + 1], word[p]
                sign = -sign
                changed = True
    out = []
    for k in word:
        if out and out[-1] == k:
            out.pop()
            sign = -sign  # e_k e_k = -1
        else:
            out.append(k)
    return sign, sum(1 << k for k in out)


def test_e1_squared_is_minus_one():
    e1 = Multivector.blade(3, 1)
    assert (e1 * e1).allclose(Multivector.from_scalar(-1.0, 3))


def test_bivector_times_vector():
    e12, e2 = Multivector.blade(3, 1, 2), Multivector.blade(3, 2)
    assert (e12 * e2).allclose(-Multivector.blade(3, 1))


@pytest.mark.parametrize("n", [3, 4])
def test_blade_table_against_bruteforce(n):
    for i in range(1 << n):
        for j in range(1 << n):
            s, k = blade_product_bruteforce(i, j, n)
            a, b = np.eye(1 << n)[i], np.eye(1 << n)[j]
            expect = np.zeros(1 << n)
            expect[k] = s
            assert np.array_equal(al.gp(a, b), expect)


def test_involution_examples():
    n = 3
    e12 = Multivector.blade(n, 1, 2)
    assert e12.reverse().allclose(-e12)
    assert Multivector.blade(n, 1).conjugate().allclose(-Multivector.blade(n, 1))
    assert Multivector.blade(n, n).star().allclose(-Multivector.blade(n, n))
    assert Multivector.blade(n, 1).star().allclose(Multivector.blade(n, 1))


def test_scalar_part_examples():
    a = Multivector.from_scalar(3.0, 3) + 2 * Multivector.blade(3, 1)
    assert a.scalar == 3.0
    assert Multivector.blade(3, 1, 2).scalar == 0.0
    x = np.array([0.4, -1.2, 0.7])
    en = Multivector.blade(3, 3)
    assert np.isclose(((-en) * Multivector.from_vector(x)).scalar, x[-1])


def test_vector_inverse_examples():
    assert np.allclose(al.vector_inverse(np.array([2.0, 0, 0])), [-0.5, 0, 0])
    assert np.allclose(al.vector_inverse(np.array([0, 0, 1.0])), [0, 0, -1.0])
    with pytest.raises(ArithmeticError):
        al.vector_inverse(np.zeros(3))


def test_norm_examples():
    assert np.isclose(norm(Multivector.blade(3, 1) + Multivector.blade(3, 2)), np.sqrt(2))
    assert norm(Multivector.zero(3)) == 0.0


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        geometric_product(Multivector.blade(3, 1), Multivector.blade(4, 1))


def test_dimension_bounds():
    with pytest.raises(DimensionError):
        Multivector.zero(9)


def test_json_schema_roundtrip():
    a = Multivector(3, np.array([1.0, 0, -2.5, 0, 0, 0, 0, 0.25]))
    d = json.loads(a.to_json())
    assert d == {"n": 3, "coeffs": {"0": 1.0, "2": -2.5, "7": 0.25}}
    assert Multivector.from_json(a.to_json()).allclose(a, 0.0)


@given(vec_arrays(4))
def test_vector_roundtrip_exact(x):
    assert np.array_equal(Multivector.from_vector(x).to_vector(), x)


@given(mv_arrays(4), mv_arrays(4), mv_arrays(4))
def test_associativity_and_distributivity(a, b, c):
    assert np.allclose(al.gp(al.gp(a, b), c), al.gp(a, al.gp(b, c)), atol=1e-10)
    assert np.allclose(al.gp(a, b + c), al.gp(a, b) + al.gp(a, c), atol=1e-12)


@given(mv_arrays(3), mv_arrays(3))
def test_anti_automorphisms(a, b):
    for kind in ("reverse", "conjugate"):
        lhs = al.involution(al.gp(a, b), kind)
        rhs = al.gp(al.involution(b, kind), al.involution(a, kind))
        assert np.allclose(lhs, rhs, atol=1e-12)
    assert np.allclose(al.star(al.gp(a, b)), al.gp(al.star(a), al.star(b)), atol=1e-12)


@given(mv_arrays(5))
def test_involutions_self_inverse(a):
    for kind in ("reverse", "conjugate", "star"):
        assert np.array_equal(al.involution(al.involution(a, kind), kind), a)


@given(vec_arrays(5))
def test_vector_square(x):
    sq = al.gp(al.vec_to_mv(x), al.vec_to_mv(x))
    expect = np.zeros(32)
    expect[0] = -np.dot(x, x)
    assert np.allclose(sq, expect, atol=1e-12)
    assert np.isclose(norm(Multivector.from_vector(x)) ** 2, -sq[0])


@given(vec_arrays(4).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_vector_inverse_property(x):
    one = al.gp(al.vec_to_mv(x), al.vec_to_mv(al.vector_inverse(x)))
    assert np.allclose(one, al.scalar(1.0, 4), atol=1e-12)


@given(mv_arrays(3))
def test_norm_nonnegative(a):
    assert norm(a) >= 0
    assert (norm(a) == 0) == (not np.any(a))
