"""Vahlen matrices and the Moebius action on R^n.

A Vahlen matrix ``(a b; c d)`` with Clifford entries acts on vectors by
``x -> (a x + b)(c x + d)^-1``.  Points sent to infinity raise
:class:`MoebiusPoleError`; they are never encoded as values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import (
    Multivector,
    SingularElementError,
    as_coeffs,
    conjugate,
    dim_of,
    gp,
    mv_inverse,
    mv_to_vec,
    reverse,
    scalar,
    vec_to_mv,
)

POLE_TOL = 1e-12
VECTOR_TOL = 1e-10


class MoebiusPoleError(ArithmeticError):
    """The point is mapped to infinity (c x + d is not invertible)."""


class VahlenError(ValueError):
    """Matrix is singular or outside the requested subgroup."""


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class VahlenMatrix:
    """2x2 matrix ``(a b; c d)`` of Cl_n coefficient arrays."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        arrs = [np.array(as_coeffs(v), dtype=float) for v in (self.a, self.b, self.c, self.d)]
        sizes = {v.shape for v in arrs}
        if len(sizes) != 1 or arrs[0].ndim != 1:
            raise VahlenError("entries must be single multivectors of one dimension")
        dim_of(arrs[0])
        for name, v in zip("abcd", arrs):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return dim_of(self.a)

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "VahlenMatrix":
        one, zero = scalar(1.0, n), np.zeros(1 << n)
        return cls(one, zero, zero, one)

    @classmethod
    def translation(cls, v) -> "VahlenMatrix":
        """T_v = (1 v; 0 1), x -> x + v."""
        v = np.asarray(v, dtype=float)
        n = v.shape[-1]
        return cls(scalar(1.0, n), vec_to_mv(v), np.zeros(1 << n), scalar(1.0, n))

    @classmethod
    def inversion(cls, n: int) -> "VahlenMatrix":
        """J = (0 -1; 1 0), x -> -x^-1 = x / |x|^2."""
        zero = np.zeros(1 << n)
        return cls(zero, scalar(-1.0, n), scalar(1.0, n), zero)

    @classmethod
    def dilation(cls, lam: float, n: int) -> "VahlenMatrix":
        """x -> lam * x for lam > 0 (special: pseudo-determinant 1)."""
        if lam <= 0:
            raise VahlenError("dilation factor must be positive")
        s = np.sqrt(lam)
        zero = np.zeros(1 << n)
        return cls(scalar(s, n), zero, zero, scalar(1.0 / s, n))

    # algebra ------------------------------------------------------------
    def pseudo_determinant(self) -> np.ndarray:
        return gp(self.a, reverse(self.d)) - gp(self.b, reverse(self.c))

    def __matmul__(self, other: "VahlenMatrix") -> "VahlenMatrix":
        return compose(self, other)

    def to_dict(self) -> dict:
        return {k: Multivector(self.n, getattr(self, k)).to_dict() for k in "abcd"}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "VahlenMatrix":
        try:
            parts = [Multivector.from_dict(data[k]).coeffs for k in "abcd"]
        except KeyError as exc:
            raise VahlenError(f"missing entry {exc}") from None
        return cls(*parts)

    @classmethod
    def from_json(cls, text: str) -> "VahlenMatrix":
        return cls.from_dict(json.loads(text))

    def allclose(self, other: "VahlenMatrix", tol: float = 1e-10) -> bool:
        return all(
            np.allclose(getattr(self, k), getattr(other, k), atol=tol, rtol=0) for k in "abcd"
        )


def compose(m1: VahlenMatrix, m2: VahlenMatrix) -> VahlenMatrix:
    if m1.n != m2.n:
        raise VahlenError(f"dimension mismatch {m1.n} vs {m2.n}")
    return VahlenMatrix(
        gp(m1.a, m2.a) + gp(m1.b, m2.c),
        gp(m1.a, m2.b) + gp(m1.b, m2.d),
        gp(m1.c, m2.a) + gp(m1.d, m2.c),
        gp(m1.c, m2.b) + gp(m1.d, m2.d),
    )


def _real_pseudo_det(m: VahlenMatrix, tol: float = 1e-10) -> float:
    p = m.pseudo_determinant()
    if np.max(np.abs(p[1:])) > tol * max(1.0, abs(p[0])):
        raise VahlenError("pseudo-determinant is not a real scalar")
    if abs(p[0]) < tol:
        raise VahlenError("pseudo-determinant vanishes")
    return float(p[0])


def matrix_inverse(m: VahlenMatrix) -> VahlenMatrix:
    """(d~ -b~; -c~ a~) / lambda with lambda the real pseudo-determinant."""
    lam = _real_pseudo_det(m)
    return VahlenMatrix(
        reverse(m.d) / lam, -reverse(m.b) / lam, -reverse(m.c) / lam, reverse(m.a) / lam
    )


def _is_vector(a: np.ndarray, tol: float) -> bool:
    try:
        mv_to_vec(a, tol)
    except ValueError:
        return False
    return True


def vahlen_check(m: VahlenMatrix, mode: str = "general", tol: float = 1e-10) -> CheckReport:
    """Check the verifiable Vahlen conditions; never raises.

    Whether the entries are products of vectors is not decidable from
    floating coefficients and is not tested.
    """
    if mode not in ("general", "special"):
        raise ValueError(f"unknown mode {mode!r}")
    details: dict = {}
    p = m.pseudo_determinant()
    real = bool(np.max(np.abs(p[1:])) <= tol * max(1.0, abs(p[0])))
    details["pseudo_determinant"] = float(p[0]) if real else p.tolist()
    details["pseudo_determinant_real"] = real
    details["pseudo_determinant_nonzero"] = bool(real and abs(p[0]) > tol)
    if mode == "special":
        details["pseudo_determinant_one"] = bool(real and abs(p[0] - 1.0) <= tol)
    for top, bot, key in ((m.a, m.b, "a_inv_b_vector"), (m.c, m.d, "c_inv_d_vector")):
        if np.max(np.abs(top)) <= tol:
            details[key] = None
            continue
        try:
            q = gp(mv_inverse(top), bot)
        except SingularElementError:
            details[key] = False
            continue
        details[key] = _is_vector(q, tol)
    details["products_of_vectors"] = "not checked"
    checks = [v for k, v in details.items() if isinstance(v, bool)]
    return CheckReport(all(checks), details)


def _denominator(m: VahlenMatrix, x: np.ndarray) -> np.ndarray:
    g = gp(m.c, vec_to_mv(x)) + m.d
    nrm = np.sqrt(np.sum(g * g, axis=-1))
    if np.any(nrm < POLE_TOL):
        raise MoebiusPoleError("point is mapped to infinity")
    return g


def _clifford_group_inverse(g: np.ndarray) -> np.ndarray:
    # for products of vectors g * conj(g) = |g|^2
    return conjugate(g) / np.sum(g * g, axis=-1, keepdims=True)


def moebius_apply(m: VahlenMatrix, x) -> np.ndarray:
    """(a x + b)(c x + d)^-1 for points ``x`` of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.n:
        raise VahlenError(f"point dimension {x.shape[-1]} != {m.n}")
    g = _denominator(m, x)
    num = gp(m.a, vec_to_mv(x)) + m.b
    y = gp(num, _clifford_group_inverse(g))
    return mv_to_vec(y, VECTOR_TOL)


def weight_factor(m: VahlenMatrix, x, kind: str = "j1") -> np.ndarray:
    """Conformal weights: j1 = rev(cx+d)/|cx+d|^n, j2 = |cx+d|^-(n-2)."""
    x = np.asarray(x, dtype=float)
    g = _denominator(m, x)
    nrm = np.sqrt(np.sum(g * g, axis=-1, keepdims=True))
    n = m.n
    if kind == "j1":
        return reverse(g) / nrm**n
    if kind == "j2":
        out = np.zeros_like(g)
        out[..., :1] = nrm ** (2 - n)
        return out
    raise ValueError(f"unknown weight kind {kind!r}")


def cocycle_check(m1: VahlenMatrix, m2: VahlenMatrix, x, kind: str = "j1") -> float:
    """|J(M1 M2, x) - J(M2, x) J(M1, M2<x>)|."""
    lhs = weight_factor(compose(m1, m2), x, kind)
    rhs = gp(weight_factor(m2, x, kind), weight_factor(m1, moebius_apply(m2, x), kind))
    return float(np.max(np.sqrt(np.sum((lhs - rhs) ** 2, axis=-1))))


def in_upper_half_space_group(m: VahlenMatrix, tol: float = 1e-10) -> bool:
    """Entries built from e_1..e_{n-1} and pseudo-determinant one."""
    top = 1 << (m.n - 1)
    idx = np.arange(1 << m.n) & top != 0
    if any(np.max(np.abs(getattr(m, k)[idx])) > tol for k in "abcd"):
        return False
    try:
        return abs(_real_pseudo_det(m, tol) - 1.0) <= tol
    except VahlenError:
        return False


def hyper_conformal_pullback(m: VahlenMatrix, f: Callable, x) -> np.ndarray:
    """(cx+d)^-1 f(M<x>) (x c~ + d~), which keeps hypermonogenic fields so."""
    if not in_upper_half_space_group(m):
        raise VahlenError("matrix must lie in the special Vahlen group of R^(n-1)")
    x = np.asarray(x, dtype=float)
    if np.any(x[..., -1] <= 0):
        raise VahlenError("point must lie in the upper half-space")
    g = _denominator(m, x)
    right = gp(vec_to_mv(x), reverse(m.c)) + reverse(m.d)
    val = np.asarray(f(moebius_apply(m, x)), dtype=float)
    return gp(gp(_clifford_group_inverse(g), val), right)


def generators(n: int, upper: bool = False) -> list[VahlenMatrix]:
    """T_{+-e_i} and J; with ``upper`` only the e_1..e_{n-1} translations."""
    k = n - 1 if upper else n
    out = []
    for i in range(k):
        e = np.zeros(n)
        e[i] = 1.0
        out += [VahlenMatrix.translation(e), VahlenMatrix.translation(-e)]
    out.append(VahlenMatrix.inversion(n))
    return out


def random_word(rng: np.random.Generator, n: int, length: int, upper: bool = False) -> VahlenMatrix:
    """Product of ``length`` random generators (translations and J)."""
    gens = generators(n, upper)
    m = VahlenMatrix.identity(n)
    for _ in range(length):
        m = compose(m, gens[rng.integers(len(gens))])
    return m
