"""Dense real Clifford algebra Cl_n with e_i e_j + e_j e_i = -2 delta_ij.

Multivectors are stored as length ``2**n`` coefficient arrays indexed by blade
bitmask (bit ``i-1`` set means generator ``e_i`` is present, blades in
increasing index order).  The low-level functions in this module operate on
raw arrays of shape ``(..., 2**n)`` and broadcast over leading axes; the
:class:`Multivector` class is a thin immutable wrapper for single elements.

Vectors of R^n are plain arrays of shape ``(..., n)``.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

MAX_DIM = 8


class DimensionError(ValueError):
    """Operands live in Clifford algebras of different dimension."""


class SingularElementError(ArithmeticError):
    """Element has no inverse (zero vector, singular multivector...)."""


def _reorder_sign(a: int, b: int) -> int:
    # number of transpositions needed to bring e_A e_B into canonical order
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


@functools.lru_cache(maxsize=None)
def tables(n: int):
    """Product and involution tables for Cl_n (cached per dimension)."""
    if not 1 <= n <= MAX_DIM:
        raise DimensionError(f"dimension n={n} outside supported range 1..{MAX_DIM}")
    size = 1 << n
    blades = np.arange(size)
    # out[k] = sum_i a[i] * b[i ^ k] * sign(i, i ^ k)
    partner = blades[:, None] ^ blades[None, :]          # [k, i] -> i ^ k
    sign = np.empty((size, size))
    for k in range(size):
        for i in range(size):
            j = i ^ k
            metric = -1 if bin(i & j).count("1") & 1 else 1
            sign[k, i] = _reorder_sign(i, j) * metric
    grade = np.array([bin(b).count("1") for b in range(size)])
    rev = np.where((grade * (grade - 1) // 2) % 2, -1.0, 1.0)
    conj = np.where((grade * (grade + 1) // 2) % 2, -1.0, 1.0)
    star = np.where(blades & (1 << (n - 1)), -1.0, 1.0)
    vec_blades = np.array([1 << i for i in range(n)])
    for arr in (partner, sign, grade, rev, conj, star, vec_blades):
        arr.setflags(write=False)
    return {
        "size": size,
        "partner": partner,
        "sign": sign,
        "grade": grade,
        "reverse": rev,
        "conjugate": conj,
        "star": star,
        "vector_blades": vec_blades,
    }


def dim_of(a: np.ndarray) -> int:
    size = a.shape[-1]
    n = size.bit_length() - 1
    if size != 1 << n or n < 1:
        raise DimensionError(f"last axis of length {size} is not a power of two")
    return n


def gp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product of coefficient arrays, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"cannot multiply Cl_{dim_of(a)} by Cl_{dim_of(b)}")
    t = tables(dim_of(a))
    return np.einsum("...i,ki,...ki->...k", a, t["sign"], b[..., t["partner"]])


def involution(a: np.ndarray, kind: str) -> np.ndarray:
    """Apply ``reverse``, ``conjugate`` or ``star`` bladewise."""
    a = np.asarray(a, dtype=float)
    t = tables(dim_of(a))
    try:
        return a * t[kind]
    except KeyError:
        raise ValueError(f"unknown involution {kind!r}") from None


def reverse(a):
    return involution(a, "reverse")


def conjugate(a):
    return involution(a, "conjugate")


def star(a):
    return involution(a, "star")


def scalar_part(a: np.ndarray) -> np.ndarray:
    return np.asarray(a)[..., 0]


def mv_norm(a: np.ndarray) -> np.ndarray:
    """Euclidean norm of the coefficient vector (= |x| on vectors)."""
    # scale first so tiny or huge coefficients do not under/overflow when squared
    m = np.max(np.abs(a), axis=-1, keepdims=True)
    s = np.where(m > 0, m, 1.0)
    return m[..., 0] * np.sqrt(np.sum(np.square(a / s), axis=-1))


def scalar(s, n: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape + (1 << n,))
    out[..., 0] = s
    return out


def basis_blade(n: int, *indices: int) -> np.ndarray:
    """Coefficients of e_{i1} e_{i2} ... (1-based generator indices)."""
    out = scalar(1.0, n)
    for i in indices:
        if not 1 <= i <= n:
            raise DimensionError(f"generator e_{i} not in Cl_{n}")
        e = np.zeros(1 << n)
        e[1 << (i - 1)] = 1.0
        out = gp(out, e)
    return out


def vec_to_mv(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (1 << n,))
    out[..., tables(n)["vector_blades"]] = x
    return out


def mv_to_vec(a: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Vector part of ``a``; with ``tol`` given, reject a non-vector residue."""
    a = np.asarray(a, dtype=float)
    vb = tables(dim_of(a))["vector_blades"]
    if tol is not None:
        rest = a.copy()
        rest[..., vb] = 0.0
        residue = np.max(np.abs(rest)) if rest.size else 0.0
        if residue > tol * max(1.0, float(np.max(np.abs(a)))):
            raise ValueError(f"multivector is not a vector (residue {residue:.3g})")
    return a[..., vb].copy()


def vector_inverse(x: np.ndarray) -> np.ndarray:
    """Inverse -x/|x|^2 of a nonzero vector (array of shape (..., n))."""
    x = np.asarray(x, dtype=float)
    nrm2 = np.sum(x * x, axis=-1, keepdims=True)
    if np.any(nrm2 == 0.0):
        raise SingularElementError("zero vector has no inverse")
    return -x / nrm2


def left_matrix(a: np.ndarray) -> np.ndarray:
    """Real matrix L with L @ b == gp(a, b) for every b."""
    a = np.asarray(a, dtype=float)
    n = dim_of(a)
    eye = np.eye(1 << n)
    return np.moveaxis(gp(a[..., None, :], eye), -2, -1)


def mv_inverse(a: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Two-sided inverse of a single multivector via its left-multiplication matrix."""
    a = np.asarray(a, dtype=float)
    n = dim_of(a)
    L = left_matrix(a)
    one = scalar(1.0, n)
    try:
        inv = np.linalg.solve(L, np.broadcast_to(one, a.shape)[..., None])[..., 0]
    except np.linalg.LinAlgError:
        raise SingularElementError("multivector is not invertible") from None
    check = gp(a, inv) - one
    if np.max(np.abs(check)) > max(tol, 1e-9) * max(1.0, np.max(np.abs(inv))):
        raise SingularElementError("multivector is not invertible")
    return inv


@dataclass(frozen=True, eq=False)
class Multivector:
    """Immutable element of Cl_n.

    Supports ``+``, ``-``, ``*`` (geometric product, or scaling by a real) and
    ``/`` by a real.  Equality is deliberately not overloaded; use
    :meth:`allclose`.
    """

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if not 2 <= self.n <= MAX_DIM:
            raise DimensionError(f"dimension n={self.n} outside 2..{MAX_DIM}")
        if c.shape != (1 << self.n,):
            raise DimensionError(f"expected {1 << self.n} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Multivector":
        return cls(n, np.zeros(1 << n))

    @classmethod
    def from_scalar(cls, s: float, n: int) -> "Multivector":
        return cls(n, scalar(s, n))

    @classmethod
    def blade(cls, n: int, *indices: int) -> "Multivector":
        return cls(n, basis_blade(n, *indices))

    @classmethod
    def from_vector(cls, x: Iterable[float]) -> "Multivector":
        x = np.asarray(list(x) if not isinstance(x, np.ndarray) else x, dtype=float)
        return cls(x.shape[-1], vec_to_mv(x))

    @classmethod
    def from_dict(cls, data: dict) -> "Multivector":
        n = int(data["n"])
        c = np.zeros(1 << n)
        for key, val in data.get("coeffs", {}).items():
            idx = int(key)
            if not 0 <= idx < 1 << n:
                raise ValueError(f"blade index {idx} out of range for n={n}")
            c[idx] = float(val)
        return cls(n, c)

    @classmethod
    def from_json(cls, text: str) -> "Multivector":
        return cls.from_dict(json.loads(text))

    # conversions --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "coeffs": {str(i): float(v) for i, v in enumerate(self.coeffs) if v != 0.0},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_vector(self, tol: float | None = None) -> np.ndarray:
        return mv_to_vec(self.coeffs, tol)

    def is_vector(self, tol: float = 0.0) -> bool:
        rest = self.coeffs.copy()
        rest[tables(self.n)["vector_blades"]] = 0.0
        return bool(np.all(np.abs(rest) <= tol))

    # algebra ------------------------------------------------------------
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Multivector):
            if other.n != self.n:
                raise DimensionError(f"Cl_{self.n} vs Cl_{other.n}")
            return other.coeffs
        if np.isscalar(other):
            return scalar(float(other), self.n)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return Multivector(self.n, self.coeffs + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Multivector(self.n, self.coeffs - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return Multivector(self.n, o - self.coeffs)

    def __neg__(self):
        return Multivector(self.n, -self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs * float(other))
        o = self._coerce(other)
        return Multivector(self.n, gp(self.coeffs, o))

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.n, self.coeffs * float(other))
        o = self._coerce(other)
        return Multivector(self.n, gp(o, self.coeffs))

    def __truediv__(self, other):
        if not np.isscalar(other):
            return self * Multivector(self.n, mv_inverse(self._coerce(other)))
        return Multivector(self.n, self.coeffs / float(other))

    def reverse(self) -> "Multivector":
        return Multivector(self.n, reverse(self.coeffs))

    def conjugate(self) -> "Multivector":
        return Multivector(self.n, conjugate(self.coeffs))

    def star(self) -> "Multivector":
        return Multivector(self.n, star(self.coeffs))

    def inverse(self) -> "Multivector":
        return Multivector(self.n, mv_inverse(self.coeffs))

    @property
    def scalar(self) -> float:
        return float(self.coeffs[0])

    def norm(self) -> float:
        return float(mv_norm(self.coeffs))

    def allclose(self, other, tol: float = 1e-12) -> bool:
        o = self._coerce(other)
        return bool(np.max(np.abs(self.coeffs - o)) <= tol)

    def __repr__(self) -> str:
        terms = []
        for idx, v in enumerate(self.coeffs):
            if v == 0.0:
                continue
            name = "".join(f"e{i + 1}" for i in range(self.n) if idx >> i & 1) or "1"
            terms.append(f"{v:+.6g}*{name}" if name != "1" else f"{v:+.6g}")
        return f"Multivector(n={self.n}, " + (" ".join(terms) or "0") + ")"


MultivectorLike = Union[Multivector, np.ndarray]


def as_coeffs(a) -> np.ndarray:
    return a.coeffs if isinstance(a, Multivector) else np.asarray(a, dtype=float)


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    if a.n != b.n:
        raise DimensionError(f"Cl_{a.n} vs Cl_{b.n}")
    return a * b


def norm(a: MultivectorLike) -> float:
    return float(mv_norm(as_coeffs(a)))
