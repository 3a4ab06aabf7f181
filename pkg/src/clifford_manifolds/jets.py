"""Truncated multivariate Taylor polynomials with Clifford coefficients.

A :class:`Jet` stores, for every multi-index ``alpha`` with ``|alpha| <= order``,
the Taylor coefficient ``d^alpha f(x) / alpha!`` of a field
``f: R^n -> Cl_n`` at a base point.  Arithmetic on jets propagates exact
derivatives (forward/Taylor mode), so closed-form kernels written in terms of
jet operations yield machine-precision partial derivatives.

Coefficient arrays have shape ``(..., M, 2**n)`` where ``M`` is the number of
monomials; leading axes are batch axes and broadcast like numpy arrays.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from .algebra import gp, tables, vec_to_mv

MAX_ORDER = 4


class JetSingularityError(ArithmeticError):
    """A non-smooth primitive was hit (power of a vanishing scalar jet)."""


@functools.lru_cache(maxsize=None)
def monomials(nvars: int, order: int):
    """Multi-indices of total degree <= order, graded then reverse-lex."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"jet order {order} outside 0..{MAX_ORDER}")
    exps = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for c in combo:
                e[c] += 1
            exps.append(tuple(e))
    index = {e: i for i, e in enumerate(exps)}
    ii, jj, kk = [], [], []
    for i, a in enumerate(exps):
        for j, b in enumerate(exps):
            s = tuple(x + y for x, y in zip(a, b))
            k = index.get(s)
            if k is not None:
                ii.append(i)
                jj.append(j)
                kk.append(k)
    ii, jj, kk = (np.array(v, dtype=int) for v in (ii, jj, kk))
    scatter = np.zeros((len(exps), len(ii)))
    scatter[kk, np.arange(len(ii))] = 1.0
    fact = np.array([math.prod(math.factorial(x) for x in e) for e in exps], dtype=float)
    degree = np.array([sum(e) for e in exps])
    return {
        "exps": exps,
        "index": index,
        "i": ii,
        "j": jj,
        "scatter": scatter,
        "factorial": fact,
        "degree": degree,
    }


class Jet:
    """Taylor jet of a Clifford-valued field.

    ``scalar_only`` marks jets whose values lie in the real line; products
    with such jets skip the Clifford product.
    """

    __array_priority__ = 1000

    def __init__(self, coeffs, nvars: int, order: int, scalar_only: bool = False):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.nvars = nvars
        self.order = order
        self.scalar_only = scalar_only
        self._mono = monomials(nvars, order)
        if self.coeffs.shape[-2] != len(self._mono["exps"]):
            raise ValueError("coefficient array does not match monomial count")

    # construction -----------------------------------------------------
    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        """The identity field x -> x expanded at ``x`` (vector-valued)."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        mono = monomials(n, order)
        c = np.zeros(x.shape[:-1] + (len(mono["exps"]), 1 << n))
        c[..., 0, :] = vec_to_mv(x)
        if order >= 1:
            for i in range(n):
                e = [0] * n
                e[i] = 1
                c[..., mono["index"][tuple(e)], 1 << i] = 1.0
        return cls(c, n, order)

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        mono = monomials(nvars, order)
        c = np.zeros(value.shape[:-1] + (len(mono["exps"]), value.shape[-1]))
        c[..., 0, :] = value
        return cls(c, nvars, order, scalar_only=bool(np.all(value[..., 1:] == 0)))

    def _like(self, coeffs, scalar_only=False) -> "Jet":
        return Jet(coeffs, self.nvars, self.order, scalar_only)

    # access -------------------------------------------------------------
    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0, :]

    def partial(self, alpha) -> np.ndarray:
        """Mixed partial derivative d^alpha f at the base point."""
        alpha = tuple(int(a) for a in alpha)
        k = self._mono["index"].get(alpha)
        if k is None:
            raise ValueError(f"multi-index {alpha} exceeds jet order {self.order}")
        return self.coeffs[..., k, :] * self._mono["factorial"][k]

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.nvars != self.nvars or other.order != self.order:
                raise ValueError("incompatible jets")
            return other
        other = np.asarray(other, dtype=float)
        if other.ndim == 0 or other.shape[-1] != self.coeffs.shape[-1]:
            # real scalar (possibly batched)
            val = np.zeros(np.shape(other) + (self.coeffs.shape[-1],))
            val[..., 0] = other
            return Jet.constant(val, self.nvars, self.order)
        return Jet.constant(other, self.nvars, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return self._like(self.coeffs + o.coeffs, self.scalar_only and o.scalar_only)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs, self.scalar_only)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return self._like(self.coeffs * float(other), self.scalar_only)
        return _jet_product(self, self._coerce(other))

    def __rmul__(self, other):
        if np.isscalar(other):
            return self._like(self.coeffs * float(other), self.scalar_only)
        return _jet_product(self._coerce(other), self)

    def __truediv__(self, other):
        if np.isscalar(other):
            return self._like(self.coeffs / float(other), self.scalar_only)
        o = self._coerce(other)
        if not o.scalar_only:
            raise TypeError("jets divide only by scalar-valued jets")
        return self * o.spow(-1.0)

    # scalar primitives ------------------------------------------------
    def scalar_part(self) -> "Jet":
        c = np.zeros_like(self.coeffs)
        c[..., 0] = self.coeffs[..., 0]
        return self._like(c, True)

    def norm2(self) -> "Jet":
        """Sum of squared coefficients, a scalar jet (= |x|^2 on vectors)."""
        m = self._mono
        prod = self.coeffs[..., m["i"], :] * self.coeffs[..., m["j"], :]
        s = np.einsum("kt,...tb->...k", m["scatter"], prod)
        c = np.zeros_like(self.coeffs)
        c[..., 0] = s
        return self._like(c, True)

    def spow(self, alpha: float) -> "Jet":
        """u**alpha of a scalar jet via its binomial series about u(x)."""
        if not self.scalar_only:
            raise TypeError("spow needs a scalar-valued jet")
        u = self.coeffs[..., 0]
        u0 = u[..., :1]
        if np.any(np.abs(u0) < 1e-300) or (alpha != int(alpha) and np.any(u0 < 0)):
            raise JetSingularityError("power of a vanishing/negative scalar jet")
        t = u / u0
        t[..., 0] = 0.0
        m = self._mono
        acc = np.zeros_like(u)
        acc[..., 0] = 1.0
        term = acc.copy()
        for k in range(1, self.order + 1):
            term = _scalar_conv(term, t, m)
            acc = acc + _gen_binom(alpha, k) * term
        c = np.zeros_like(self.coeffs)
        c[..., 0] = acc * u0 ** alpha
        return self._like(c, True)

    def sqrt(self) -> "Jet":
        return self.spow(0.5)

    def involution(self, kind: str) -> "Jet":
        t = tables(self.coeffs.shape[-1].bit_length() - 1)
        return self._like(self.coeffs * t[kind], self.scalar_only)

    def vinv(self) -> "Jet":
        """Inverse -v/|v|^2 of a vector-valued jet."""
        return -(self * self.norm2().spow(-1.0))


def _gen_binom(alpha: float, k: int) -> float:
    """alpha choose k for real alpha."""
    return math.prod(alpha - i for i in range(k)) / math.factorial(k)


def _scalar_conv(a, b, m):
    return np.einsum("kt,...t->...k", m["scatter"], a[..., m["i"]] * b[..., m["j"]])


def _jet_product(a: Jet, b: Jet) -> Jet:
    m = a._mono
    A = a.coeffs[..., m["i"], :]
    B = b.coeffs[..., m["j"], :]
    if a.scalar_only:
        prod = A[..., :1] * B
    elif b.scalar_only:
        prod = A * B[..., :1]
    else:
        prod = gp(A, B)
    c = np.einsum("kt,...tb->...kb", m["scatter"], prod)
    return Jet(c, a.nvars, a.order, a.scalar_only and b.scalar_only)


def taylor_jet(f, x, order: int) -> Jet:
    """Expand ``f`` (written with jet arithmetic) at the point ``x``.

    ``f`` receives the identity jet of the position variable and must return
    a :class:`Jet`.  Partial derivatives come out exact up to rounding.
    """
    out = f(Jet.variable(x, order))
    if not isinstance(out, Jet):
        raise TypeError("field did not return a Jet; use jet arithmetic inside f")
    return out


def jet_dirac(jet: Jet) -> np.ndarray:
    """Sum_i e_i d_i f at the base point from a jet of order >= 1."""
    n = jet.nvars
    out = 0.0
    for i in range(n):
        e = np.zeros(1 << n)
        e[1 << i] = 1.0
        alpha = [0] * n
        alpha[i] = 1
        out = out + gp(e, jet.partial(alpha))
    return out


def jet_laplace(jet: Jet) -> np.ndarray:
    n = jet.nvars
    out = 0.0
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 2
        out = out + jet.partial(alpha)
    return out
