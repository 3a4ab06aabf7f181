"""Closed-form Euclidean kernels and their exact partial derivatives.

Every kernel accepts either a numpy array of points (shape ``(..., n)``) or a
:class:`~clifford_manifolds.jets.Jet` of the position variable, and returns a
coefficient array ``(..., 2**n)`` or a jet respectively.
"""
from __future__ import annotations

import numpy as np

from .algebra import star, vec_to_mv
from .jets import Jet, taylor_jet

SINGULAR_RADIUS = 1e-12


class KernelSingularityError(ArithmeticError):
    """Kernel evaluated on (or within 1e-12 of) its singular set."""


def _check(r, what: str):
    if np.any(r < SINGULAR_RADIUS):
        raise KernelSingularityError(f"{what}: argument within {SINGULAR_RADIUS:g} of singularity")


def _as_points(z):
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        raise ValueError("points need a trailing coordinate axis")
    return z


def cauchy_G(z):
    """Euclidean Cauchy kernel G(z) = z / |z|^n (vector valued)."""
    if isinstance(z, Jet):
        _check(np.sqrt(z.norm2().value[..., 0]), "cauchy_G")
        return z * z.norm2().spow(-z.nvars / 2)
    z = _as_points(z)
    n = z.shape[-1]
    r = np.linalg.norm(z, axis=-1, keepdims=True)
    _check(r, "cauchy_G")
    return vec_to_mv(z / r**n)


def cauchy_G_vec(z) -> np.ndarray:
    """G(z) as plain vector components (..., n); cheaper inside lattice sums."""
    z = _as_points(z)
    n = z.shape[-1]
    r = np.linalg.norm(z, axis=-1, keepdims=True)
    _check(r, "cauchy_G")
    return z / r**n


def green_H(z):
    """Harmonic Green kernel H(z) = 1 / |z|^(n-2), n >= 3 (scalar valued)."""
    if isinstance(z, Jet):
        n = z.nvars
        if n < 3:
            raise ValueError("green_H needs n >= 3")
        _check(np.sqrt(z.norm2().value[..., 0]), "green_H")
        return z.norm2().spow(-(n - 2) / 2)
    z = _as_points(z)
    n = z.shape[-1]
    if n < 3:
        raise ValueError("green_H needs n >= 3")
    r = np.linalg.norm(z, axis=-1)
    _check(r, "green_H")
    out = np.zeros(z.shape[:-1] + (1 << n,))
    out[..., 0] = r ** (2 - n)
    return out


def green_H_scalar(z) -> np.ndarray:
    z = _as_points(z)
    n = z.shape[-1]
    if n < 3:
        raise ValueError("green_H needs n >= 3")
    r = np.linalg.norm(z, axis=-1)
    _check(r, "green_H")
    return r ** (2 - n)


def _star_vec(y):
    y = np.array(y, dtype=float)
    y[..., -1] = -y[..., -1]
    return y


def hyper_kernel(x, y, kind: str = "p1"):
    """Hypermonogenic kernels p1, p2 of the upper half-space.

    p1(x, y) = (x - y)^-1 / (|x - y|^(n-2) |x - y*|^(n-2))
    p2(x, y) = (x* - y)^-1 / (|x - y|^(n-2) |x* - y|^(n-2))

    ``x`` may be a jet; ``y`` is a fixed point (array).
    """
    if kind not in ("p1", "p2"):
        raise ValueError(f"unknown hypermonogenic kernel {kind!r}")
    y = _as_points(y)
    if isinstance(x, Jet):
        n = x.nvars
        yv = vec_to_mv(y)
        ys = vec_to_mv(_star_vec(y))
        d = x - yv
        if kind == "p1":
            head, other = d, x - ys
        else:
            xs = x.involution("star")
            head, other = xs - yv, xs - yv
        for j in (d, head, other):
            _check(np.sqrt(j.norm2().value[..., 0]), f"hyper_kernel {kind}")
        e = -(n - 2) / 2
        return head.vinv() * d.norm2().spow(e) * other.norm2().spow(e)
    x = _as_points(x)
    n = x.shape[-1]
    d = x - y
    if kind == "p1":
        head = d
        other = x - _star_vec(y)
    else:
        head = _star_vec(x) - y
        other = head
    rd = np.linalg.norm(d, axis=-1, keepdims=True)
    rh = np.linalg.norm(head, axis=-1, keepdims=True)
    ro = np.linalg.norm(other, axis=-1, keepdims=True)
    _check(np.minimum(np.minimum(rd, rh), ro), f"hyper_kernel {kind}")
    inv = -head / rh**2
    return vec_to_mv(inv / (rd ** (n - 2) * ro ** (n - 2)))


def kernel_partial(kind: str, m, z) -> np.ndarray:
    """Exact mixed partial d^m of G or H at the points ``z`` (Taylor mode).

    ``m`` is a multi-index with |m| <= 4.  Works batched over leading axes
    of ``z``.
    """
    m = tuple(int(v) for v in m)
    z = _as_points(z)
    if len(m) != z.shape[-1]:
        raise ValueError("multi-index length must equal the dimension")
    if any(v < 0 for v in m):
        raise ValueError("multi-index entries must be nonnegative")
    order = sum(m)
    if order > 4:
        raise ValueError(f"derivative order {order} > 4 unsupported")
    fn = {"G": cauchy_G, "H": green_H}.get(kind)
    if fn is None:
        raise ValueError(f"unknown kernel {kind!r}")
    return taylor_jet(fn, z, order).partial(m)


def star_points(x):
    return _star_vec(x)


def star_mv(a):
    return star(a)
