"""Mittag-Leffler construction and Laurent fitting on cylinders and tori."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import gp
from .periodization import (
    Lattice,
    PreconditionError,
    TruncationPolicy,
    _check_anchors,
    cot_series,
    epsilon_series,
    torus_kernel,
)

MAX_ORDER = 4
COND_LIMIT = 1e8


class LaurentFitError(ArithmeticError):
    """The least-squares fit is ill-conditioned."""


@dataclass(frozen=True)
class Singularity:
    """Point ``a`` carrying ``eps_m(x - a) * coefficient``."""

    point: np.ndarray
    m: tuple
    coefficient: np.ndarray

    @classmethod
    def make(cls, point, m, coefficient) -> "Singularity":
        return cls(np.asarray(point, dtype=float), tuple(int(v) for v in m),
                   np.asarray(coefficient, dtype=float))


def _eps(mi, z, L: Lattice, kind: str, K: TruncationPolicy, aux) -> np.ndarray:
    if sum(mi) == 0 and L.k == L.n:
        if kind == "monogenic":
            if aux is None or len(aux) < 1:
                raise PreconditionError("torus monogenic poles need an auxiliary point b")
            # torus_kernel works with the anchor as a shift of the argument
            return torus_kernel(z, [np.zeros(L.n), aux[0]], L, "two_point_monogenic", K).value
        if aux is None or len(aux) < 3:
            raise PreconditionError("torus harmonic poles need auxiliary points b2, b3, b4")
        return torus_kernel(z, [np.zeros(L.n), *aux[:3]], L, "four_point_harmonic", K).value
    return epsilon_series(mi, z, L, kind, K).value


def mittag_leffler_construct(
    singularities: Sequence[Singularity],
    L: Lattice,
    kind: str = "monogenic",
    K: TruncationPolicy = TruncationPolicy(),
    aux=None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Field x -> sum_i eps_{m_i}(x - a_i) c_i with Clifford coefficients on the right.

    On a torus (k = n) a pole with m = 0 uses the two-point monogenic kernel
    with auxiliary point ``aux[0]`` or the four-point harmonic kernel with
    auxiliary points ``aux[:3]``; the auxiliary singularities cancel when the
    corresponding coefficients sum to zero.
    """
    sings = list(singularities)
    if not sings:
        raise PreconditionError("no singularities given")
    for s in sings:
        if len(s.m) != L.n or any(v < 0 for v in s.m):
            raise PreconditionError("multi-index must have n nonnegative entries")
        if sum(s.m) > MAX_ORDER:
            raise PreconditionError(f"pole order {sum(s.m)} exceeds the supported {MAX_ORDER}")
    pts = np.unique(np.stack([s.point for s in sings]), axis=0)
    _check_anchors(pts, L)
    aux = None if aux is None else np.atleast_2d(np.asarray(aux, dtype=float))
    if aux is not None:
        _check_anchors(np.vstack([pts, aux]), L)

    def field_(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (1 << L.n,))
        for s in sings:
            e = _eps(s.m, x - s.point, L, kind, K, None if aux is None else aux - s.point)
            out = out + gp(e, s.coefficient)
        return out

    return field_


def reduced_indices(n: int, max_order: int, kind: str) -> list[tuple]:
    """Multi-indices spanning the eps-series modulo the kernel's own PDE.

    Right monogenicity gives sum_i eps_{m+e_i} e_i = 0, so m_n = 0 suffices;
    harmonicity gives sum_i eps_{m+2e_i} = 0, so m_n <= 1 suffices.
    """
    cap = 0 if kind == "monogenic" else 1
    out = []
    for order in range(max_order + 1):
        for mi in itertools.product(range(order + 1), repeat=n):
            if sum(mi) == order and mi[-1] <= cap:
                out.append(mi)
    return out


def _monomials(n: int, degree: int) -> list[tuple]:
    return [b for d in range(degree + 1) for b in itertools.product(range(d + 1), repeat=n) if sum(b) == d]


@dataclass
class LaurentFit:
    coefficients: dict
    regular: dict
    condition: float
    residual: dict = field(default_factory=dict)
    ratio: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "coefficients": {",".join(map(str, k)): v.tolist() for k, v in self.coefficients.items()},
            "condition": self.condition,
            "residual": self.residual,
            "ratio": self.ratio,
        }


def laurent_fit(
    f: Callable[[np.ndarray], np.ndarray],
    a,
    max_order: int,
    L: Lattice,
    kind: str = "monogenic",
    K: TruncationPolicy = TruncationPolicy(),
    radii: Sequence[float] = (0.04, 0.06, 0.08, 0.1),
    poly_degree: int = 4,
    n_dirs: int = 200,
    seed: int = 0,
) -> LaurentFit:
    """Least-squares fit of principal-part coefficients on spheres around ``a``.

    The model is sum_m eps_m(x - a) c_m + sum_beta (x - a)^beta d_beta over
    the reduced multi-indices (see :func:`reduced_indices`) and scaled
    monomials up to ``poly_degree``.  Columns are normalized before solving;
    the condition number of the normalized design is reported and a value
    above 1e8 raises :class:`LaurentFitError`.  The remainder f - fit is
    evaluated on the innermost and outermost spheres; ``ratio`` =
    inner / outer stays bounded when no principal part was missed.
    """
    a = np.asarray(a, dtype=float)
    n = L.n
    B = 1 << n
    if not 0 <= max_order <= MAX_ORDER:
        raise PreconditionError(f"max_order must lie in 0..{MAX_ORDER}")
    radii = sorted(float(r) for r in radii)
    if len(radii) < 2 or radii[0] <= 0:
        raise PreconditionError("need at least two positive radii")
    # random directions avoid the aliasing of product grids
    dirs = np.random.default_rng(seed).normal(size=(n_dirs, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.concatenate([a + r * dirs for r in radii])
    P = len(pts)
    fx = np.asarray(f(pts), dtype=float)
    idx = reduced_indices(n, max_order, kind)
    mons = _monomials(n, poly_degree)
    eye = np.eye(B)
    cols = []
    for mi in idx:
        e = _eps(mi, pts - a, L, kind, K, _default_aux(L, n))
        for b in range(B):
            cols.append(gp(e, eye[b]).ravel())
    rho = radii[-1]
    for beta in mons:
        mono = np.prod(((pts - a) / rho) ** np.asarray(beta), axis=-1)
        for b in range(B):
            c = np.zeros((P, B))
            c[:, b] = mono
            cols.append(c.ravel())
    X = np.stack(cols, axis=1)
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    Xn = X / scale
    sv = np.linalg.svd(Xn, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if cond > COND_LIMIT:
        raise LaurentFitError(f"Laurent fit condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    theta, *_ = np.linalg.lstsq(Xn, fx.ravel(), rcond=None)
    theta = theta / scale
    ns = len(idx) * B
    coeffs = {mi: theta[i * B:(i + 1) * B] for i, mi in enumerate(idx)}
    regular = {beta: theta[ns + i * B: ns + (i + 1) * B] for i, beta in enumerate(mons)}
    rem = (fx.ravel() - X @ theta).reshape(len(radii), -1, B)
    inner = float(np.max(np.linalg.norm(rem[0], axis=-1)))
    outer = float(np.max(np.linalg.norm(rem[-1], axis=-1)))
    return LaurentFit(
        coeffs,
        regular,
        cond,
        {"inner": inner, "outer": outer},
        inner / outer if outer > 0 else float("nan"),
    )


def _default_aux(L: Lattice, n: int):
    if L.k != L.n:
        return None
    # generic auxiliary points for torus kernels, far from small spheres at 0
    base = np.array([0.5, 0.5, 0.5, 0.5, 0.5])[:n]
    return np.stack([base, base + np.r_[0.21, np.zeros(n - 1)], base + np.r_[0.0, 0.27, np.zeros(n - 2)]]) @ L.basis


__all__ = [
    "LaurentFit",
    "LaurentFitError",
    "Singularity",
    "laurent_fit",
    "mittag_leffler_construct",
    "reduced_indices",
]
