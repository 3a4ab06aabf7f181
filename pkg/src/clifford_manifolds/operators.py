"""Finite-difference Dirac, Laplace and hyperbolic Dirac operators.

Fields are callables mapping points of shape ``(..., n)`` to Clifford
coefficient arrays of shape ``(..., 2**n)``.  All stencils are fourth-order
central differences and are evaluated in one batched call per operator.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .algebra import basis_blade, gp

Field = Callable[[np.ndarray], np.ndarray]

DEFAULT_H = 1e-3
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.arange(-2, 3)


@dataclass(frozen=True)
class OperatorKind:
    """``name`` in {dirac, laplace, hyperbolic_dirac}; ``variant`` for the last.

    ``paper_literal`` is x_n D f + n Sc(-e_n f); ``leutwiler`` is
    D f + ((n-2)/x_n) Q(f) with f = P + Q e_n.
    """

    name: str
    variant: str | None = None

    def __post_init__(self):
        if self.name not in ("dirac", "laplace", "hyperbolic_dirac"):
            raise ValueError(f"unknown operator {self.name!r}")
        if self.name == "hyperbolic_dirac":
            if self.variant is None:
                object.__setattr__(self, "variant", "paper_literal")
            if self.variant not in ("paper_literal", "leutwiler"):
                raise ValueError(f"unknown hyperbolic variant {self.variant!r}")
        elif self.variant is not None:
            raise ValueError("variant only applies to hyperbolic_dirac")

    @classmethod
    def parse(cls, text: str) -> "OperatorKind":
        name, _, variant = text.partition(":")
        return cls(name, variant or None)

    def __str__(self) -> str:
        return self.name + (f":{self.variant}" if self.variant else "")


DIRAC = OperatorKind("dirac")
LAPLACE = OperatorKind("laplace")
HYPERBOLIC = OperatorKind("hyperbolic_dirac", "paper_literal")
LEUTWILER = OperatorKind("hyperbolic_dirac", "leutwiler")


class StencilError(ValueError):
    """The stencil would cross x_n = 0 or evaluation failed."""


def _stencil_values(f: Field, x: np.ndarray, h: float) -> np.ndarray:
    """f at x + k h e_i, k = -2..2; shape (..., n, 5, 2**n)."""
    n = x.shape[-1]
    shifts = np.einsum("k,ij->ikj", _OFFS * h, np.eye(n))  # (n, 5, n)
    pts = x[..., None, None, :] + shifts
    vals = np.asarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise StencilError("field is not finite on the stencil")
    return vals


def partials_fd(f: Field, x, h: float = DEFAULT_H, order: int = 1) -> np.ndarray:
    """Fourth-order central first (or pure second) partials; shape (..., n, 2**n)."""
    x = np.asarray(x, dtype=float)
    vals = _stencil_values(f, x, h)
    w = _D1 / h if order == 1 else _D2 / h**2
    return np.einsum("k,...ikb->...ib", w, vals)


def _dirac_from_partials(d: np.ndarray) -> np.ndarray:
    n = d.shape[-2]
    e = np.stack([basis_blade(n, i + 1) for i in range(n)])
    return gp(e, d).sum(axis=-2)


def e_n_part(a: np.ndarray) -> np.ndarray:
    """Q with a = P + Q e_n, P and Q free of e_n."""
    a = np.asarray(a, dtype=float)
    size = a.shape[-1]
    n = size.bit_length() - 1
    top = 1 << (n - 1)
    idx = np.arange(size)
    low = idx[(idx & top) == 0]
    out = np.zeros_like(a)
    # e_A e_n has sign +1 since e_n is the last generator
    out[..., low] = a[..., low | top]
    return out


def apply_operator_fd(f: Field, x, op: OperatorKind = DIRAC, h: float = DEFAULT_H) -> np.ndarray:
    """Apply ``op`` to ``f`` at ``x`` (batched over leading axes)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if op.name == "laplace":
        return partials_fd(f, x, h, order=2).sum(axis=-2)
    if op.name == "hyperbolic_dirac" and np.any(np.abs(x[..., -1]) <= 2 * h):
        raise StencilError("hyperbolic stencil reaches the hyperplane x_n = 0")
    df = _dirac_from_partials(partials_fd(f, x, h))
    if op.name == "dirac":
        return df
    xn = x[..., -1:]
    fx = np.asarray(f(x), dtype=float)
    if op.variant == "paper_literal":
        en = basis_blade(n, n)
        out = xn * df
        out[..., 0] += n * gp(-en, fx)[..., 0]
        return out
    return df + (n - 2) / xn * e_n_part(fx)


def dirac_fd(f: Field, x, h: float = DEFAULT_H) -> np.ndarray:
    return apply_operator_fd(f, x, DIRAC, h)


def laplace_fd(f: Field, x, h: float = DEFAULT_H) -> np.ndarray:
    return apply_operator_fd(f, x, LAPLACE, h)


def right_dirac_fd(f: Field, x, h: float = DEFAULT_H) -> np.ndarray:
    """Sum_i d_i f e_i."""
    d = partials_fd(f, np.asarray(x, dtype=float), h)
    n = d.shape[-2]
    e = np.stack([basis_blade(n, i + 1) for i in range(n)])
    return gp(d, e).sum(axis=-2)


@dataclass
class ResidualReport:
    operator: str
    variant: str | None
    h: float
    max_residual: float
    worst_point: list
    n_points: int
    skipped: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def sample_region(region: dict, rng: np.random.Generator) -> np.ndarray:
    """Points from ``{"type": "annulus"|"box", ...}``.

    annulus: n, r_min, r_max, count, optional center.
    box: lo, hi (per-coordinate lists), count.
    """
    kind = region["type"]
    count = int(region["count"])
    if kind == "annulus":
        n = int(region["n"])
        d = rng.normal(size=(count, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = rng.uniform(region["r_min"], region["r_max"], size=(count, 1))
        return np.asarray(region.get("center", np.zeros(n)), dtype=float) + r * d
    if kind == "box":
        lo = np.asarray(region["lo"], dtype=float)
        hi = np.asarray(region["hi"], dtype=float)
        return lo + (hi - lo) * rng.uniform(size=(count, lo.size))
    raise ValueError(f"unknown region type {kind!r}")


def residual_scan(
    f: Field,
    op: OperatorKind,
    region,
    h: float = DEFAULT_H,
    seed: int = 0,
) -> ResidualReport:
    """Max coefficient-norm residual of ``op f`` over sampled points.

    ``region`` is either an explicit ``(count, n)`` point array or a region
    dict for :func:`sample_region`.  Points where the stencil fails are
    recorded in ``skipped``.
    """
    if isinstance(region, dict):
        pts = sample_region(region, np.random.default_rng(seed))
    else:
        pts = np.atleast_2d(np.asarray(region, dtype=float))
    res = np.full(len(pts), -np.inf)
    skipped = []
    try:
        vals = apply_operator_fd(f, pts, op, h)
        res = np.sqrt(np.sum(vals**2, axis=-1))
    except (ArithmeticError, StencilError, ValueError):
        for i, p in enumerate(pts):
            try:
                v = apply_operator_fd(f, p, op, h)
                res[i] = float(np.sqrt(np.sum(v**2)))
            except (ArithmeticError, StencilError, ValueError):
                skipped.append(p.tolist())
    k = int(np.argmax(res))
    return ResidualReport(
        operator=op.name,
        variant=op.variant,
        h=h,
        max_residual=float(res[k]) if np.isfinite(res[k]) else float("nan"),
        worst_point=pts[k].tolist(),
        n_points=len(pts),
        skipped=skipped,
    )

