"""Surface quadrature and Cauchy/Green reproduction formulas.

Reproduction formulas are evaluated as plain quadrature sums
``(1/omega_n) sum_j w_j K(x_j, y) n(x_j) f(x_j)``.  The Cauchy kernel is used
in the orientation E(x - y) = -G(x - y) = (y - x)/|x - y|^n, for which the
constant function reproduces itself with an outward normal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi

from .algebra import gp, star, vec_to_mv
from .kernels import cauchy_G, green_H
from .periodization import (
    HopfParams,
    Lattice,
    PreconditionError,
    TruncationPolicy,
    hopf_series,
    hyper_cot_series,
    lattice_sum,
)

Field = Callable[[np.ndarray], np.ndarray]
THEOREMS = ("euclid_cauchy", "hopf_cauchy", "hopf_green", "hopf_hyper", "torus_green_4pt", "cylinder_hyper")


class IntegralError(ValueError):
    """Unsupported surface, evaluation point or theorem."""


def omega(n: int) -> float:
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass
class SurfaceQuadrature:
    """Nodes, unit outward normals and positive surface weights."""

    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def n(self) -> int:
        return self.nodes.shape[-1]

    def area(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=(0, 0))

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "nodes": self.nodes.tolist(),
            "normals": self.normals.tolist(),
            "weights": self.weights.tolist(),
        }


def sphere_quadrature(center, radius: float, order: int, n: int) -> SurfaceQuadrature:
    """Product rule in hyperspherical angles.

    Each polar angle with measure sin^k(phi) d(phi) uses an ``order``-point
    Gauss-Jacobi rule in cos(phi) (Gauss-Legendre for k = 1); the azimuth uses
    a ``2 * order``-point trapezoid rule.
    """
    if n not in (3, 4, 5):
        raise IntegralError(f"sphere quadrature supports n in 3..5, got {n}")
    if order < 4:
        raise IntegralError("quadrature order must be >= 4")
    if radius <= 0:
        raise IntegralError("radius must be positive")
    center = np.asarray(center, dtype=float)
    if center.shape != (n,):
        raise IntegralError(f"center must have shape ({n},)")
    rules = []
    for i in range(n - 2):
        k = n - 2 - i
        a = (k - 1) / 2
        t, w = roots_jacobi(order, a, a)
        rules.append((np.arccos(t), w))
    nphi = 2 * order
    rules.append((2 * np.pi * (np.arange(nphi) + 0.5) / nphi, np.full(nphi, 2 * np.pi / nphi)))
    angles = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    weights = np.ones_like(angles[0])
    for i, r in enumerate(rules):
        shape = [1] * len(rules)
        shape[i] = -1
        weights = weights * r[1].reshape(shape)
    dirs = np.empty(angles[0].shape + (n,))
    s = np.ones_like(angles[0])
    for i, a in enumerate(angles):
        dirs[..., i] = s * np.cos(a)
        s = s * np.sin(a)
    dirs[..., n - 1] = s
    dirs = dirs.reshape(-1, n)
    return SurfaceQuadrature(
        center + radius * dirs,
        dirs,
        weights.ravel() * radius ** (n - 1),
        {"type": "sphere", "center": center.tolist(), "radius": float(radius), "order": int(order)},
    )


def _coarser(surf: SurfaceQuadrature) -> SurfaceQuadrature | None:
    d = surf.descriptor
    if d.get("type") != "sphere" or d["order"] <= 4:
        return None
    return sphere_quadrature(d["center"], d["radius"], max(4, (2 * d["order"]) // 3), surf.n)


@dataclass
class ReproductionReport:
    theorem: str
    params: dict
    reproduced_value: np.ndarray
    reference_value: np.ndarray | None
    abs_error: float | None
    tolerance_budget: dict
    readings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def conv(v):
            return None if v is None else np.asarray(v).tolist()

        return {
            "theorem": self.theorem,
            "params": self.params,
            "reproduced_value": conv(self.reproduced_value),
            "reference_value": conv(self.reference_value),
            "abs_error": self.abs_error,
            "tolerance_budget": self.tolerance_budget,
            "readings": {k: conv(v) for k, v in self.readings.items()},
        }


def _hopf_gradient_orbit(x, y, m: float, K: int) -> tuple[np.ndarray, float]:
    """Orbit sums of H and of E' = D_x H / (n - 2) with matching truncation.

    Phi(x) = sum_k m^{k(n-2)/2} H(m^k x - y),
    E'(x)  = -sum_k m^{kn/2} G(m^k x - y),   k = -K..K.
    """
    n = x.shape[-1]
    ks = np.arange(-K, K + 1).astype(float)
    mk = (m**ks)[:, None, None]
    z = mk * x - y
    phi = np.einsum("k,k...->...", m ** (ks * (n - 2) / 2), green_H(z))
    grad = -np.einsum("k,k...->...", m ** (ks * n / 2), cauchy_G(z))
    tail = float(
        np.max(np.linalg.norm(cauchy_G(z[-1]), axis=-1)) * m ** (K * n / 2)
        + np.max(np.linalg.norm(cauchy_G(z[0]), axis=-1)) * m ** (-K * n / 2)
    )
    return phi, grad, tail


def _torus_green_pair(x, anchors, signs, L: Lattice, K: TruncationPolicy):
    """Four-point harmonic kernel and E' = D_x Phi / (n - 2), same truncation."""
    n = x.shape[-1]

    def term(p):
        out = np.zeros(p.shape[:-1] + (2 << n,))
        for s, a in zip(signs, anchors):
            d = p - a
            out[..., : 1 << n] += s * green_H(d)
            out[..., 1 << n:] -= s * cauchy_G(d)
        return out

    pol = TruncationPolicy(K.max_shell, float("inf"), "none", K.shape)
    # Phi and E' are stacked on the coefficient axis and summed in one pass
    res = lattice_sum(term, x, L, pol, decay=n, parity=0)
    both = res.value
    return both[..., : 1 << n], both[..., 1 << n:], res.diagnostics["cauchy_diff"]


def torus_harmonic_field(anchors, L: Lattice, K: TruncationPolicy = TruncationPolicy(8)):
    """Synthetic toroidal harmonic field from a four-point kernel and its D f.

    Returns callables ``(f, df)`` sharing one truncation, so ``df`` is the
    exact Dirac derivative of the truncated ``f``.
    """
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    n = A.shape[-1]

    def both(x):
        phi, grad, _ = _torus_green_pair(np.asarray(x, dtype=float), A, (1.0, 1.0, -1.0, -1.0), L, K)
        return phi, grad * (n - 2)

    return (lambda x: both(x)[0]), (lambda x: both(x)[1])


def _green_integrand(surf, phi, grad, f, df):
    n = surf.n
    nrm = vec_to_mv(surf.normals)
    fx = np.asarray(f(surf.nodes), dtype=float)
    dfx = np.asarray(df(surf.nodes), dtype=float)
    return gp(gp(grad, nrm), fx) - gp(gp(phi, nrm), dfx) / (n - 2)


def _evaluate(theorem, surf, y, f, df, f_star, params) -> tuple[dict, float]:
    n = surf.n
    om = omega(n)
    x = surf.nodes
    nrm = vec_to_mv(surf.normals)
    w = surf.weights
    if theorem == "euclid_cauchy":
        ker = -cauchy_G(x - y)
        val = surf.integrate(gp(gp(ker, nrm), f(x))) / om
        return {"value": val}, 0.0
    if theorem == "hopf_cauchy":
        hp = HopfParams(int(params.get("m", 2)))
        res = hopf_series(x, y, hp, "G", TruncationPolicy(int(params.get("max_shell", 25))),
                          literal=bool(params.get("literal_sign", False)))
        fx = np.asarray(f(x), dtype=float)
        val = surf.integrate(gp(gp(-res.value, nrm), fx)) / om
        trunc = res.tail_estimate * float(w @ np.linalg.norm(fx, axis=-1)) / om
        return {"value": val}, trunc
    if theorem == "hopf_green":
        if df is None:
            raise IntegralError("hopf_green needs df = D f")
        phi, grad, tail = _hopf_gradient_orbit(x, y, float(params.get("m", 2)), int(params.get("max_shell", 25)))
        val = surf.integrate(_green_integrand(surf, phi, grad, f, df)) / om
        return {"value": val}, tail * surf.area() / om
    if theorem == "torus_green_4pt":
        if df is None:
            raise IntegralError("torus_green_4pt needs df = D f")
        L = params["lattice"]
        if L.k != n:
            raise IntegralError("torus_green_4pt needs a full-rank lattice")
        aux = np.atleast_2d(np.asarray(params["anchors"], dtype=float))
        if aux.shape != (3, n):
            raise IntegralError("torus_green_4pt needs three auxiliary anchors b2, b3, b4")
        anchors = np.vstack([y, aux])
        _check_outside(surf, aux, L)
        K = params.get("truncation", TruncationPolicy(8))
        phi, grad, guard = _torus_green_pair(x, anchors, (1.0, 1.0, -1.0, -1.0), L, K)
        val = surf.integrate(_green_integrand(surf, phi, grad, f, df)) / om
        return {"value": val}, guard * surf.area() / om
    if theorem in ("hopf_hyper", "cylinder_hyper"):
        if np.any(x[:, -1] <= 0) or y[-1] <= 0:
            raise IntegralError("hypermonogenic formulas need the surface in the upper half-space")
        if theorem == "hopf_hyper":
            hp = HopfParams(int(params.get("m", 2)))
            pol = TruncationPolicy(int(params.get("max_shell", 25)))
            r1 = hopf_series(x, y, hp, "h1", pol)
            r2 = hopf_series(x, y, hp, "h2", pol)
        else:
            L = params["lattice"]
            pol = params.get("truncation", TruncationPolicy(8))
            r1 = hyper_cot_series(x, y, L, "c1", pol)
            r2 = hyper_cot_series(x, y, L, "c2", pol)
        fx = np.asarray(f(x), dtype=float)
        fs = star(fx) if f_star is None else np.asarray(f_star(x), dtype=float)
        i1 = surf.integrate(gp(gp(r1.value, nrm), fx))
        i2 = surf.integrate(gp(gp(r2.value, star(nrm)), fs))
        pre = 2.0 ** (n - 2) * y[-1] ** (n - 2) / om
        readings = {"both": pre * (i1 - i2), "literal": pre * i1 - i2}
        mass = float(w @ np.linalg.norm(fx, axis=-1))
        trunc = pre * (r1.tail_estimate + r2.tail_estimate) * mass
        return readings, trunc
    raise IntegralError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")


def _check_outside(surf: SurfaceQuadrature, points, L: Lattice) -> None:
    d = surf.descriptor
    if d.get("type") != "sphere":
        return
    c, r = np.asarray(d["center"]), d["radius"]
    shifts = np.array(np.meshgrid(*[np.arange(-1, 2)] * L.k, indexing="ij")).reshape(L.k, -1).T @ L.basis
    for a in points:
        if np.min(np.linalg.norm(a + shifts - c, axis=-1)) <= r:
            raise IntegralError("auxiliary anchors must lie outside the integration sphere")


def _inside(surf: SurfaceQuadrature, y) -> bool:
    d = surf.descriptor
    if d.get("type") == "sphere":
        return float(np.linalg.norm(y - np.asarray(d["center"]))) < d["radius"]
    return True


def reproduce_integral(
    theorem: str,
    f: Field,
    surf: SurfaceQuadrature,
    y,
    params: dict | None = None,
    df: Field | None = None,
    f_star: Field | None = None,
) -> ReproductionReport:
    """Evaluate the reproduction formula ``theorem`` at an interior point ``y``.

    Parameters
    ----------
    theorem : str
        One of ``euclid_cauchy``, ``hopf_cauchy``, ``hopf_green``,
        ``hopf_hyper``, ``torus_green_4pt``, ``cylinder_hyper``.
    f : callable
        Field evaluated at the nodes (batched), returning ``(N, 2**n)``.
    params : dict, optional
        ``m`` and ``max_shell`` for Hopf kernels; ``lattice``,
        ``truncation`` and (torus) ``anchors`` for lattice kernels;
        ``reading`` in {both, literal} selects the prefactor reading of the
        hypermonogenic formulas (both readings are always reported).
    df, f_star : callable, optional
        D f for the Green formulas and f* for the hypermonogenic ones
        (default: the star involution of f).

    Notes
    -----
    Green formulas are evaluated as
    ``(1/omega) sum w [E'(x) n f(x) - Phi(x) n Df(x) / (n-2)]`` with
    E' = D_x Phi / (n - 2), which reproduces every harmonic f exactly for any
    truncation of Phi.  The hypermonogenic formulas are
    ``c (I1 - I2)`` (both) or ``c I1 - I2`` (literal) with
    c = 2^{n-2} y_n^{n-2} / omega_n.
    """
    params = dict(params or {})
    y = np.asarray(y, dtype=float)
    if y.shape != (surf.n,):
        raise IntegralError(f"y must have shape ({surf.n},)")
    if not _inside(surf, y):
        raise IntegralError("y must lie strictly inside the surface")
    if np.min(np.linalg.norm(surf.nodes - y, axis=-1)) < 1e-9:
        raise IntegralError("y lies on a quadrature node")
    try:
        readings, trunc = _evaluate(theorem, surf, y, f, df, f_star, params)
        coarse = _coarser(surf)
        quad = float("nan")
        if coarse is not None:
            rc, _ = _evaluate(theorem, coarse, y, f, df, f_star, params)
            key = params.get("reading", "both") if "both" in readings else "value"
            quad = float(np.linalg.norm(readings[key] - rc[key]))
    except PreconditionError as exc:
        raise IntegralError(str(exc)) from None
    key = params.get("reading", "both") if "both" in readings else "value"
    if key not in readings:
        raise IntegralError(f"unknown reading {key!r}")
    value = readings[key]
    ref = None
    err = None
    try:
        ref = np.asarray(f(y[None]), dtype=float)[0]
        err = float(np.linalg.norm(value - ref))
    except (ArithmeticError, ValueError):
        pass
    shown = {k: v for k, v in params.items() if isinstance(v, (int, float, str, bool))}
    return ReproductionReport(
        theorem,
        shown,
        value,
        ref,
        err,
        {"quadrature": quad, "truncation": float(trunc)},
        readings if len(readings) > 1 else {},
    )


__all__ = [
    "THEOREMS",
    "IntegralError",
    "ReproductionReport",
    "SurfaceQuadrature",
    "omega",
    "reproduce_integral",
    "sphere_quadrature",
    "torus_harmonic_field",
]
