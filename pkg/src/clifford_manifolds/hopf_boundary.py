"""Boundary operators of half the Hopf manifold H+(R^3) / {m^k}.

The boundary is the annulus 1 <= r < m of the plane x_3 = 0 with its two
circles identified.  Meshes are uniform in (log r, theta) with midpoint
nodes.  Operators act on Clifford-valued boundary data; because the Cauchy
kernel times the normal is an even element, every operator is stored as a
real block matrix over the even blades {1, e12, e13, e23} and acts on odd
data through f = h e_3 (left operators commute with right multiplication).

Two discretizations of the Cauchy transform H' are provided.

``spectral``
    Exact action of the transform on the Mellin-Fourier modes
    r^{-1 + i tau} e^{i kappa theta} resolved by the mesh.  In these modes
    the transform is 1/2 minus half the complex Riesz symbol
    c(tau, k) = A_k / A_{k+1} (k >= 0), -A_|k| / A_{|k|-1} (k < 0) with
    A_j = Gamma((j + 1 + i tau)/2) / Gamma((j + 1 - i tau)/2), applied on the
    (1 -+ i e12)/2 components with a shift k -> k +- 1.  The unresolved
    Nyquist log-radial mode is assigned the nearest involution.
``nystrom``
    Punctured trapezoid rule for the principal value with the Hopf Cauchy
    kernel.  Kept as an independent cross-check; its idempotency defect does
    not vanish under refinement.
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds
from scipy.special import loggamma

from .algebra import basis_blade, gp, left_matrix, vec_to_mv
from .integrals import IntegralError, SurfaceQuadrature, omega
from .kernels import kernel_partial
from .periodization import HopfParams, TruncationPolicy, hopf_series

EVEN_BLADES = (0, 3, 5, 6)
SZEGO_VARIANTS = ("as_printed", "resolvent")


class BoundaryWarning(UserWarning):
    """Accuracy warning (evaluation point close to the boundary mesh)."""


def half_hopf_boundary_mesh(m: int, res_r: int, res_theta: int, n: int = 3) -> SurfaceQuadrature:
    """Midpoint mesh of the fundamental annulus 1 <= r < m in x_n = 0.

    Node (p, q) has index ``p * res_theta + q``; weights are exact cell areas
    (r_{p+1}^2 - r_p^2) dtheta / 2 and normals are -e_n.
    """
    if n != 3:
        raise IntegralError("half-Hopf meshes are implemented for n = 3")
    if int(m) != m or m < 2:
        raise IntegralError("Hopf base m must be an integer >= 2")
    if res_r < 1 or res_theta < 1:
        raise IntegralError("resolutions must be positive")
    L = np.log(m)
    du, dth = L / res_r, 2 * np.pi / res_theta
    u = (np.arange(res_r) + 0.5) * du
    th = (np.arange(res_theta) + 0.5) * dth
    U, T = np.meshgrid(u, th, indexing="ij")
    R = np.exp(U)
    nodes = np.stack([R * np.cos(T), R * np.sin(T), np.zeros_like(R)], axis=-1).reshape(-1, 3)
    weights = (np.exp(2 * U) * np.sinh(du) * dth).ravel()
    normals = np.tile([0.0, 0.0, -1.0], (len(weights), 1))
    return SurfaceQuadrature(
        nodes, normals, weights,
        {"type": "half_hopf", "m": int(m), "res_r": int(res_r), "res_theta": int(res_theta)},
    )


def identified_pairs(surf: SurfaceQuadrature) -> tuple[np.ndarray, np.ndarray]:
    """Indices of nodes next to r = 1 and their partners next to r = m.

    Moving outward across the outer circle from node (res_r - 1, q) lands on
    node (0, q) scaled by m.
    """
    d = _half_hopf(surf)
    q = np.arange(d["res_theta"])
    return q, (d["res_r"] - 1) * d["res_theta"] + q


def _half_hopf(surf: SurfaceQuadrature) -> dict:
    d = surf.descriptor
    if d.get("type") != "half_hopf":
        raise IntegralError("operation needs a half-Hopf boundary mesh")
    return d


@dataclass
class OperatorMatrix:
    """Real block matrix acting on even-blade coefficients at every node.

    ``matrix[i*B + a, j*B + b]`` couples blade ``blades[b]`` at node j to
    blade ``blades[a]`` at node i, with B = len(blades).
    """

    matrix: np.ndarray
    weights: np.ndarray
    blades: tuple = EVEN_BLADES
    n: int = 3
    diagnostics: dict = field(default_factory=dict)

    @property
    def nodes(self) -> int:
        return len(self.weights)

    def _w(self) -> np.ndarray:
        return np.repeat(self.weights, len(self.blades))

    def adjoint(self) -> "OperatorMatrix":
        """Adjoint in L^2(S, dsigma) with the real coefficient inner product."""
        w = self._w()
        # one ratio per entry keeps the diagonal factor exactly 1
        return OperatorMatrix(self.matrix.T * (w[None, :] / w[:, None]), self.weights, self.blades, self.n)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.matrix @ other.matrix, self.weights, self.blades, self.n)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.matrix + other.matrix, self.weights, self.blades, self.n)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.matrix - other.matrix, self.weights, self.blades, self.n)

    def identity(self) -> "OperatorMatrix":
        return OperatorMatrix(np.eye(len(self.matrix)), self.weights, self.blades, self.n)

    def apply_even(self, coeffs: np.ndarray) -> np.ndarray:
        """Apply to even-blade coefficients of shape (nodes, B)."""
        return (self.matrix @ np.asarray(coeffs, dtype=float).reshape(-1)).reshape(self.nodes, -1)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Apply to full Clifford data of shape (nodes, 2**n)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.nodes, 1 << self.n):
            raise IntegralError(f"data must have shape ({self.nodes}, {1 << self.n})")
        en = basis_blade(self.n, self.n)
        even = list(self.blades)
        odd = [b for b in range(1 << self.n) if b not in self.blades]
        out = np.zeros_like(values)
        out[:, even] = self.apply_even(values[:, even])
        od = np.zeros_like(values)
        od[:, odd] = values[:, odd]
        h = gp(od, -en)  # od = h e_n with h even
        hm = np.zeros_like(values)
        hm[:, even] = self.apply_even(h[:, even])
        out += gp(hm, en)
        return out

    def weighted_norm(self, square_minus_self: bool = False) -> float:
        """Spectral norm in L^2(dsigma); with the flag, the norm of M^2 - M."""
        d = np.sqrt(self._w())
        M = self.matrix

        def q(v):
            return M @ (M @ v) - M @ v if square_minus_self else M @ v

        def qt(v):
            return M.T @ (M.T @ v) - M.T @ v if square_minus_self else M.T @ v

        size = len(M)
        if size <= 64:
            A = np.diag(d) @ (M @ M - M if square_minus_self else M) / d[None, :]
            return float(np.linalg.norm(A, 2))
        op = LinearOperator(
            (size, size),
            matvec=lambda v: d * q(np.ravel(v) / d),
            rmatvec=lambda v: qt(d * np.ravel(v)) / d,
            dtype=float,
        )
        v0 = np.cos(np.arange(size) * 0.7) + 1.0
        s = svds(op, k=1, return_singular_vectors=False, v0=v0, tol=1e-10)
        return float(s[0])

    def idempotency_defect(self) -> float:
        return self.weighted_norm(square_minus_self=True)

    def to_dict(self) -> dict:
        return {
            "blades": list(self.blades),
            "n": self.n,
            "weights": self.weights.tolist(),
            "matrix": self.matrix.tolist(),
        }


def _even_left(a: np.ndarray) -> np.ndarray:
    return left_matrix(a)[..., list(EVEN_BLADES), :][..., :, list(EVEN_BLADES)]


def riesz_symbol(k, tau) -> np.ndarray:
    """Complex Riesz multiplier on r^{-1+i tau} e^{i k theta} (integer k)."""
    k, tau = np.broadcast_arrays(np.asarray(k), np.asarray(tau, dtype=float))

    def A(j):
        return np.exp(loggamma((j + 1 + 1j * tau) / 2) - loggamma((j + 1 - 1j * tau) / 2))

    ak = np.abs(k)
    pos = A(ak) / A(ak + 1)
    neg = -A(ak) / A(np.maximum(ak - 1, 0))
    return np.where(k >= 0, pos, neg)


@functools.lru_cache(maxsize=4)
def _spectral_core(m: int, nr: int, nt: int) -> np.ndarray:
    """Involution S (g = r f coordinates) with H_spec = (I + S)/2."""
    Lg = np.log(m)
    u = (np.arange(nr) + 0.5) * Lg / nr
    th = (np.arange(nt) + 0.5) * 2 * np.pi / nt
    tau = 2 * np.pi * np.arange(-(nr // 2), nr - nr // 2) / Lg
    kap = np.arange(-(nt // 2), nt - nt // 2) + 0.5
    Eu = np.exp(1j * np.outer(u, tau))
    Et = np.exp(1j * np.outer(th, kap))
    T, Kp = np.meshgrid(tau, kap, indexing="ij")
    cp = riesz_symbol(np.rint(Kp - 0.5).astype(int), T)
    cm = riesz_symbol(np.rint(-(Kp + 0.5)).astype(int), T)
    W = np.kron(Eu, Et)
    Wi = np.kron(np.linalg.inv(Eu), np.linalg.inv(Et))
    ph = np.tile(np.exp(0.5j * th), nr)
    I4 = _even_left(basis_blade(3, 1, 2))
    E13 = _even_left(basis_blade(3, 1, 3))
    Pp = (np.eye(4) - 1j * I4) / 2
    Pm = (np.eye(4) + 1j * I4) / 2
    S = np.zeros((4 * nr * nt, 4 * nr * nt))
    for P, s, cc in ((Pp, 1, cp), (Pm, -1, cm)):
        Ac = (ph**s)[:, None] * (W @ (cc.ravel()[:, None] * Wi)) * (ph**s)[None, :]
        B = P @ E13
        S += np.kron(Ac.real, B.real) - np.kron(Ac.imag, B.imag)
        del Ac
    if nr % 2 == 0:
        # the alternating log-radial mode is invariant but unresolved
        V = np.zeros((len(S), 4 * nt))
        p = np.arange(nr)
        for q in range(nt):
            for c in range(4):
                V[(p * nt + q) * 4 + c, q * 4 + c] = (-1.0) ** p / np.sqrt(nr)
        SN = V.T @ S @ V
        w, Q = np.linalg.eigh(0.5 * (SN + SN.T))
        S += V @ ((Q * np.where(w >= 0, 1.0, -1.0)) @ Q.T - SN) @ V.T
    S = 0.5 * (S + S.T)
    S.setflags(write=False)
    return S


def _spectral_matrix(surf: SurfaceQuadrature, m: int) -> np.ndarray:
    d = _half_hopf(surf)
    if d["m"] != m:
        raise IntegralError("mesh and Hopf parameters disagree on m")
    nr, nt = d["res_r"], d["res_theta"]
    if nr % 2 or nt % 2:
        raise IntegralError("spectral discretization needs even resolutions")
    S = _spectral_core(int(m), nr, nt)
    # H' = (I - S)/2 in g = r f coordinates, conjugated to f coordinates
    r = np.repeat(np.linalg.norm(surf.nodes, axis=-1), 4)
    return (0.5 * (np.eye(len(S)) - S)) * r[None, :] / r[:, None]


def _nystrom_matrix(surf: SurfaceQuadrature, m: HopfParams, K: TruncationPolicy) -> np.ndarray:
    x = surf.nodes
    N = len(x)
    if N > 1 and np.min(np.linalg.norm(x[:, None] - x[None], axis=-1) + np.eye(N) * 1e9) < 1e-12:
        raise IntegralError("degenerate mesh: repeated nodes")
    nrm = vec_to_mv(surf.normals)
    om = omega(surf.n)
    M = 0.5 * np.eye(4 * N)
    idx = np.arange(N)
    for i in range(N):
        others = idx != i
        if not others.any():
            continue
        ker = -hopf_series(x[others], x[i], m, "G", K).value
        blocks = _even_left(gp(ker, nrm[others])) * (surf.weights[others] / om)[:, None, None]
        M[4 * i:4 * i + 4].reshape(4, N, 4)[:, others, :] += np.moveaxis(blocks, 0, 1)
    return M


def cauchy_transform_matrix(
    surf: SurfaceQuadrature,
    m: HopfParams = HopfParams(),
    K: TruncationPolicy = TruncationPolicy(25),
    method: str = "spectral",
) -> OperatorMatrix:
    """Discretized Cauchy transform H' = 1/2 I + C on a half-Hopf mesh.

    ``method="spectral"`` needs a half-Hopf mesh with even resolutions and
    ignores ``K`` (no series truncation is involved); ``method="nystrom"``
    works on any mesh in the plane x_n = 0 with the truncated Hopf kernel.
    """
    if surf.n != 3:
        raise IntegralError("boundary operators are implemented for n = 3")
    if method == "spectral":
        M = _spectral_matrix(surf, m.m)
    elif method == "nystrom":
        M = _nystrom_matrix(surf, m, K)
    else:
        raise IntegralError(f"unknown method {method!r}")
    return OperatorMatrix(M, surf.weights.copy(), EVEN_BLADES, 3, {"method": method})


def kerzman_stein_matrix(
    surf: SurfaceQuadrature,
    m: HopfParams = HopfParams(),
    K: TruncationPolicy = TruncationPolicy(25),
    method: str = "spectral",
    H: OperatorMatrix | None = None,
) -> OperatorMatrix:
    """A' = H' - H'*, skew-adjoint by construction."""
    H = cauchy_transform_matrix(surf, m, K, method) if H is None else H
    A = H - H.adjoint()
    A.diagnostics = {"method": H.diagnostics.get("method")}
    return A


@dataclass
class SzegoResult:
    P: OperatorMatrix
    variant: str
    defect: float


def szego_projection_matrix(
    surf: SurfaceQuadrature,
    m: HopfParams = HopfParams(),
    K: TruncationPolicy = TruncationPolicy(25),
    variant: str = "resolvent",
    method: str = "spectral",
    H: OperatorMatrix | None = None,
) -> SzegoResult:
    """Szego projection from the Kerzman-Stein operator.

    ``resolvent``: H' (I + A')^-1; ``as_printed``: H' (I + A').
    """
    if variant not in SZEGO_VARIANTS:
        raise IntegralError(f"unknown Szego variant {variant!r}")
    H = cauchy_transform_matrix(surf, m, K, method) if H is None else H
    A = kerzman_stein_matrix(surf, m, K, H=H)
    IA = np.eye(len(A.matrix)) + A.matrix
    if variant == "as_printed":
        P = H.matrix @ IA
    else:
        # A is skew-adjoint, so I + A has spectrum on 1 + iR and is invertible;
        # a failed solve can only come from a corrupted matrix
        try:
            P = np.linalg.solve(IA.T, H.matrix.T).T
        except np.linalg.LinAlgError:
            raise IntegralError("I + A is numerically singular") from None
        if not np.all(np.isfinite(P)):
            raise IntegralError("I + A is numerically singular")
    op = OperatorMatrix(P, H.weights, H.blades, H.n, {"variant": variant})
    return SzegoResult(op, variant, op.idempotency_defect())


def hardy_project(
    g: np.ndarray,
    surf: SurfaceQuadrature,
    m: HopfParams = HopfParams(),
    K: TruncationPolicy = TruncationPolicy(25),
    H: OperatorMatrix | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(g_plus, g_minus) with g_plus = H' g and g_minus = g - g_plus."""
    g = np.asarray(g, dtype=float)
    H = cauchy_transform_matrix(surf, m, K) if H is None else H
    gp_ = H.apply(g)
    return gp_, g - gp_


def half_hopf_kernel(
    x, w, kind: str, m: HopfParams = HopfParams(), K: TruncationPolicy = TruncationPolicy(25)
) -> np.ndarray:
    """Szego, Poisson and Bergman kernels of half the Hopf manifold.

    szego: G_H(x, w) e_n; poisson: 2 Sc(szego); bergman_monogenic:
    2 d/dw_n szego (exact jets, summed over the dilation orbit);
    bergman_harmonic: Sc(bergman_monogenic).  ``x`` may be batched.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    n = x.shape[-1]
    if np.any(np.abs(x[..., -1]) > 1e-12):
        raise IntegralError("x must lie on the boundary x_n = 0")
    if w[-1] <= 0:
        raise IntegralError("w must lie in the upper half-space")
    en = basis_blade(n, n)
    if kind in ("szego", "poisson"):
        S = gp(hopf_series(x, w, m, "G", K).value, en)
        if kind == "szego":
            return S
        out = np.zeros_like(S)
        out[..., 0] = 2 * S[..., 0]
        return out
    if kind in ("bergman_monogenic", "bergman_harmonic"):
        mm = float(m.m)
        ks = np.arange(-K.max_shell, K.max_shell + 1).astype(float)
        z = (mm**ks).reshape((-1,) + (1,) * x.ndim) * x - w
        mi = (0,) * (n - 1) + (1,)
        dG = -kernel_partial("G", mi, z)  # d/dw_n G(m^k x - w)
        wts = (mm ** (ks * (n - 1) / 2)).reshape((-1,) + (1,) * x.ndim)
        B = 2 * gp((wts * dG).sum(axis=0), en)
        if kind == "bergman_monogenic":
            return B
        out = np.zeros_like(B)
        out[..., 0] = B[..., 0]
        return out
    raise IntegralError(f"unknown kernel kind {kind!r}")


def dirichlet_solve(
    g: np.ndarray,
    surf: SurfaceQuadrature,
    m: HopfParams = HopfParams(),
    K: TruncationPolicy = TruncationPolicy(25),
    eval_points=None,
) -> np.ndarray:
    """Poisson extension u(w) = (1/omega) sum_j w_j P(x_j, w) g_j.

    ``g`` holds scalar (N,) or Clifford (N, 2**n) section values at the
    nodes.  Points closer to the boundary than two mesh spacings trigger a
    :class:`BoundaryWarning`.
    """
    d = _half_hopf(surf)
    g = np.asarray(g, dtype=float)
    if g.shape[0] != len(surf):
        raise IntegralError("boundary data does not match the mesh")
    pts = np.atleast_2d(np.asarray(eval_points, dtype=float))
    spacing = max(np.log(d["m"]) / d["res_r"] * d["m"], 2 * np.pi * d["m"] / d["res_theta"])
    if np.any(pts[:, -1] < 2 * spacing):
        warnings.warn("evaluation point within two mesh spacings of the boundary", BoundaryWarning,
                      stacklevel=2)
    om = omega(surf.n)
    out = []
    for w in pts:
        P = half_hopf_kernel(surf.nodes, w, "poisson", m, K)[:, 0]
        out.append(np.tensordot(surf.weights * P, g, axes=(0, 0)) / om)
    return np.asarray(out)


__all__ = [
    "EVEN_BLADES",
    "BoundaryWarning",
    "OperatorMatrix",
    "SzegoResult",
    "cauchy_transform_matrix",
    "dirichlet_solve",
    "half_hopf_boundary_mesh",
    "half_hopf_kernel",
    "hardy_project",
    "identified_pairs",
    "kerzman_stein_matrix",
    "riesz_symbol",
    "szego_projection_matrix",
]
