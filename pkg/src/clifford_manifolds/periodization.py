"""Periodized kernels: dilation (Hopf) series and lattice cotangent series.

Every series returns a :class:`SeriesResult` carrying the partial sum, a
computable tail estimate and the number of terms.  Lattice sums run over
symmetric boxes of integer coordinates ``max|m_i| <= R`` in shell-major
order; each shell is summed with numpy and the shells are accumulated with
Kahan compensation, so results do not depend on evaluation order.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import gp, vec_to_mv, vector_inverse
from .kernels import (
    KernelSingularityError,
    cauchy_G,
    green_H,
    hyper_kernel,
    kernel_partial,
)


class TailToleranceError(ArithmeticError):
    """Tail estimate (or Cauchy guard) exceeds the requested tolerance."""


class PreconditionError(ValueError):
    """Series requested outside its convergence or validity domain."""


# -- parameter types -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice Z w_1 + ... + Z w_k in R^n with spin-split index ``l``.

    The character of a lattice point with coordinates ``(m_1..m_k)`` is
    ``(-1)**(m_1 + ... + m_l)``.
    """

    basis: np.ndarray
    l: int = 0

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        k, n = b.shape
        if k > n:
            raise PreconditionError(f"{k} period vectors in R^{n}")
        if abs(np.linalg.det(b @ b.T)) < 1e-12:
            raise PreconditionError("lattice basis is degenerate")
        if not 0 <= self.l <= k:
            raise PreconditionError(f"spin index l={self.l} outside 0..{k}")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def standard(cls, n: int, k: int, l: int = 0) -> "Lattice":
        return cls(np.eye(n)[:k], l)

    def point(self, coords) -> np.ndarray:
        return np.asarray(coords, dtype=float) @ self.basis

    def to_dict(self) -> dict:
        return {"basis": self.basis.tolist(), "l": self.l}


@dataclass(frozen=True)
class TruncationPolicy:
    """Box radius ``max_shell``, tail tolerance and summation protocol.

    pairing: ``none`` sums the full box; ``antipodal`` sums
    chi(w)[K(z+w) + K(z-w)] over the positive half box plus the w = 0 term;
    ``expanding_box`` is the plain box sum with a Cauchy guard between the
    last two radii.  ``shape`` selects sup-norm boxes or Euclidean balls
    (in integer coordinates).
    """

    max_shell: int = 8
    tail_tol: float = float("inf")
    pairing: str = "none"
    shape: str = "box"

    def __post_init__(self):
        if self.max_shell < 0:
            raise PreconditionError("max_shell must be >= 0")
        if not self.tail_tol > 0:
            raise PreconditionError("tail_tol must be positive")
        if self.pairing not in ("none", "antipodal", "expanding_box"):
            raise PreconditionError(f"unknown pairing {self.pairing!r}")
        if self.shape not in ("box", "ball"):
            raise PreconditionError(f"unknown shape {self.shape!r}")

    def with_shell(self, r: int) -> "TruncationPolicy":
        return TruncationPolicy(r, self.tail_tol, self.pairing, self.shape)


@dataclass(frozen=True)
class HopfParams:
    """Dilation base ``m`` and weight exponent ``j`` (weight m^{k(n-j)/2})."""

    m: int = 2
    j: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise PreconditionError("Hopf base m must be an integer >= 2")
        if self.j not in (1, 2):
            raise PreconditionError("weight exponent j must be 1 or 2")


@dataclass
class SeriesResult:
    value: np.ndarray
    tail_estimate: float
    terms: int
    diagnostics: dict = field(default_factory=dict)


def spin_character(coords, l: int) -> np.ndarray:
    """(-1)^(m_1 + ... + m_l) for integer coordinates (last axis)."""
    c = np.asarray(coords)
    if not np.all(np.equal(np.mod(c, 1), 0)):
        raise ValueError("lattice coordinates must be integers")
    s = np.sum(c[..., :l], axis=-1).astype(int)
    return np.where(s % 2 == 0, 1.0, -1.0)


# -- Hopf series -----------------------------------------------------------


def hopf_weight(x, m: float, j: int) -> float:
    """Automorphy factor relating a section at x and m x: f(x) = m^{(n-j)/2} f(m x)."""
    n = np.asarray(x).shape[-1]
    return m ** ((n - j) / 2)


def _hopf_orbit_terms(x, y, m, K, kind, literal):
    n = x.shape[-1]
    ex = (slice(None),) + (None,) * x.ndim  # broadcast k over batched x
    ks = np.arange(-K, 1)
    kp = np.arange(1, K + 1)
    xi, yi = vector_inverse(x), vector_inverse(y)
    mk = (m ** ks.astype(float))[ex]
    mkp = (m ** (-kp.astype(float)))[ex]
    if kind == "G":
        near = (m ** (ks * (n - 1) / 2))[ex] * cauchy_G(mk * x - y)
        inner = (m ** (kp * (1 - n) / 2))[ex] * cauchy_G(mkp * xi - yi)
        sign = 1.0 if literal else -1.0
        far = sign * gp(gp(cauchy_G(x), inner), cauchy_G(y))
        ratio = m ** (-(n - 1) / 2)
    elif kind == "H":
        near = (m ** (ks * (n - 2) / 2))[ex] * green_H(mk * x - y)
        inner = (m ** (-kp * (n - 2) / 2))[ex] * green_H(mkp * xi - yi)
        far = inner * (green_H(x)[..., :1] * green_H(y)[0])
        ratio = m ** (-(n - 2) / 2)
    else:
        p = "p1" if kind == "h1" else "p2"
        near = (m ** (ks / 2))[ex] * hyper_kernel(mk * x, y, p)
        inner = (m ** (-kp / 2))[ex] * hyper_kernel(mkp * xi, yi, p)
        far = gp(gp(vec_to_mv(xi), inner), vec_to_mv(yi))
        ratio = m ** (-0.5)
    return near, far, ratio


def hopf_series(
    x,
    y,
    params: HopfParams = HopfParams(),
    kind: str = "G",
    K: TruncationPolicy = TruncationPolicy(25),
    literal: bool = False,
) -> SeriesResult:
    """Dilation periodization of G, H, p1 or p2 (kinds G, H, h1, h2).

    The k <= 0 part is summed directly and the k >= 1 part through the
    inversion sandwich that keeps every term bounded.  For kind G the
    sandwich carries a minus sign (it then equals the orbit sum term by term);
    ``literal=True`` uses a plus sign instead, which breaks dilation
    covariance and is kept only for comparison.

    Parameters
    ----------
    x : array_like, shape (..., n)
        Point(s), ideally inside the fundamental annulus 1 <= |.| < m.
    y : array_like, shape (n,)
        Fixed second point.
    K : TruncationPolicy
        ``max_shell`` is the number of dilation steps on each side.

    Returns
    -------
    SeriesResult
        ``tail_estimate`` is the geometric remainder of both half-orbits.
    """
    if kind not in ("G", "H", "h1", "h2"):
        raise PreconditionError(f"unknown Hopf series kind {kind!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1]
    if kind == "H" and n < 3:
        raise PreconditionError("harmonic series needs n >= 3")
    if kind in ("h1", "h2") and (np.any(x[..., -1] <= 0) or y[-1] <= 0):
        raise PreconditionError("hypermonogenic series need x_n, y_n > 0")
    m = float(params.m)
    warn = {}
    for name, v in (("x", x), ("y", y)):
        r = np.linalg.norm(v, axis=-1)
        if np.any((r < 1 - 1e-9) | (r >= m + 1e-9)):
            warn[name] = f"|{name}| outside the fundamental annulus"
    near, far, ratio = _hopf_orbit_terms(x, y, m, K.max_shell, kind, literal)
    value = near.sum(axis=0) + far.sum(axis=0)
    last = np.linalg.norm(near[0], axis=-1) + np.linalg.norm(far[-1] if len(far) else near[0], axis=-1)
    tail = float(np.max(last) * ratio / (1 - ratio))
    if tail > K.tail_tol:
        raise TailToleranceError(f"Hopf tail {tail:.3g} exceeds {K.tail_tol:.3g}")
    return SeriesResult(value, tail, len(near) + len(far), {"warnings": warn, "ratio": ratio})


def hopf_orbit_sum(x, y, m: float, K: int, kind: str = "G") -> np.ndarray:
    """Plain two-sided orbit sum, used as an independent cross-check."""
    x = np.asarray(x, dtype=float)
    m = float(m)
    n = x.shape[-1]
    ks = np.arange(-K, K + 1)
    if kind == "G":
        return ((m ** (ks * (n - 1) / 2))[:, None] * cauchy_G(m ** ks[:, None] * x - y)).sum(0)
    if kind == "H":
        return ((m ** (ks * (n - 2) / 2))[:, None] * green_H(m ** ks[:, None] * x - y)).sum(0)
    raise PreconditionError("orbit sum only for G and H")


# -- lattice enumeration ---------------------------------------------------


def box_coords(k: int, R: int) -> list[np.ndarray]:
    """Integer coordinates of the box [-R, R]^k grouped by sup-norm shell."""
    if k == 0:
        return [np.zeros((1, 0), dtype=int)]
    rng = np.arange(-R, R + 1)
    grid = np.array(list(itertools.product(rng, repeat=k)), dtype=int).reshape(-1, k)
    shell = np.max(np.abs(grid), axis=1)
    return [grid[shell == s] for s in range(R + 1)]


def ball_coords(k: int, R: int) -> list[np.ndarray]:
    """Integer coordinates with Euclidean norm <= R grouped by ceil(norm)."""
    rng = np.arange(-R, R + 1)
    grid = np.array(list(itertools.product(rng, repeat=k)), dtype=int).reshape(-1, k)
    nrm = np.sqrt(np.sum(grid**2, axis=1))
    grid = grid[nrm <= R + 1e-12]
    shell = np.ceil(np.sqrt(np.sum(grid**2, axis=1)) - 1e-12).astype(int)
    return [grid[shell == s] for s in range(R + 1)]


def positive_half(coords: np.ndarray) -> np.ndarray:
    """Rows whose first nonzero coordinate is positive."""
    if coords.size == 0:
        return coords
    nz = coords != 0
    first = np.argmax(nz, axis=1)
    lead = coords[np.arange(len(coords)), first]
    return coords[(lead > 0) & nz.any(axis=1)]


def _shells(L: Lattice, K: TruncationPolicy) -> list[np.ndarray]:
    return box_coords(L.k, K.max_shell) if K.shape == "box" else ball_coords(L.k, K.max_shell)


def _kahan(parts: Sequence[np.ndarray]) -> np.ndarray:
    s = np.zeros_like(parts[0])
    c = np.zeros_like(parts[0])
    for p in parts:
        y = p - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def _power_tail(incs: Sequence[float], R: int) -> float:
    """Remainder of a series whose increments decay like a power of R."""
    d1 = incs[-1]
    if d1 == 0.0:
        return 0.0
    if len(incs) < 3 or incs[-2] <= d1:
        return float("inf")
    q = -np.log(d1 / incs[-2]) / np.log(R / (R - 1))
    return float(d1 * R / (q - 1)) if q > 1.05 else float("inf")


def lattice_sum(
    term: Callable[[np.ndarray], np.ndarray],
    z,
    L: Lattice,
    K: TruncationPolicy,
    decay: float,
    parity: int = 0,
    subtract: Callable[[np.ndarray], np.ndarray] | None = None,
) -> SeriesResult:
    """Sum chi(w) term(z + w) over a truncated symmetric lattice region.

    Each shell is summed in antipodal pairs chi(w)[term(z+w) + term(z-w)],
    which leaves the value of the plain sum unchanged but exposes the
    cancellation of odd kernels for the tail estimate.

    Parameters
    ----------
    term : callable
        Maps points ``(..., n)`` to coefficient arrays ``(..., 2**n)``.
    z : array_like, shape (..., n)
        Evaluation point(s); tail estimates are maxima over the batch.
    decay : float
        Exponent p with |term(w)| ~ |w|^-p.
    parity : int
        -1 for odd kernels (pairs decay like |w|^-(p+1)), +1 for even
        kernels, 0 when no parity is known.
    subtract : callable, optional
        Under antipodal pairing, subtract ``2 * subtract(w)`` from every pair
        (regularization of even kernels whose plain sum diverges).

    Notes
    -----
    Absolutely convergent sums (effective decay > k) report the
    integral-comparison bound S_R * R / (p_eff - k), with S_R the absolute
    sum of the outermost paired shell.  Conditionally convergent sums with a
    spin character give the outermost shell half weight, which cancels the
    leading alternating boundary error, and report the power-law remainder
    of the averaged increments.
    """
    z = np.asarray(z, dtype=float)
    zz = z[..., None, :]
    use_sub = subtract is not None and K.pairing == "antipodal"
    parts, pair_abs = [], []
    n_terms = 0
    for coords in _shells(L, K):
        if len(coords) == 1 and not coords.any():
            v = np.asarray(term(z), dtype=float)
            parts.append(v)
            pair_abs.append(float(np.max(np.linalg.norm(v, axis=-1))))
            n_terms += 1
            continue
        pos = positive_half(coords)
        if len(pos) == 0:
            parts.append(np.zeros(z.shape[:-1] + (1 << L.n,)))
            pair_abs.append(0.0)
            continue
        w = L.point(pos)
        pair = term(zz + w) + term(zz - w)
        if use_sub:
            pair = pair - 2.0 * subtract(w)
        chi = spin_character(pos, L.l)
        parts.append(np.einsum("p,...pb->...b", chi, pair))
        pair_abs.append(float(np.max(np.sum(np.linalg.norm(pair, axis=-1), axis=-1))))
        n_terms += 2 * len(pos)
    eff = decay + 1 if parity < 0 else (decay + 2 if use_sub else decay)
    conditional = eff <= L.k
    R = K.max_shell
    if conditional and R >= 1:
        value = _kahan(parts[:-1] + [0.5 * parts[-1]])
        incs = [float(np.max(np.linalg.norm(0.5 * (parts[s] + parts[s - 1]), axis=-1)))
                for s in range(1, R + 1)]
        tail = _power_tail(incs, R)
        last_step = incs[-1]
    else:
        value = _kahan(parts)
        tail = float(pair_abs[-1] * R / (eff - L.k)) if R >= 1 else float(pair_abs[0])
        last_step = float(np.max(np.linalg.norm(parts[-1], axis=-1)))
    diag = {
        "effective_decay": eff,
        "conditional": conditional,
        "shell_abs": pair_abs[-1],
        "cauchy_diff": last_step,
    }
    if tail > K.tail_tol:
        raise TailToleranceError(f"lattice tail {tail:.3g} exceeds {K.tail_tol:.3g}")
    return SeriesResult(value, tail, n_terms, diag)


# -- cotangent and epsilon series ----------------------------------------


def _plan(L: Lattice, kind: str, K: TruncationPolicy, order: int = 0):
    """Decay exponent, parity and regularization for a (derived) cotangent sum.

    Plain sums must converge absolutely.  Antipodal pairing adds one order
    of decay for odd kernels, and two for even kernels when l = 0 and each
    pair is regularized by subtracting 2 K(w).  With a spin character
    (l >= 1) the signed shell sums gain one further order and a
    conditionally convergent sum is accepted under a Cauchy guard.
    """
    n, k = L.n, L.k
    if kind == "monogenic":
        decay, parity = n - 1 + order, (-1) ** (order + 1)
    elif kind == "harmonic":
        if n < 3:
            raise PreconditionError("harmonic series need n >= 3")
        decay, parity = n - 2 + order, (-1) ** order
    else:
        raise PreconditionError(f"unknown series kind {kind!r}")
    subtract = False
    eff = decay
    if K.pairing == "antipodal":
        if parity < 0:
            eff = decay + 1
        elif L.l == 0 and decay <= k:
            subtract, eff = True, decay + 2
    ok = decay > k if K.pairing != "antipodal" else (eff > k or (L.l >= 1 and eff + 1 > k))
    if not ok:
        raise PreconditionError(
            f"{kind} series (derivative order {order}) over a rank-{k} lattice in R^{n} "
            f"does not converge with pairing={K.pairing!r}, l={L.l}"
        )
    return decay, parity, subtract


def cot_series(z, L: Lattice, kind: str = "monogenic", K: TruncationPolicy = TruncationPolicy()) -> SeriesResult:
    """Spin-character lattice periodization of G (monogenic) or H (harmonic).

    Plain sums need k < n-1 (monogenic) or k < n-2 (harmonic).  Antipodal
    pairing extends the monogenic range to k = n-1; for the harmonic kernel
    with l = 0 each pair is regularized by subtracting 2 H(w), which extends
    the range to k = n-1 at the cost of an additive constant.
    """
    decay, parity, sub = _plan(L, kind, K)
    kern = cauchy_G if kind == "monogenic" else green_H
    return lattice_sum(kern, z, L, K, decay=decay, parity=parity, subtract=kern if sub else None)


def epsilon_series(
    mi, z, L: Lattice, kind: str = "monogenic", K: TruncationPolicy = TruncationPolicy()
) -> SeriesResult:
    """Termwise mixed partial d^m of the cotangent series.

    Each derivative adds one order of decay, so |m| >= 1 relaxes the
    convergence condition of :func:`cot_series` by |m|.
    """
    mi = tuple(int(v) for v in mi)
    if sum(mi) == 0:
        return cot_series(z, L, kind, K)
    decay, parity, sub = _plan(L, kind, K, order=sum(mi))
    name = "G" if kind == "monogenic" else "H"

    def term(p):
        return kernel_partial(name, mi, p)

    return lattice_sum(term, z, L, K, decay=decay, parity=parity, subtract=term if sub else None)


def hyper_cot_series(x, y, L: Lattice, kind: str = "c1", K: TruncationPolicy = TruncationPolicy()) -> SeriesResult:
    """Sum chi(w) p_i(x + w, y) over a lattice in span{e_1..e_{n-1}}."""
    if kind not in ("c1", "c2"):
        raise PreconditionError(f"unknown hypermonogenic series {kind!r}")
    if np.max(np.abs(L.basis[:, -1])) > 0:
        raise PreconditionError("lattice must lie in span{e_1, ..., e_{n-1}}")
    if L.k > L.n - 1:
        raise PreconditionError("hypermonogenic lattice rank must be <= n-1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x[..., -1] <= 0) or y[-1] <= 0:
        raise PreconditionError("x_n and y_n must be positive")
    p = "p1" if kind == "c1" else "p2"
    return lattice_sum(lambda q: hyper_kernel(q, y, p), x, L, K, decay=2 * L.n - 3, parity=0)


# -- torus kernels ---------------------------------------------------------


def _check_anchors(anchors, L: Lattice) -> np.ndarray:
    A = np.atleast_2d(np.asarray(anchors, dtype=float))
    for i, j in itertools.combinations(range(len(A)), 2):
        d, *_ = np.linalg.lstsq(L.basis.T, A[i] - A[j], rcond=None)
        r = np.round(d)
        if np.allclose(d, r, atol=1e-9) and np.allclose(r @ L.basis, A[i] - A[j], atol=1e-9):
            raise PreconditionError("anchors are congruent modulo the lattice")
    return A


def torus_kernel(
    x,
    anchors,
    L: Lattice,
    kind: str = "four_point_harmonic",
    K: TruncationPolicy = TruncationPolicy(),
    literal_signs: bool = False,
) -> SeriesResult:
    """Two-point monogenic or four-point harmonic kernel on a full torus (k = n).

    two_point_monogenic: sum chi(w)[G(x - a + w) - G(x - b + w)].
    four_point_harmonic: sum chi(w)[H(x-a1+w) + H(x-a2+w) - H(x-a3+w) - H(x-a4+w)].
    ``literal_signs`` gives the w = 0 terms all plus signs, which breaks
    periodicity and is kept only for comparison.  Expanding symmetric boxes
    are summed; the last averaged shell increment is the Cauchy guard.
    """
    if L.k != L.n:
        raise PreconditionError("torus kernels need a full-rank lattice (k = n)")
    A = _check_anchors(anchors, L)
    if kind == "two_point_monogenic":
        if len(A) != 2:
            raise PreconditionError("two-point kernel needs exactly 2 anchors")
        if L.l < 1:
            raise PreconditionError("two-point kernel needs spin index l >= 1")
        signs = np.array([1.0, -1.0])
        kern = cauchy_G
    elif kind == "four_point_harmonic":
        if len(A) != 4:
            raise PreconditionError("four-point kernel needs exactly 4 anchors")
        signs = np.array([1.0, 1.0, -1.0, -1.0])
        kern = green_H
    else:
        raise PreconditionError(f"unknown torus kernel {kind!r}")
    x = np.asarray(x, dtype=float)

    def term(p):
        return sum(s * kern(p - a) for s, a in zip(signs, A))

    res = lattice_sum(term, x, L, TruncationPolicy(K.max_shell, float("inf"), "none", K.shape),
                      decay=L.n, parity=0)
    if literal_signs and kind == "four_point_harmonic":
        res.value = res.value + 2 * (kern(x - A[2]) + kern(x - A[3]))
    guard = res.diagnostics["cauchy_diff"]
    if guard > K.tail_tol:
        raise TailToleranceError(f"Cauchy guard {guard:.3g} exceeds {K.tail_tol:.3g}")
    return res


# -- convergence tables ----------------------------------------------------


def convergence_table(fn: Callable[[int], SeriesResult], radii: Sequence[int]) -> str:
    """CSV (RFC 4180) with columns radius, c0..c{2^n-1}, tail_estimate, terms."""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    rows = [(r, fn(r)) for r in radii]
    size = rows[0][1].value.shape[-1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["radius"] + [f"c{i}" for i in range(size)] + ["tail_estimate", "terms"])
    for r, res in rows:
        w.writerow([r] + [repr(float(v)) for v in res.value] + [repr(float(res.tail_estimate)), res.terms])
    return buf.getvalue()


__all__ = [
    "HopfParams",
    "KernelSingularityError",
    "Lattice",
    "PreconditionError",
    "SeriesResult",
    "TailToleranceError",
    "TruncationPolicy",
    "ball_coords",
    "box_coords",
    "convergence_table",
    "cot_series",
    "epsilon_series",
    "hopf_orbit_sum",
    "hopf_series",
    "hopf_weight",
    "hyper_cot_series",
    "lattice_sum",
    "positive_half",
    "spin_character",
    "torus_kernel",
]
