"""The hypercomplex modular group, its congruence subgroups and Eisenstein series.

Matrices of Gamma_p live in the special Vahlen group of R^(n-1) with entries
in the standard order O_p (integer combinations of the blades built from
e_1..e_p).  Coset tables are truncated by word length in the generators
T_{+-e_i} (i <= p) and J.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .algebra import conjugate, gp, reverse
from .moebius import (
    VahlenError,
    VahlenMatrix,
    compose,
    matrix_inverse,
    moebius_apply,
    weight_factor,
)

INT_TOL = 1e-9
MAX_WORD_LENGTH = 12
MAX_MATRICES = 400_000


class GroupError(ValueError):
    """Unsupported group, violated precondition or explosion guard."""


@dataclass(frozen=True)
class GroupSpec:
    """Gamma_p (``full``), Gamma_p[N] (``principal``) or Gamma_{p,0}[N] (``hecke0``).

    ``n`` is the dimension of the ambient Clifford algebra; it defaults to
    p + 1, the smallest half-space on which Gamma_p acts.
    """

    p: int
    N: int = 1
    kind: str = "full"
    n: int | None = None

    def __post_init__(self):
        if self.p < 1:
            raise GroupError("p must be >= 1")
        if self.N < 1:
            raise GroupError("level N must be >= 1")
        if self.kind not in ("full", "principal", "hecke0"):
            raise GroupError(f"unsupported group kind {self.kind!r}")
        if self.n is None:
            object.__setattr__(self, "n", self.p + 1)
        if self.p > self.n - 1:
            raise GroupError("need p <= n - 1 for the half-space action")

    @property
    def contains_minus_identity(self) -> bool:
        return self.kind != "principal" or self.N <= 2

    def to_dict(self) -> dict:
        return {"p": self.p, "N": self.N, "kind": self.kind, "n": self.n}


@dataclass(frozen=True)
class StandardOrder:
    """O_p inside Cl_n: integer coefficients on blades over e_1..e_p."""

    p: int
    n: int

    def support(self) -> np.ndarray:
        idx = np.arange(1 << self.n)
        return (idx >> self.p) == 0

    def contains(self, a, tol: float = INT_TOL) -> bool:
        a = np.asarray(a, dtype=float)
        sup = self.support()
        if np.any(np.abs(a[..., ~sup]) > tol):
            return False
        return bool(np.all(np.abs(a - np.round(a)) <= tol))

    def contains_multiple(self, a, N: int, tol: float = INT_TOL) -> bool:
        """a in N * O_p."""
        return self.contains(np.asarray(a, dtype=float) / N, tol)


def group_generators(p: int, n: int | None = None) -> list[VahlenMatrix]:
    """T_{e_1}, ..., T_{e_p} and J."""
    if p < 1:
        raise GroupError("p must be >= 1")
    n = p + 1 if n is None else n
    out = []
    for i in range(p):
        e = np.zeros(n)
        e[i] = 1.0
        out.append(VahlenMatrix.translation(e))
    out.append(VahlenMatrix.inversion(n))
    return out


def is_member(M: VahlenMatrix, spec: GroupSpec, tol: float = INT_TOL) -> bool:
    """Entries in O_p, pseudo-determinant 1, plus the level-N congruences."""
    O = StandardOrder(spec.p, M.n)
    if not all(O.contains(getattr(M, k), tol) for k in "abcd"):
        return False
    pd = M.pseudo_determinant()
    if abs(pd[0] - 1.0) > tol or np.any(np.abs(pd[1:]) > tol):
        return False
    one = np.zeros(1 << M.n)
    one[0] = 1.0
    if spec.kind == "full":
        return True
    if spec.kind == "hecke0":
        return O.contains_multiple(M.c, spec.N, tol)
    return all(
        O.contains_multiple(v, spec.N, tol) for v in (M.a - one, M.b, M.c, M.d - one)
    )


def _key(arr: np.ndarray) -> tuple:
    return tuple(np.round(arr).astype(np.int64).ravel().tolist())


def _stack(M: VahlenMatrix) -> np.ndarray:
    return np.stack([M.a, M.b, M.c, M.d])


def _unstack(arr: np.ndarray) -> VahlenMatrix:
    return VahlenMatrix(*arr)


@dataclass
class CosetTable:
    """Representatives of T \\ Gamma keyed by bottom row (c, d)."""

    spec: GroupSpec
    max_word_length: int
    representatives: list = field(default_factory=list)
    word_lengths: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.representatives)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "max_word_length": self.max_word_length,
            "word_lengths": list(self.word_lengths),
            "representatives": [m.to_dict() for m in self.representatives],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _word_ball(spec: GroupSpec, L: int):
    """Distinct matrices reachable by words of length <= L, with shortest length."""
    gens = []
    for g in group_generators(spec.p, spec.n):
        gens.append(_stack(g))
        gens.append(_stack(matrix_inverse(g)))
    gens = np.stack(gens)
    start = _stack(VahlenMatrix.identity(spec.n))
    seen = {_key(start): (0, start)}
    frontier = start[None]
    for length in range(1, L + 1):
        a, b, c, d = (frontier[:, None, i] for i in range(4))
        ga, gb, gc, gd = (gens[None, :, i] for i in range(4))
        prod = np.stack(
            [gp(a, ga) + gp(b, gc), gp(a, gb) + gp(b, gd), gp(c, ga) + gp(d, gc), gp(c, gb) + gp(d, gd)],
            axis=2,
        ).reshape(-1, 4, 1 << spec.n)
        prod = np.round(prod)
        new = []
        for m in prod:
            k = _key(m)
            if k not in seen:
                seen[k] = (length, m)
                new.append(m)
        if len(seen) > MAX_MATRICES:
            raise GroupError(f"word enumeration exceeded {MAX_MATRICES} matrices")
        if not new:
            break
        frontier = np.stack(new)
    return seen.values()


def enumerate_cosets(spec: GroupSpec, max_word_length: int) -> CosetTable:
    """Word-length-truncated system of coset representatives.

    Words in the generators and their inverses are filtered by membership and
    deduplicated by bottom row; merged pairs are checked to differ by a left
    translation.  When -I lies in the group the table is closed under
    M -> -M so that paired cancellation is exact.
    """
    if not 0 <= max_word_length <= MAX_WORD_LENGTH:
        raise GroupError(f"max_word_length must lie in 0..{MAX_WORD_LENGTH}")
    found: dict[tuple, tuple[int, np.ndarray]] = {}
    members = []
    for length, m in sorted(_word_ball(spec, max_word_length), key=lambda t: (t[0], _key(t[1]))):
        members.append((length, m))
        if spec.contains_minus_identity:
            members.append((length, -m))
    for length, m in members:
        M = _unstack(m)
        if not is_member(M, spec):
            continue
        k = _key(m[2:])
        if k in found:
            if found[k][0] <= length:
                _check_translation(_unstack(found[k][1]), M)
                continue
        found[k] = (length, m)
    items = sorted(found.items(), key=lambda kv: (kv[1][0], kv[0]))
    return CosetTable(
        spec,
        max_word_length,
        [_unstack(m) for _, (_, m) in items],
        [length for _, (length, _) in items],
    )


def _check_translation(M1: VahlenMatrix, M2: VahlenMatrix) -> None:
    q = compose(M2, matrix_inverse(M1))
    one = np.zeros(1 << M1.n)
    one[0] = 1.0
    if not (np.allclose(q.a, one, atol=INT_TOL) and np.allclose(q.d, one, atol=INT_TOL)
            and np.allclose(q.c, 0.0, atol=INT_TOL)):
        raise GroupError("matrices with equal bottom rows do not differ by a translation")


@dataclass
class EisensteinResult:
    value: np.ndarray
    terms: int
    last_shell: float
    diagnostics: dict = field(default_factory=dict)


def _check_point(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise GroupError(f"point must have shape ({n},)")
    if x[-1] <= 0:
        raise GroupError("point must lie in the upper half-space")
    return x


def eisenstein_series(x, spec: GroupSpec, kind: str, table: CosetTable, y=None) -> EisensteinResult:
    """Partial sums of the Eisenstein families over a coset table.

    j1: sum J1(M, x); j2: sum J2(M, x); pair_j1: sum conj(rev(J1(M, x))) rev(J1(M, y));
    pair_j2: sum J2(M, x) J2(M, y).  ``last_shell`` is the norm of the
    contribution of representatives of maximal word length.
    """
    n, p = spec.n, spec.p
    if len(table) == 0:
        raise GroupError("empty coset table")
    if table.spec != spec:
        raise GroupError("table was built for a different group")
    if kind == "j1" and not p < n - 1:
        raise GroupError("j1 series needs p < n - 1")
    if kind == "j2" and not p < n - 2:
        raise GroupError("j2 series needs p < n - 2")
    if kind == "pair_j1" and not (p <= n - 1 and n >= 3):
        raise GroupError("pair_j1 series needs p <= n - 1 and n >= 3")
    if kind == "pair_j2" and n < 4:
        raise GroupError("pair_j2 series needs n >= 4")
    if kind not in ("j1", "j2", "pair_j1", "pair_j2"):
        raise GroupError(f"unknown series kind {kind!r}")
    x = _check_point(x, n)
    pair = kind.startswith("pair")
    if pair:
        if y is None:
            raise GroupError("pair series need a second point y")
        y = _check_point(y, n)
    w = "j1" if kind.endswith("j1") else "j2"
    terms = []
    for M in table.representatives:
        jx = weight_factor(M, x, w)
        if pair:
            jy = weight_factor(M, y, w)
            terms.append(gp(conjugate(reverse(jx)), reverse(jy)))
        else:
            terms.append(jx)
    terms = np.stack(terms)
    lengths = np.asarray(table.word_lengths)
    value = terms.sum(axis=0)
    last = float(np.linalg.norm(terms[lengths == lengths.max()].sum(axis=0)))
    diag = {
        "max_word_length": table.max_word_length,
        "contains_minus_identity": spec.contains_minus_identity,
    }
    if w == "j1" and spec.contains_minus_identity:
        # M and -M contribute opposite j1 terms
        diag["unpaired_abs_sum"] = float(np.sum(np.linalg.norm(terms, axis=-1)))
    return EisensteinResult(value, len(terms), last, diag)


def automorphy_defect(x, spec: GroupSpec, kind: str, table: CosetTable, M0: VahlenMatrix) -> tuple[float, float]:
    """(||E(x) - J(M0, x) E(M0<x>)||, combined last-shell budget) for j1/j2 kinds."""
    if kind not in ("j1", "j2"):
        raise GroupError("automorphy defect is defined for j1 and j2 series")
    if not is_member(M0, spec):
        raise VahlenError("M0 is not in the group")
    x = np.asarray(x, dtype=float)
    e1 = eisenstein_series(x, spec, kind, table)
    mx = moebius_apply(M0, x)
    e2 = eisenstein_series(mx, spec, kind, table)
    rhs = gp(weight_factor(M0, x, kind), e2.value)
    return float(np.linalg.norm(e1.value - rhs)), e1.last_shell + e2.last_shell
