"""Verification suites: module invariants evaluated as named, budgeted checks."""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import algebra as al
from .groups import GroupSpec, automorphy_defect, eisenstein_series, enumerate_cosets, is_member
from .hopf_boundary import (
    half_hopf_boundary_mesh,
    half_hopf_kernel,
    hardy_project,
    kerzman_stein_matrix,
    szego_projection_matrix,
)
from .integrals import reproduce_integral, sphere_quadrature
from .jets import jet_dirac, taylor_jet
from .kernels import cauchy_G, green_H, kernel_partial
from .moebius import (
    VahlenMatrix,
    cocycle_check,
    compose,
    matrix_inverse,
    moebius_apply,
    random_word,
    weight_factor,
)
from .operators import (
    DIRAC,
    HYPERBOLIC,
    LAPLACE,
    LEUTWILER,
    dirac_fd,
    residual_scan,
)
from .periodization import HopfParams, Lattice, TruncationPolicy, cot_series, hopf_series, torus_kernel

SUITES = ("clifford", "moebius", "kernels", "operators", "periodization", "groups", "integrals")


@dataclass
class Check:
    """One verified quantity.  ``relation`` is ``<=``, ``>=`` or ``report``."""

    name: str
    measured: float
    budget: float | None
    passed: bool
    relation: str = "<="

    def to_dict(self) -> dict:
        return asdict(self)


def _chk(name: str, measured, budget, scale: float, relation: str = "<=") -> Check:
    measured = float(measured)
    if relation == "report":
        return Check(name, measured, None, bool(np.isfinite(measured)), relation)
    b = float(budget) * scale if relation == "<=" else float(budget) / scale
    ok = measured <= b if relation == "<=" else measured >= b
    return Check(name, measured, b, bool(ok and np.isfinite(measured)), relation)


def _rand_mv(rng, n, size=None):
    shape = (1 << n,) if size is None else (size, 1 << n)
    return rng.normal(size=shape)


def suite_clifford(scale: float = 1.0, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for n in (3, 4, 5):
        a, b, c = (_rand_mv(rng, n, 100) for _ in range(3))
        assoc = np.abs(al.gp(al.gp(a, b), c) - al.gp(a, al.gp(b, c))).max()
        dist = np.abs(al.gp(a, b + c) - al.gp(a, b) - al.gp(a, c)).max()
        rev = np.abs(al.reverse(al.gp(a, b)) - al.gp(al.reverse(b), al.reverse(a))).max()
        con = np.abs(al.conjugate(al.gp(a, b)) - al.gp(al.conjugate(b), al.conjugate(a))).max()
        st = np.abs(al.star(al.gp(a, b)) - al.gp(al.star(a), al.star(b))).max()
        inv = max(np.abs(al.involution(al.involution(a, k), k) - a).max() for k in ("reverse", "conjugate", "star"))
        x = rng.normal(size=(100, n))
        X = al.vec_to_mv(x)
        sq = al.gp(X, X)
        sq_err = np.abs(sq - al.scalar(1.0, n) * -np.sum(x**2, axis=1, keepdims=True)).max()
        one = al.gp(X, al.vec_to_mv(al.vector_inverse(x)))
        inv_err = np.abs(one - al.scalar(1.0, n)).max()
        out += [
            _chk(f"associativity n={n}", assoc, 1e-10, scale),
            _chk(f"distributivity n={n}", dist, 1e-12, scale),
            _chk(f"reverse anti-automorphism n={n}", rev, 1e-10, scale),
            _chk(f"conjugate anti-automorphism n={n}", con, 1e-10, scale),
            _chk(f"star automorphism n={n}", st, 1e-10, scale),
            _chk(f"involutions self-inverse n={n}", inv, 0.0, scale),
            _chk(f"vector square n={n}", sq_err, 1e-10, scale),
            _chk(f"vector inverse n={n}", inv_err, 1e-10, scale),
        ]
    return out


def suite_moebius(scale: float = 1.0, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    n = 3
    law = coc1 = coc2 = 0.0
    half = np.inf
    done = 0
    while done < 100:
        m1 = random_word(rng, n, int(rng.integers(1, 5)))
        m2 = random_word(rng, n, int(rng.integers(1, 5)))
        x = rng.normal(size=n)
        try:
            lhs = moebius_apply(compose(m1, m2), x)
            rhs = moebius_apply(m1, moebius_apply(m2, x))
            c1 = cocycle_check(m1, m2, x, "j1")
            c2 = cocycle_check(m1, m2, x, "j2")
        except ArithmeticError:
            continue
        scale_x = max(1.0, float(np.linalg.norm(lhs)))
        law = max(law, float(np.linalg.norm(lhs - rhs)) / scale_x)
        coc1, coc2 = max(coc1, c1), max(coc2, c2)
        done += 1
    for _ in range(50):
        m = random_word(rng, n, 6, upper=True)
        x = np.r_[rng.normal(size=n - 1), rng.uniform(0.2, 2)]
        try:
            half = min(half, float(moebius_apply(m, x)[-1]))
        except ArithmeticError:
            continue
    J = VahlenMatrix.inversion(n)
    ident = compose(J, matrix_inverse(J))
    idn = max(float(np.abs(getattr(ident, k) - getattr(VahlenMatrix.identity(n), k)).max()) for k in "abcd")
    x = np.array([0.3, -0.4, 1.2])
    jg = float(np.abs(weight_factor(J, x, "j1") - cauchy_G(x)).max())
    out += [
        _chk("action law (relative)", law, 1e-9, scale),
        _chk("j1 cocycle", coc1, 1e-9, scale),
        _chk("j2 cocycle", coc2, 1e-9, scale),
        _chk("half-space preservation (min x_n)", half, 0.0, 1.0, ">="),
        _chk("J J^-1 = I", idn, 1e-12, scale),
        _chk("j1(J, x) = G(x)", jg, 1e-12, scale),
    ]
    return out


def suite_kernels(scale: float = 1.0, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for n in (3, 4):
        region = {"type": "annulus", "n": n, "r_min": 0.5, "r_max": 2.0, "count": 100}
        out.append(_chk(f"Dirac residual of G n={n}", residual_scan(cauchy_G, DIRAC, region, seed=seed).max_residual, 1e-6, scale))
        out.append(_chk(f"Laplace residual of H n={n}", residual_scan(green_H, LAPLACE, region, seed=seed).max_residual, 1e-6, scale))
        z = rng.normal(size=(50, n))
        z *= rng.uniform(0.5, 2.0, (50, 1)) / np.linalg.norm(z, axis=1, keepdims=True)
        lam = 1.7
        hom_g = np.abs(cauchy_G(lam * z) - lam ** (1 - n) * cauchy_G(z)).max()
        hom_h = np.abs(green_H(lam * z) - lam ** (2 - n) * green_H(z)).max()
        odd = np.abs(cauchy_G(-z) + cauchy_G(z)).max()
        even = np.abs(green_H(-z) - green_H(z)).max()
        mi, mj = [0] * n, [0] * n
        mi[0], mi[1] = 1, 1
        h = 1e-4
        e1, e2 = np.zeros(n), np.zeros(n)
        e1[0] = e2[1] = h
        mj[0] = 1
        # d1 d2 from jets against d2 (by differences) of the jet d1
        d2d1 = (kernel_partial("G", mj, z + e2) - kernel_partial("G", mj, z - e2)) / (2 * h)
        scale2 = np.linalg.norm(z, axis=1, keepdims=True) ** (-n - 1)
        p12 = np.abs((kernel_partial("G", mi, z) - d2d1) / scale2).max()
        fd = (cauchy_G(z + e1) - cauchy_G(z - e1)) / (2 * h)
        scale_z = np.linalg.norm(z, axis=1, keepdims=True) ** (-n)
        fd_err = np.abs((kernel_partial("G", mj, z) - fd) / scale_z).max()
        out += [
            _chk(f"homogeneity G n={n}", hom_g, 1e-12, scale),
            _chk(f"homogeneity H n={n}", hom_h, 1e-12, scale),
            _chk(f"G odd n={n}", odd, 0.0, scale),
            _chk(f"H even n={n}", even, 0.0, scale),
            _chk(f"mixed partial d1 d2 vs d2 of d1 n={n}", p12, 1e-5, scale),
            _chk(f"jet partial vs finite difference n={n}", fd_err, 1e-6, scale),
        ]
    return out


def suite_operators(scale: float = 1.0, seed: int = 0) -> list[Check]:
    out = []
    n = 3
    one = lambda x: np.broadcast_to(al.scalar(1.0, n), np.shape(x)[:-1] + (1 << n,))
    ident = lambda x: al.vec_to_mv(np.asarray(x))
    box = {"type": "box", "lo": [-1, -1, 0.5], "hi": [1, 1, 2], "count": 50}
    for name, op in (("paper_literal", HYPERBOLIC), ("leutwiler", LEUTWILER)):
        r1 = residual_scan(one, op, box, seed=seed).max_residual
        rx = residual_scan(ident, op, box, seed=seed).max_residual
        rel = "<=" if name == "paper_literal" else "report"
        out.append(_chk(f"hyperbolic {name} on f=1", r1, 1e-6, scale, rel))
        out.append(_chk(f"hyperbolic {name} on f=x", rx, 1e-6, scale, rel))
    jet = taylor_jet(cauchy_G, np.array([0.6, 0.8, 0.3]), 1)
    out.append(_chk("jet Dirac of G", np.abs(jet_dirac(jet)).max(), 1e-12, scale))

    def expf(x):
        x = np.asarray(x)
        v = np.zeros(x.shape[:-1] + (1 << n,))
        v[..., 2] = np.exp(x[..., 0])
        return v

    x0 = np.array([0.2, 0.1, 0.4])
    exact = al.gp(al.basis_blade(n, 1), expf(x0))
    errs = [np.abs(dirac_fd(expf, x0, h) - exact).max() for h in (0.04, 0.02)]
    out.append(_chk("stencil convergence ratio (h -> h/2)", errs[0] / errs[1], 12.0, 1.0, ">="))
    return out


def suite_periodization(scale: float = 1.0, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    K = TruncationPolicy(25)
    worst = {"G": 0.0, "H": 0.0}
    ok = {"G": True, "H": True}
    for _ in range(10):
        x = rng.normal(size=3)
        x *= rng.uniform(1.0, 1.9) / np.linalg.norm(x)
        y = rng.normal(size=3)
        y *= rng.uniform(1.0, 1.9) / np.linalg.norm(y)
        for kind, ex in (("G", 1.0), ("H", 0.5)):
            a = hopf_series(x, y, HopfParams(2), kind, K)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                b = hopf_series(2 * x, y, HopfParams(2), kind, K)
            d = float(np.linalg.norm(a.value - 2**ex * b.value))
            bound = a.tail_estimate + 2**ex * b.tail_estimate
            worst[kind] = max(worst[kind], d / bound if bound > 0 else np.inf)
            ok[kind] &= d < bound * scale
    out.append(_chk("Hopf G dilation covariance (defect / tail)", worst["G"], 1.0, scale))
    out.append(_chk("Hopf H dilation covariance (defect / tail)", worst["H"], 1.0, scale))
    Kl = TruncationPolicy(8)
    for l in (0, 1, 2):
        L = Lattice.standard(4, 2, l)
        z = np.array([0.31, 0.17, 0.42, 0.23])
        base = cot_series(z, L, "monogenic", Kl)
        for j in range(2):
            sgn = -1.0 if j < l else 1.0
            sh = cot_series(z + L.basis[j], L, "monogenic", Kl)
            d = float(np.linalg.norm(sh.value - sgn * base.value))
            out.append(_chk(f"cot1 periodicity l={l} w_{j + 1} (defect / tail)",
                            d / (base.tail_estimate + sh.tail_estimate), 1.0, scale))
    L = Lattice.standard(4, 2, 1)
    z = np.array([0.31, 0.17, 0.42, 0.23])
    r1 = cot_series(z, L, "monogenic", TruncationPolicy(8))
    r2 = cot_series(z, L, "monogenic", TruncationPolicy(16))
    out.append(_chk("shell doubling change vs tail", float(np.linalg.norm(r1.value - r2.value)), r1.tail_estimate, scale))
    L3 = Lattice.standard(3, 3, 1)
    anc = np.array([[0.2, 0.3, 0.4], [0.7, 0.6, 0.5], [0.1, 0.8, 0.2], [0.6, 0.1, 0.9]])
    f = lambda p: torus_kernel(p, anc, L3, "four_point_harmonic", TruncationPolicy(6)).value
    lap = residual_scan(f, LAPLACE, np.array([[0.45, 0.5, 0.52], [0.3, 0.6, 0.7]]), h=1e-2).max_residual
    out.append(_chk("four-point torus kernel Laplace residual", lap, 1e-3, scale))
    return out


def suite_groups(scale: float = 1.0, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    tables = {}
    for spec in (GroupSpec(1, 1, "full", 4), GroupSpec(1, 3, "principal", 4), GroupSpec(1, 3, "hecke0", 4)):
        tables[spec] = enumerate_cosets(spec, 6)
    full, prin, hecke = tables.values()
    bad = sum(not is_member(M, full.spec) for M in hecke.representatives)
    bad += sum(not is_member(M, hecke.spec) for M in prin.representatives)
    out.append(_chk("membership chain principal <= hecke0 <= full", bad, 0, 1.0))
    keys = {tuple(np.round(np.r_[M.c, M.d], 9)) for M in full.representatives}
    out.append(_chk("distinct bottom rows", len(full) - len(keys), 0, 1.0))
    counts = [len(enumerate_cosets(full.spec, L)) for L in (2, 4, 6)]
    out.append(_chk("coset counts monotone in word length", float(all(a <= b for a, b in zip(counts, counts[1:]))), 1.0, 1.0, ">="))
    x = np.array([0.1, 0.2, -0.1, 1.7])
    y = np.array([-0.3, 0.1, 0.2, 2.1])
    a = eisenstein_series(x, full.spec, "pair_j1", full, y).value
    b = eisenstein_series(y, full.spec, "pair_j1", full, x).value
    out.append(_chk("pair series symmetry", np.abs(a - al.conjugate(b)).max(), 1e-9, scale))
    canc = eisenstein_series(np.array([0, 0, 0, 100.0]), full.spec, "j1", full).value
    out.append(_chk("j1 over the full group cancels in pairs", np.linalg.norm(canc), 1e-6, scale))
    T = VahlenMatrix.translation(np.array([3.0, 0, 0, 0]))
    worst = 0.0
    for _ in range(5):
        x = np.r_[rng.uniform(-0.5, 0.5, 3), rng.uniform(1.5, 2.5)]
        d, bud = automorphy_defect(x, prin.spec, "j1", prin, T)
        worst = max(worst, d / bud if bud > 0 else np.inf)
    out.append(_chk("j1 automorphy under T (defect / last-shell budget)", worst, 1.0, scale))
    return out


def suite_integrals(scale: float = 1.0, seed: int = 0) -> list[Check]:
    out = []
    n = 3
    one = lambda x: np.broadcast_to(al.scalar(1.0, n), np.shape(x)[:-1] + (1 << n,))
    s = sphere_quadrature(np.zeros(n), 1.0, 24, n)
    out.append(_chk("sphere area", abs(s.area() - 4 * np.pi), 1e-10, scale))
    out.append(_chk("Cauchy mean value", reproduce_integral("euclid_cauchy", one, s, np.zeros(n)).abs_error, 1e-8, scale))
    f = lambda x: cauchy_G(x - np.array([3.0, 0, 0]))
    out.append(_chk("Cauchy reproduction of G(x - 3e1)",
                    reproduce_integral("euclid_cauchy", f, s, np.array([0, 0.3, 0])).abs_error, 1e-5, scale))
    c = np.array([0.1, 0.0, 1.4])
    sp = sphere_quadrature(c, 0.1, 24, n)
    r = reproduce_integral("hopf_hyper", one, sp, c + np.array([0.01, 0.02, 0.0]))
    out.append(_chk("hypermonogenic reproduction of 1", r.abs_error, 1e-2, scale))
    mesh = half_hopf_boundary_mesh(2, 16, 16)
    A = kerzman_stein_matrix(mesh)
    out.append(_chk("Kerzman-Stein skew-adjointness", np.abs((A + A.adjoint()).matrix).max(), 1e-12, scale))
    P = szego_projection_matrix(mesh)
    out.append(_chk("Szego idempotency defect 16x16", P.defect, 0.05, scale))
    g = np.random.default_rng(seed).normal(size=(len(mesh.nodes), 8))
    gp_, gm = hardy_project(g, mesh)
    out.append(_chk("Hardy split exact (rounding)", np.abs(gp_ + gm - g).max(), 1e-12, scale))
    rng = np.random.default_rng(seed)
    pmin = np.inf
    for _ in range(50):
        x = mesh.nodes[rng.integers(len(mesh.nodes))]
        w = np.r_[rng.uniform(-2, 2, 2), rng.uniform(0.05, 2)]
        pmin = min(pmin, float(half_hopf_kernel(x, w, "poisson")[0]))
    out.append(_chk("Poisson kernel positivity (min)", pmin, 0.0, 1.0, ">="))
    return out


_REGISTRY: dict[str, Callable[..., list[Check]]] = {
    "clifford": suite_clifford,
    "moebius": suite_moebius,
    "kernels": suite_kernels,
    "operators": suite_operators,
    "periodization": suite_periodization,
    "groups": suite_groups,
    "integrals": suite_integrals,
}


def run_suite(name: str, scale: float = 1.0, seed: int = 0) -> dict:
    """Run one suite (or ``all``); returns {suite: [check dicts]} in fixed order."""
    if name == "all":
        names = list(SUITES)
    elif name in _REGISTRY:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}")
    return {s: [c.to_dict() for c in _REGISTRY[s](scale, seed)] for s in names}


def all_passed(report: dict) -> bool:
    return all(c["passed"] for checks in report.values() for c in checks)


__all__ = ["Check", "SUITES", "all_passed", "run_suite"]
