"""Command-line entry point: eval, verify, reproduce, cosets and table.

Exit codes: 0 success, 1 verification failure, 2 usage or precondition
error.  Errors are written to standard error as one JSON object
``{"error": CODE, "message": ...}``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .algebra import DimensionError, Multivector, SingularElementError, scalar
from .groups import GroupError, GroupSpec, enumerate_cosets
from .integrals import (
    IntegralError,
    _hopf_gradient_orbit,
    reproduce_integral,
    sphere_quadrature,
    torus_harmonic_field,
)
from .jets import JetSingularityError
from .kernels import KernelSingularityError, cauchy_G, green_H, hyper_kernel
from .moebius import MoebiusPoleError, VahlenError
from .periodization import (
    HopfParams,
    Lattice,
    PreconditionError,
    SeriesResult,
    TailToleranceError,
    TruncationPolicy,
    convergence_table,
    cot_series,
    epsilon_series,
    hopf_series,
    hyper_cot_series,
    torus_kernel,
)
from .verify import SUITES, all_passed, run_suite

EVAL_KINDS = ("cauchy", "green", "p1", "p2", "hopf_g", "hopf_h", "hopf_h1", "hopf_h2",
              "cot1", "cot2", "c1", "c2", "torus2", "torus4", "epsilon")
TABLE_KINDS = ("hopf_g", "hopf_h", "hopf_h1", "hopf_h2", "cot1", "cot2", "c1", "c2", "torus2", "torus4", "epsilon")
THEOREMS = ("euclid_cauchy", "hopf_cauchy", "hopf_green", "hopf_hyper", "torus_green_4pt", "cylinder_hyper")

# stable error codes, by exception type (first match wins)
_ERROR_CODES = (
    (TailToleranceError, "TAIL_TOLERANCE"),
    (KernelSingularityError, "SINGULARITY"),
    (MoebiusPoleError, "SINGULARITY"),
    (JetSingularityError, "SINGULARITY"),
    (SingularElementError, "SINGULARITY"),
    (GroupError, "GROUP"),
    (IntegralError, "INTEGRAL"),
    (VahlenError, "VAHLEN"),
    (PreconditionError, "PRECONDITION"),
    (DimensionError, "DIMENSION"),
)


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = 2):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


# -- output ----------------------------------------------------------------


def _fmt(obj) -> str:
    """JSON text with doubles written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _fmt(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _fmt(obj)


def _mv(value) -> dict:
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        v = np.array([float(v)])
    n = int(round(math.log2(v.shape[-1])))
    return Multivector(n, v).to_dict()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


# -- configuration ---------------------------------------------------------


@dataclass
class RunConfig:
    n: int = 3
    m: int = 2
    lattice: dict | None = None
    truncation: dict = field(default_factory=dict)
    quadrature_order: int = 24
    tolerance_scale: float = 1.0
    out: str | None = None
    l: int | None = None

    def validate(self) -> None:
        if not 2 <= self.n <= 8:
            raise CliError("CONFIG", "n must lie in 2..8")
        HopfParams(self.m)
        if self.quadrature_order < 4:
            raise CliError("CONFIG", "quadrature order must be >= 4")
        if not self.tolerance_scale > 0:
            raise CliError("CONFIG", "tolerance scale must be positive")
        self.policy(8)
        if self.lattice is not None:
            L = self.get_lattice(0)
            if L.n != self.n:
                raise CliError("CONFIG", "lattice dimension does not match n")

    def policy(self, default_shell: int) -> TruncationPolicy:
        t = self.truncation
        return TruncationPolicy(
            int(t.get("max_shell", default_shell)),
            float(t.get("tail_tol", float("inf"))),
            t.get("pairing", "none"),
            t.get("shape", "box"),
        )

    def get_lattice(self, k_default: int, l_default: int = 0) -> Lattice:
        if self.lattice is None:
            return Lattice.standard(self.n, k_default, l_default if self.l is None else self.l)
        return Lattice(np.asarray(self.lattice["basis"], dtype=float), int(self.lattice.get("l", 0)))


_CONFIG_KEYS = {"n", "m", "lattice", "truncation", "quadrature_order", "tolerance_scale", "out"}


def _load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError("CONFIG", f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise CliError("CONFIG", "config must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise CliError("CONFIG", f"unknown config keys {sorted(unknown)}")
    cfg = RunConfig(**data)
    # flags override the file
    for key in ("n", "out", "tolerance_scale", "quadrature_order"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if getattr(args, "hopf_m", None) is not None:
        cfg.m = args.hopf_m
    trunc = dict(cfg.truncation)
    for key in ("max_shell", "tail_tol", "pairing", "shape"):
        v = getattr(args, key, None)
        if v is not None:
            trunc[key] = v
    cfg.truncation = trunc
    if getattr(args, "basis", None) is not None:
        cfg.lattice = {"basis": _matrix(args.basis), "l": args.l if args.l is not None else 0}
    elif getattr(args, "l", None) is not None:
        if cfg.lattice is not None:
            cfg.lattice = {**cfg.lattice, "l": args.l}
        cfg.l = args.l
    cfg.validate()
    return cfg


def _vec(text: str | None, n: int, name: str) -> np.ndarray:
    if text is None:
        raise CliError("USAGE", f"--{name} is required")
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise CliError("USAGE", f"--{name} must be comma-separated numbers") from None
    if v.shape != (n,):
        raise CliError("PRECONDITION", f"--{name} must have {n} components")
    return v


def _matrix(text: str) -> list:
    try:
        return [[float(t) for t in row.split(",")] for row in text.split(";")]
    except ValueError:
        raise CliError("USAGE", "matrices are rows separated by ';' of comma-separated numbers") from None


# -- series dispatch -------------------------------------------------------


def _series(kind: str, args, cfg: RunConfig, K: TruncationPolicy) -> SeriesResult:
    n = cfg.n
    if kind in ("cauchy", "green"):
        z = _vec(args.z, n, "z")
        val = cauchy_G(z) if kind == "cauchy" else green_H(z)
        return SeriesResult(val, 0.0, 1)
    if kind in ("p1", "p2"):
        x, y = _vec(args.x, n, "x"), _vec(args.y, n, "y")
        if x[-1] <= 0 or y[-1] <= 0:
            raise PreconditionError("hypermonogenic kernels need x_n, y_n > 0")
        return SeriesResult(hyper_kernel(x, y, kind), 0.0, 1)
    if kind.startswith("hopf_"):
        x, y = _vec(args.x, n, "x"), _vec(args.y, n, "y")
        sk = {"hopf_g": "G", "hopf_h": "H", "hopf_h1": "h1", "hopf_h2": "h2"}[kind]
        return hopf_series(x, y, HopfParams(cfg.m, 2 if sk == "H" else 1), sk, K)
    if kind in ("cot1", "cot2", "epsilon"):
        z = _vec(args.z, n, "z")
        L = cfg.get_lattice(1)
        sk = "monogenic" if kind == "cot1" else "harmonic" if kind == "cot2" else args.series_kind
        if kind == "epsilon":
            mi = tuple(int(t) for t in (args.m or ",".join(["0"] * n)).split(","))
            if len(mi) != n:
                raise PreconditionError(f"multi-index must have {n} entries")
            return epsilon_series(mi, z, L, sk, K)
        return cot_series(z, L, sk, K)
    if kind in ("c1", "c2"):
        x, y = _vec(args.x, n, "x"), _vec(args.y, n, "y")
        return hyper_cot_series(x, y, cfg.get_lattice(1), kind, K)
    if kind in ("torus2", "torus4"):
        x = _vec(args.x, n, "x")
        if args.anchors is None:
            raise CliError("USAGE", "--anchors is required for torus kernels")
        anchors = np.asarray(_matrix(args.anchors))
        L = cfg.get_lattice(n, 1)
        tk = "two_point_monogenic" if kind == "torus2" else "four_point_harmonic"
        return torus_kernel(x, anchors, L, tk, K)
    raise CliError("USAGE", f"unknown kind {kind!r}")


def _default_shell(kind: str) -> int:
    return 25 if kind.startswith("hopf_") else 8


def cmd_eval(args, cfg: RunConfig) -> int:
    K = cfg.policy(_default_shell(args.kind))
    res = _series(args.kind, args, cfg, K)
    params = {"n": cfg.n, "truncation": {"max_shell": K.max_shell, "tail_tol": K.tail_tol,
                                         "pairing": K.pairing, "shape": K.shape}}
    if args.kind.startswith("hopf_"):
        params["m"] = cfg.m
    for name in ("z", "x", "y", "m", "anchors"):
        v = getattr(args, name, None)
        if v is not None:
            params["multi_index" if name == "m" else name] = v
    if args.kind in ("cot1", "cot2", "epsilon", "c1", "c2", "torus2", "torus4"):
        L = cfg.get_lattice(cfg.n if args.kind.startswith("torus") else 1, 1 if args.kind.startswith("torus") else 0)
        params["lattice"] = L.to_dict()
    out = {
        "kind": args.kind,
        "params": params,
        "value": _mv(res.value),
        "tail_estimate": float(res.tail_estimate),
        "terms_summed": int(res.terms),
    }
    _emit(dumps(out), cfg.out)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    report = run_suite(args.suite, cfg.tolerance_scale, args.seed)
    ok = all_passed(report)
    _emit(dumps({"suite": args.suite, "passed": ok, "tolerance_scale": cfg.tolerance_scale, "checks": report}), cfg.out)
    if not ok:
        failing = [c["name"] for checks in report.values() for c in checks if not c["passed"]]
        raise CliError("VERIFICATION_FAILED", "failing checks: " + "; ".join(failing), exit_code=1)
    return 0


def _pad(v, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[: len(v)] = v
    return out


def _one(n: int):
    return lambda x: np.broadcast_to(scalar(1.0, n), np.shape(x)[:-1] + (1 << n,))


def cmd_reproduce(args, cfg: RunConfig) -> int:
    n, order, th = cfg.n, cfg.quadrature_order, args.theorem
    params: dict = {}
    df = None
    if th == "euclid_cauchy":
        c, r = np.zeros(n), 1.0
        y = _pad([0.0, 0.3], n)
        f = _one(n) if args.f == "const" else (lambda x: cauchy_G(x - _pad([3.0], n)))
        if args.f == "const":
            y = np.zeros(n)
    elif th in ("hopf_cauchy", "hopf_green"):
        y0 = _pad([0.2, 1.5, 0.3], n)
        c, r = _pad([1.3, 0.2, 0.1], n), 0.2
        y = c + _pad([0.05, 0.02, -0.03], n)
        K = cfg.policy(25)
        params = {"m": cfg.m, "max_shell": K.max_shell}
        if args.f == "const":
            raise CliError("PRECONDITION", "constants are not sections on the Hopf manifold; use --f kernel")
        if th == "hopf_cauchy":
            f = lambda x: hopf_series(x, y0, HopfParams(cfg.m), "G", K).value
        else:
            # harmonic orbit sum Phi and D Phi = (n - 2) E'
            f = lambda x: scalar(1.0, n) * _hopf_gradient_orbit(x, y0, float(cfg.m), K.max_shell)[0][..., None]
            df = lambda x: (n - 2) * _hopf_gradient_orbit(x, y0, float(cfg.m), K.max_shell)[1]
    elif th in ("hopf_hyper", "cylinder_hyper"):
        c, r = _pad([0.1], n), 0.1
        c[-1] = 1.4
        y = c + _pad([0.01, 0.02], n)
        f = _one(n)
        if args.f != "const":
            raise CliError("PRECONDITION", "hypermonogenic reproduction supports --f const")
        if th == "cylinder_hyper":
            params = {"lattice": cfg.get_lattice(1), "truncation": cfg.policy(8)}
        else:
            params = {"m": cfg.m, "max_shell": cfg.policy(25).max_shell}
    elif th == "torus_green_4pt":
        if n != 3:
            raise CliError("PRECONDITION", "the synthetic torus field is defined for n = 3")
        L = cfg.get_lattice(3, 1)
        K = cfg.policy(8)
        f, df = torus_harmonic_field([[0.9, 0.1, 0.2], [0.1, 0.85, 0.9], [0.8, 0.8, 0.1], [0.15, 0.2, 0.8]], L, K)
        c, r = np.array([0.5, 0.5, 0.5]), 0.2
        y = c + np.array([0.05, -0.04, 0.03])
        order = min(order, 16)
        params = {"lattice": L, "truncation": K,
                  "anchors": [[0.05, 0.9, 0.1], [0.9, 0.05, 0.9], [0.1, 0.1, 0.05]]}
    else:
        raise CliError("USAGE", f"unknown theorem {th!r}")
    if args.y is not None:
        y = _vec(args.y, n, "y")
    surf = sphere_quadrature(c, r, order, n)
    rep = reproduce_integral(th, f, surf, y, params, df=df)
    out = rep.to_dict()
    out["reproduced_value"] = _mv(rep.reproduced_value)
    if rep.reference_value is not None:
        out["reference_value"] = _mv(rep.reference_value)
    budget = sum(v for v in rep.tolerance_budget.values() if v is not None and math.isfinite(v))
    out["within_budget"] = bool(rep.abs_error is not None and rep.abs_error <= 10 * budget * cfg.tolerance_scale)
    _emit(dumps(out), cfg.out)
    return 0


def cmd_cosets(args, cfg: RunConfig) -> int:
    n = args.n if args.n is not None else args.p + 1
    spec = GroupSpec(args.p, args.N, args.kind, n)
    table = enumerate_cosets(spec, args.max_word_length)
    out = table.to_dict()
    out["count"] = len(table)
    _emit(dumps(out), cfg.out)
    return 0


def cmd_table(args, cfg: RunConfig) -> int:
    try:
        radii = [int(t) for t in args.radii.split(",")]
    except ValueError:
        raise CliError("USAGE", "--radii must be comma-separated integers") from None
    base = cfg.policy(_default_shell(args.kind))

    def fn(R: int) -> SeriesResult:
        return _series(args.kind, args, cfg, base.with_shell(R))

    try:
        text = convergence_table(fn, radii)
    except ValueError as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise CliError("USAGE", str(exc)) from None
    _emit(text, cfg.out)
    return 0


# -- parser ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("USAGE", message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--n", type=int, default=argparse.SUPPRESS, help="ambient dimension")
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    p.add_argument("--tolerance-scale", type=float, default=argparse.SUPPRESS, dest="tolerance_scale")
    return p


def _series_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--z")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--m", help="multi-index for epsilon, e.g. 1,0,0")
    p.add_argument("--series-kind", choices=("monogenic", "harmonic"), default="monogenic", dest="series_kind")
    p.add_argument("--anchors", help="torus anchors as rows 'a1;a2;...'")
    p.add_argument("--hopf-m", type=int, dest="hopf_m")
    p.add_argument("--max-shell", type=int, dest="max_shell")
    p.add_argument("--tail-tol", type=float, dest="tail_tol")
    p.add_argument("--pairing", choices=("none", "antipodal", "expanding_box"))
    p.add_argument("--shape", choices=("box", "ball"))
    p.add_argument("--basis", help="lattice basis rows 'w1;w2;...'")
    p.add_argument("--l", type=int, help="spin-split index")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="clifford-manifolds", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    pe = sub.add_parser("eval", parents=[common], help="evaluate a kernel or series")
    pe.add_argument("kind", choices=EVAL_KINDS)
    _series_opts(pe)
    pv = sub.add_parser("verify", parents=[common], help="run a verification suite")
    pv.add_argument("suite", choices=SUITES + ("all",))
    pv.add_argument("--seed", type=int, default=0)
    pr = sub.add_parser("reproduce", parents=[common], help="reproduce an integral formula")
    pr.add_argument("theorem", choices=THEOREMS)
    pr.add_argument("--f", choices=("const", "kernel"), default=None)
    pr.add_argument("--y")
    pr.add_argument("--order", type=int, dest="quadrature_order")
    pr.add_argument("--hopf-m", type=int, dest="hopf_m")
    pr.add_argument("--max-shell", type=int, dest="max_shell")
    pc = sub.add_parser("cosets", parents=[common], help="enumerate coset representatives")
    pc.add_argument("--p", type=int, required=True)
    pc.add_argument("--N", type=int, default=1)
    pc.add_argument("--kind", choices=("full", "principal", "hecke0"), default="full")
    pc.add_argument("--max-word-length", type=int, default=4, dest="max_word_length")
    pt = sub.add_parser("table", parents=[common], help="CSV convergence table")
    pt.add_argument("kind", choices=TABLE_KINDS)
    pt.add_argument("--radii", default="1,2,4,8")
    _series_opts(pt)
    return parser


_DEFAULT_F = {"euclid_cauchy": "const", "hopf_hyper": "const", "cylinder_hyper": "const"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for key in ("n", "config", "out", "tolerance_scale"):
            if not hasattr(args, key):
                setattr(args, key, None)
        if args.command == "reproduce" and args.f is None:
            args.f = _DEFAULT_F.get(args.theorem, "kernel")
        if args.command == "cosets":
            cfg = RunConfig(n=args.n or args.p + 1)
            cfg.out = args.out
            if args.config:
                cfg = _load_config(args)
        else:
            cfg = _load_config(args)
        handler = {"eval": cmd_eval, "verify": cmd_verify, "reproduce": cmd_reproduce,
                   "cosets": cmd_cosets, "table": cmd_table}[args.command]
        return handler(args, cfg)
    except CliError as exc:
        _error(exc.code, str(exc))
        return exc.exit_code
    except Exception as exc:  # mapped to stable codes below
        for cls, code in _ERROR_CODES:
            if isinstance(exc, cls):
                _error(code, str(exc))
                return 2
        if isinstance(exc, (ValueError, ArithmeticError)):
            _error("INVALID_ARGUMENT", str(exc))
            return 2
        raise


def _error(code: str, message: str) -> None:
    sys.stderr.write(dumps({"error": code, "message": message}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
