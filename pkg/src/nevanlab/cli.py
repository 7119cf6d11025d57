"""Command-line front end.

Exit codes: 0 success, 2 violated hypothesis or bad input, 3 numeric
failure. Output is CSV (default) or JSON on standard output and depends
only on the arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import brotbek, config
from .curve import HoloCurve, parse_expr
from .divisor import Arrangement, Hypersurface
from .errors import HypothesisViolation, NevanlabError, NumericFailure, ParameterViolation, ParseError
from .jetdiff import GGJetDifferential
from .radial import (
    characteristic_T,
    counting_N,
    fmt_residual,
    logderiv_bound_check,
    main_lemma_check,
    _zero_set_covering,
)
from .smt import CartanWronskian, Fujimoto, GeneralJetDiff, defect_estimate, defect_relation_margin, smt_margin

COMMANDS = ("tfr", "count", "fmt", "smt", "defect", "loglemma", "degree-bound")


@dataclass(frozen=True)
class RunConfig:
    command: str
    r_min: float = 1.0
    r_max: float = 10.0
    grid_points: int = 64
    eps: float = 0.5
    mu0: int = 1
    trunc: Optional[int] = None
    precision: str = "double"
    fmt: str = "csv"
    seed: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterViolation(f"unknown command {self.command!r}")
        if self.command != "degree-bound":
            if self.r_min < 1:
                raise ParameterViolation("--rmin must be at least 1")
            if not self.r_max > self.r_min:
                raise ParameterViolation("--rmax must exceed --rmin")
            if self.grid_points < 8:
                raise ParameterViolation("--grid must be at least 8")
        if self.fmt not in ("csv", "json"):
            raise ParameterViolation("--format must be csv or json")

    def grid(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.grid_points)


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------


def _read(arg: str) -> str:
    text = arg.strip()
    if text.startswith("{") or text.startswith("["):
        return text
    if not os.path.exists(arg):
        raise ParseError(f"no such file: {arg}")
    with open(arg, encoding="utf-8") as fh:
        return fh.read()


def _load_json(arg: str):
    text = _read(arg)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def load_curve(arg: str) -> HoloCurve:
    return HoloCurve.from_json(_read(arg))


def load_hypersurface(arg: str) -> Hypersurface:
    return Hypersurface.from_dict(_load_json(arg))


def load_arrangement(arg: str) -> Arrangement:
    """``{"n": .., "hyperplanes": [[..], ..]}``, ``{"members": [hypersurface, ..]}`` or a plain list."""
    data = _load_json(arg)
    if isinstance(data, list):
        return Arrangement(tuple(Hypersurface.from_dict(m) for m in data))
    if "hyperplanes" in data:
        vecs = data["hyperplanes"]
        hs = []
        for v in vecs:
            hs.append(Hypersurface.hyperplane([_number(x) for x in v]))
        arr = Arrangement(tuple(hs))
        if "n" in data and int(data["n"]) != arr.n:
            raise ParseError("declared n does not match the hyperplane vectors")
        return arr
    if "members" in data:
        return Arrangement(tuple(Hypersurface.from_dict(m) for m in data["members"]))
    raise ParseError("arrangement JSON needs 'hyperplanes' or 'members'")


def _number(x):
    if isinstance(x, (int, float)):
        return Fraction(x) if isinstance(x, int) else x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return complex(x.replace("i", "j"))
    if isinstance(x, list) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ParseError(f"cannot read coefficient {x!r}")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return obj.numerator if obj.denominator == 1 else str(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_tfr(args, cfg: RunConfig) -> str:
    f = load_curve(args.curve)
    prof = characteristic_T(f, args.d, cfg.grid())
    if cfg.fmt == "json":
        return _json(prof.to_dict())
    return prof.to_csv()


def cmd_count(args, cfg: RunConfig) -> str:
    f = load_curve(args.curve)
    Q = load_hypersurface(args.divisor)
    r = cfg.grid()
    zs = _zero_set_covering(f, Q, cfg.r_max)
    N = counting_N(zs, r)
    Nk = counting_N(zs, r, cfg.trunc) if cfg.trunc else None
    if cfg.fmt == "json":
        out = {
            "origin_order": zs.origin_order,
            "r_max": zs.r_max,
            "zeros": [{"location": [z.location.real, z.location.imag], "order": z.order} for z in zs.records],
            "r": r,
            "N": N.values,
        }
        if Nk is not None:
            out["N_trunc"] = Nk.values
            out["trunc"] = cfg.trunc
        return _json(out)
    header = ["r", "N"] + ([f"N_trunc({cfg.trunc})"] if Nk is not None else [])
    cols = [r, N.values] + ([Nk.values] if Nk is not None else [])
    return _csv(header, zip(*cols))


def cmd_fmt(args, cfg: RunConfig) -> str:
    f = load_curve(args.curve)
    Q = load_hypersurface(args.divisor)
    prof = fmt_residual(f, Q, cfg.grid())
    if cfg.fmt == "json":
        return _json(prof.to_dict())
    return prof.to_csv()


def cmd_smt(args, cfg: RunConfig) -> str:
    f = load_curve(args.curve)
    if args.cartan:
        if not args.arrangement:
            raise ParameterViolation("--cartan needs --arrangement")
        spec = CartanWronskian(load_arrangement(args.arrangement))
    else:
        if not (args.jetdiff and args.divisor and args.m is not None and args.mtilde is not None):
            raise ParameterViolation("the general case needs --jetdiff, --divisor, --m and --mtilde")
        P = GGJetDifferential.from_dict(_load_json(args.jetdiff))
        data = _load_json(args.divisor)
        D = load_arrangement(args.divisor) if isinstance(data, list) or "hyperplanes" in data or "members" in data \
            else Hypersurface.from_dict(data)
        spec = GeneralJetDiff(P, D, args.m, args.mtilde)
    rep = smt_margin(f, spec, cfg.grid(), eps=cfg.eps)
    if cfg.fmt == "json":
        return _json(rep.to_dict())
    t = rep.table()
    body = _csv(["r", "lhs", "counting", "S", "margin"], zip(t["r"], t["lhs"], t["counting"], t["S"], t["margin"]))
    summary = _csv(["tail_clean", "violating_measure", "offset", "error_case"],
                   [[rep.tail_clean, rep.violating_measure, rep.offset, rep.error_case]])
    return body + "\n" + summary


def cmd_defect(args, cfg: RunConfig) -> str:
    f = load_curve(args.curve)
    divisors = [load_hypersurface(d) for d in args.divisor]
    estimates = [defect_estimate(f, Q, args.A, cfg.mu0, cfg.grid()) for Q in divisors]
    defects = [max(0.0, e.liminf_estimate) for e in estimates]
    margin = defect_relation_margin(defects, Fujimoto(f.n, args.rho))
    if cfg.fmt == "json":
        return _json({"estimates": [e.to_dict() for e in estimates], "fujimoto_margin": margin,
                      "rho": args.rho, "mu0": cfg.mu0})
    r = cfg.grid()
    header = ["r"] + [f"ratio_{i}" for i in range(len(estimates))]
    body = _csv(header, zip(r, *[e.ratio_profile.values for e in estimates]))
    summary = _csv(["divisor", "liminf_estimate", "tail_monotone"],
                   [[i, e.liminf_estimate, e.tail_monotone] for i, e in enumerate(estimates)])
    return body + "\n" + summary + "\n" + _csv(["fujimoto_margin"], [[margin]])


def cmd_loglemma(args, cfg: RunConfig) -> str:
    rows = []
    for r in cfg.grid():
        R = r + args.gap if args.gap > 0 else 2 * r
        if args.phi:
            chk = logderiv_bound_check(parse_expr(args.phi), args.l, args.t, args.p, r, R)
        else:
            if not (args.jetdiff and args.curve):
                raise ParameterViolation("loglemma needs --phi, or --jetdiff with --curve")
            P = GGJetDifferential.from_dict(_load_json(args.jetdiff))
            chk = main_lemma_check(P, load_curve(args.curve), args.t, args.p, r, R, twisted=args.twisted)
        rows.append([r, R, chk.lhs, chk.rhs_core, chk.ratio])
    ratios = np.array([row[4] for row in rows])
    spread = float(ratios.max() / ratios.min())
    if cfg.fmt == "json":
        return _json({"rows": [dict(zip(["r", "R", "lhs", "rhs_core", "ratio"], row)) for row in rows],
                      "max_over_min": spread})
    return _csv(["r", "R", "lhs", "rhs_core", "ratio"], rows) + "\n" + _csv(["max_over_min"], [[spread]])


def cmd_degree_bound(args, cfg: RunConfig) -> str:
    rep = brotbek.report(args.n, args.c, args.d, args.beta, args.beta_tilde)
    if cfg.fmt == "json":
        return _json(rep)
    chain = rep["chain"]["checks"]
    rows = [[c["name"], c["lhs"], c["relation"], c["rhs"], c["passed"]] for c in chain]
    head = _csv(["n", "c", "k", "kp", "delta", "r0", "threshold", "degree_bound"],
                [[args.n, args.c, rep["params"]["k"], rep["params"]["kp"], rep["params"]["delta"],
                  rep["params"]["r0"], rep["params"]["threshold"], rep["degree_bound"]]])
    out = head + "\n" + _csv(["check", "lhs", "relation", "rhs", "passed"], rows)
    if "alpha" in rep:
        dec, al = rep["decomposition"], rep["alpha"]
        out += "\n" + _csv(["d", "eps", "r", "r_bound", "alpha_min", "m_alpha", "mt_alpha", "ratio_limit"],
                           [[args.d, dec["eps"], dec["r"], dec["r_bound"], al["alpha_min"], al["m_alpha"],
                             al["mt_alpha"], al["ratio_limit"]]])
    return out


HANDLERS = {
    "tfr": cmd_tfr,
    "count": cmd_count,
    "fmt": cmd_fmt,
    "smt": cmd_smt,
    "defect": cmd_defect,
    "loglemma": cmd_loglemma,
    "degree-bound": cmd_degree_bound,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=64, help="number of radii (>= 8)")
    common.add_argument("--rmin", type=float, default=1.0)
    common.add_argument("--rmax", type=float, default=10.0)
    common.add_argument("--eps", type=float, default=0.5, help="epsilon in the error term")
    common.add_argument("--mu0", type=int, default=1, help="truncation level for defects")
    common.add_argument("--trunc", type=int, default=None, help="truncation level for counting")
    common.add_argument("--precision", choices=("double", "extended"), default="double")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="nevanlab", description="Nevanlinna-theory laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tfr", parents=[common], help="characteristic function profile")
    p.add_argument("--curve", required=True, help="curve JSON file or inline JSON")
    p.add_argument("--d", type=int, default=1, help="twist degree d of O(d)")

    p = sub.add_parser("count", parents=[common], help="zero set and counting functions")
    p.add_argument("--curve", required=True)
    p.add_argument("--divisor", required=True, help="hypersurface JSON {n, d, terms}")

    p = sub.add_parser("fmt", parents=[common], help="first-main-theorem residual")
    p.add_argument("--curve", required=True)
    p.add_argument("--divisor", required=True)

    p = sub.add_parser("smt", parents=[common], help="second-main-theorem margin")
    p.add_argument("--curve", required=True)
    p.add_argument("--cartan", action="store_true", help="Wronskian case with hyperplanes")
    p.add_argument("--arrangement", help="hyperplane arrangement JSON")
    p.add_argument("--jetdiff", help="jet differential JSON (general case)")
    p.add_argument("--divisor", help="boundary divisor (general case)")
    p.add_argument("--m", type=int)
    p.add_argument("--mtilde", type=int)

    p = sub.add_parser("defect", parents=[common], help="defect estimates and relation margin")
    p.add_argument("--curve", required=True)
    p.add_argument("--divisor", required=True, action="append")
    p.add_argument("--A", type=int, default=1, help="degree of the ample bundle A = O(A)")
    p.add_argument("--rho", type=float, default=0.0)

    p = sub.add_parser("loglemma", parents=[common], help="logarithmic-derivative ratio sweep")
    p.add_argument("--phi", help="meromorphic function expression")
    p.add_argument("--jetdiff")
    p.add_argument("--curve")
    p.add_argument("--twisted", action="store_true")
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--t", type=float, default=0.25)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--gap", type=float, default=1.0, help="R = r + gap (0 means R = 2r)")

    p = sub.add_parser("degree-bound", parents=[common], help="exact degree arithmetic report")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--beta", type=int, default=0)
    p.add_argument("--beta-tilde", type=int, default=0)
    return parser


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    previous = config.get_precision()
    try:
        cfg = RunConfig(args.command, args.rmin, args.rmax, args.grid, args.eps, args.mu0, args.trunc,
                        args.precision, args.format, args.seed)
        config.set_precision(cfg.precision)
        out = HANDLERS[args.command](args, cfg)
    except HypothesisViolation as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    except NumericFailure as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 3
    except NevanlabError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 3
    except (ValueError, TypeError) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    finally:
        config.set_precision(previous)
    stdout.write(out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
