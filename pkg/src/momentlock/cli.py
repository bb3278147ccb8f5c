"""Command-line front end.

Each subcommand writes deterministic JSON (single solves) or CSV (sweeps)
with floats printed to 17 significant digits. Exit codes: 0 success,
2 configuration error, 3 infeasible moments, 4 solver failure, 5 oracle
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import functions
from .density import Density, expectation_oracle, parse_density
from .diagnostics import chebyshev_fit, convergence_study, discretize
from .errors import (ConfigError, InfeasibleMoments, InvalidParams,
                     MomentLockError, NoConvergence)
from .maxent import SolverConfig, kl_divergence, solve_dual
from .moments import named, polynomial, targets_from_density
from .portfolio import PortfolioProblem, solve_portfolio

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SOLVER, EXIT_ORACLE = 0, 2, 3, 4, 5

DEFAULTS: Dict[str, Any] = {
    "density": "uniform",
    "rule": "trapezoid",
    "M": "4",
    "L": "2",
    "g": "exp_x",
    "moments": None,
    "degrees": "2,4,6",
    "gamma": 3.0,
    "mu": 0.07,
    "sigma": 0.2,
    "r": 0.01,
    "kappa": 1e-7,
    "stop_tol": 1e-10,
    "max_iters": 200,
    "fit_min_M": None,
    "n": 1000,
    "size": 10,
    "seed": 0,
    "out": "-",
}


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def to_json(obj, indent: int = 0) -> str:
    """JSON with every float written as ``%.17g``."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}" if items else "{}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    s = fmt(obj)
    # JSON has no nan/inf literals
    return s if s not in ("nan", "inf", "-inf") else json.dumps(s)


def parse_ints(text) -> List[int]:
    """``"6"``, ``"1,4,9"`` or ``"1..12"`` into a list of ints."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    out: List[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise ConfigError(f"cannot parse integer list {text!r}") from None
    if not out:
        raise ConfigError(f"empty integer list {text!r}")
    return out


def _threads() -> int:
    env = os.environ.get("MOMENTLOCK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("MOMENTLOCK_THREADS must be an integer") from None
    return os.cpu_count() or 1


def parallel_map(fn, items):
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def solver_config(opts) -> SolverConfig:
    try:
        return SolverConfig(kappa=float(opts["kappa"]), stop_tol=float(opts["stop_tol"]),
                            max_iters=int(opts["max_iters"]))
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None


def _density(opts) -> Density:
    try:
        return parse_density(opts["density"])
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None


def write_csv(out, header: Sequence[str], rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    out.write(buf.getvalue())


def cmd_discretize(opts, out):
    d = _density(opts)
    Ms = parse_ints(opts["M"])
    Ls = parse_ints(opts["L"])
    if len(Ms) != 1 or len(Ls) != 1:
        raise ConfigError("discretize takes a single M and L")
    M, L = Ms[0], Ls[0]
    q = discretize(d, opts["rule"], M)
    T = named(opts["moments"].split(",")) if opts.get("moments") else polynomial(L)
    sol = solve_dual(q, T, targets_from_density(d, T), solver_config(opts))
    payload = {
        "density": d.name, "rule": opts["rule"], "M": M, "L": T.L,
        "moments": T.to_dict(),
        "points": q.points, "q": q.probs, "p": sol.probs, "lambda": sol.lam,
        "kl": sol.kl, "residual": sol.moment_residual,
        "iterations": sol.iterations, "on_boundary": sol.on_boundary,
    }
    out.write(to_json(payload) + "\n")


def cmd_convergence(opts, out):
    d = _density(opts)
    g = functions.lookup(opts["g"])
    Ms = parse_ints(opts["M"])
    Ls = parse_ints(opts["L"])
    cfg = solver_config(opts)
    exact = expectation_oracle(d, g)
    fit_min = int(opts["fit_min_M"]) if opts.get("fit_min_M") else None
    studies = parallel_map(
        lambda L: convergence_study(d, g, opts["rule"], L, Ms, cfg, fit_min, exact), Ls)
    header = ["L", "M", "I_M", "e_q", "e_p", "kl", "pinsker_bound",
              "moment_residual", "status"]
    rows = []
    for L, st in zip(Ls, studies):
        for r in st.rows:
            rows.append([L, r.M, r.I_M, r.e_q, r.e_p, r.kl, r.pinsker_bound,
                         r.moment_residual, r.status])
        print(f"L={L}: slope e_q {st.slopes['e_q']:.3f}"
              + (f", e_p {st.slopes['e_p']:.3f}" if "e_p" in st.slopes else ""),
              file=sys.stderr)
    write_csv(out, header, rows)


def cmd_chebyshev(opts, out):
    names = list(functions.REGISTRY) if opts["g"] in (None, "all") else opts["g"].split(",")
    degrees = parse_ints(opts["degrees"])
    rows = []
    for name in names:
        g = functions.lookup(name)
        for L in degrees:
            fit = chebyshev_fit(g, (0.0, 1.0), L)
            rows.append([name, L, fit.sup_residual, fit.log10_residual])
    write_csv(out, ["function", "degree", "sup_residual", "log10_residual"], rows)


def cmd_portfolio(opts, out):
    """Table of optimal portfolios; errors are relative to the largest-M,
    largest-L cell rounded to four decimals."""
    Ms = parse_ints(opts["M"])
    Ls = parse_ints(opts["L"])
    cells = [(M, L) for M in Ms for L in Ls]

    def run_cell(cell):
        M, L = cell
        try:
            prob = PortfolioProblem(float(opts["gamma"]), float(opts["mu"]),
                                    float(opts["sigma"]), float(opts["r"]), M, L,
                                    opts["rule"])
        except InvalidParams as exc:
            raise ConfigError(str(exc)) from None
        try:
            return solve_portfolio(prob, reference=None).theta
        except InfeasibleMoments as exc:
            return type(exc).__name__

    thetas = parallel_map(run_cell, cells)
    ref = dict(zip(cells, thetas)).get((max(Ms), max(Ls)))
    ref = round(ref, 4) if isinstance(ref, float) else None
    rows = []
    for (M, L), th in zip(cells, thetas):
        if isinstance(th, str):
            rows.append([M, 2 * M + 1, L, None, None, th])
        else:
            rel = 100 * (th - ref) / ref if ref else None
            rows.append([M, 2 * M + 1, L, th, rel, "ok"])
    write_csv(out, ["M", "I_M", "L", "theta", "rel_error_percent", "status"], rows)


def cmd_pinsker(opts, out):
    rng = np.random.default_rng(int(opts["seed"]))
    n, size = int(opts["n"]), int(opts["size"])
    slack = []
    for _ in range(n):
        p = rng.dirichlet(np.ones(size))
        q = rng.dirichlet(np.ones(size))
        slack.append(kl_divergence(p, q) - 0.5 * np.abs(p - q).sum() ** 2)
    slack = np.asarray(slack)
    write_csv(out, ["pairs", "size", "seed", "violations", "min_slack"],
              [[n, size, int(opts["seed"]), int(np.sum(slack < 0)), float(slack.min())]])
    if np.any(slack < 0):
        raise MomentLockError("Pinsker inequality violated")


COMMANDS = {
    "discretize": cmd_discretize,
    "convergence": cmd_convergence,
    "chebyshev": cmd_chebyshev,
    "portfolio": cmd_portfolio,
    "pinsker-check": cmd_pinsker,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="momentlock", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option values; explicit flags win")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--kappa", type=float, help="Newton regularizer")
    common.add_argument("--stop-tol", dest="stop_tol", type=float, help="step-norm stop tolerance")
    common.add_argument("--max-iters", dest="max_iters", type=int)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discretize", parents=[common], help="single maxent solve (JSON)")
    p.add_argument("--density")
    p.add_argument("--rule", choices=["trapezoid", "simpson"])
    p.add_argument("--M")
    p.add_argument("--L")
    p.add_argument("--moments", help="comma-separated named components instead of x^l")

    p = sub.add_parser("convergence", parents=[common], help="error sweep over M (CSV)")
    p.add_argument("--density")
    p.add_argument("--rule", choices=["trapezoid", "simpson"])
    p.add_argument("--g", help=f"test function: {', '.join(functions.REGISTRY)}")
    p.add_argument("--L", help="moment orders, e.g. 2,4,6")
    p.add_argument("--M", help="grid indices, e.g. 1..12")
    p.add_argument("--fit-min-M", dest="fit_min_M", type=int)

    p = sub.add_parser("chebyshev", parents=[common], help="Chebyshev residual table (CSV)")
    p.add_argument("--g", help="function names or 'all'")
    p.add_argument("--degrees")

    p = sub.add_parser("portfolio", parents=[common], help="optimal portfolio table (CSV)")
    for name in ("gamma", "mu", "sigma", "r"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--M")
    p.add_argument("--L")
    p.add_argument("--rule", choices=["trapezoid", "simpson"])

    p = sub.add_parser("pinsker-check", parents=[common], help="random Pinsker inequality check")
    p.add_argument("--n", type=int)
    p.add_argument("--size", type=int)
    p.add_argument("--seed", type=int)
    return parser


def resolve_options(args: argparse.Namespace) -> Dict[str, Any]:
    opts = dict(DEFAULTS)
    if args.command == "chebyshev":
        opts["g"] = "all"
    if args.command == "portfolio":
        opts.update(M="1,4,9,16,25", L="0,2,4")
    if args.command == "convergence":
        opts.update(M="1..12", L="2,4,6")
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        opts.update({k.replace("-", "_"): v for k, v in cfg.items()})
    opts.update({k: v for k, v in vars(args).items() if v is not None})
    return opts


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        if opts["out"] in (None, "-"):
            COMMANDS[args.command](opts, sys.stdout)
        else:
            buf = io.StringIO()
            COMMANDS[args.command](opts, buf)
            with open(opts["out"], "w", newline="") as fh:
                fh.write(buf.getvalue())
    except (ConfigError, InvalidParams) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleMoments as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoConvergence as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except MomentLockError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
