"""Command-line entry point.

Exit codes: 0 success, 2 malformed input, 3 solver error, 4 policy space too
large for enumeration.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .documents import load_mdp, num, report_to_document, save_mdp
from .errors import InvalidModel, MvmdpError, PolicySpaceTooLarge
from .global_opt import Algorithm, SolveOptions, local_sweep, pareto_frontier, solve, solve_global
from .inventory import InventoryParams, build_inventory_mdp
from .mdp_core import Mdp, Mode
from .pseudo_mv import solve_auxiliary
from .sensitivity import classify_fixed_points, enumerate_segments

log = logging.getLogger("mvmdp")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_TOO_LARGE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidModel(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_inventory_flags(p, capacity=True):
    if capacity:
        p.add_argument("--capacity", type=int, default=4)
    p.add_argument("--p", type=float, default=0.6, help="binomial demand success probability")
    p.add_argument("--b", type=float, default=1.0, help="unit ordering cost")
    p.add_argument("--h", type=float, default=0.7, help="unit holding cost")
    p.add_argument("--l", type=float, default=2.9, help="unit shortage cost")


def _add_instance_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="MDP document (JSON)")
    src.add_argument("--bench", choices=["inventory"], help="built-in benchmark")
    _add_inventory_flags(p)
    p.add_argument("--beta", type=float, default=None,
                   help="variance weight (default: document value, or 10 for the benchmark)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.MEAN_VARIANCE.value)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvmdp", description="Global mean-variance optimization for unichain MDPs")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="find an optimal deterministic policy")
    _add_instance_flags(p)
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm], default=Algorithm.GLOBAL.value)
    p.add_argument("--y0", type=float, default=None, help="starting pseudo mean for --algorithm local")
    p.add_argument("--max-policies", type=int, default=10**6, help="enumeration cap for --algorithm brute")
    p.add_argument("--output", type=Path, default=None, help="report path (default: stdout)")

    p = sub.add_parser("curve", help="sample the optimal auxiliary value over the reward range")
    _add_instance_flags(p)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--segments", action="store_true", help="also write the exact segment decomposition")
    p.add_argument("--output-prefix", type=str, default="curve")

    p = sub.add_parser("frontier", help="optimal (mean, variance) pairs over a grid of beta")
    _add_instance_flags(p)
    p.add_argument("--beta-grid", type=_floats, required=True)
    p.add_argument("--algorithm", choices=["global", "global-plus", "brute"], default="global")
    p.add_argument("--output", type=Path, default=None)

    p = sub.add_parser("compare", help="global, global-plus and multi-start local across capacities")
    p.add_argument("--capacities", type=_ints, default=[4, 7, 10])
    _add_inventory_flags(p, capacity=False)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--y0-grid", type=str, default="50",
                   help="number of uniform starting points, or an explicit comma-separated list")
    p.add_argument("--output", type=Path, default=None)

    p = sub.add_parser("bench", help="write a benchmark instance as an MDP document")
    _add_inventory_flags(p)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--output", type=Path, required=True)
    return parser


def _inventory(args, capacity: Optional[int] = None, beta: Optional[float] = None) -> Mdp:
    params = InventoryParams(
        capacity=args.capacity if capacity is None else capacity,
        p=args.p, order_cost=args.b, holding_cost=args.h, shortage_cost=args.l,
        beta=10.0 if beta is None else beta,
    )
    return build_inventory_mdp(params)


def _instance(args) -> Mdp:
    if args.bench:
        return _inventory(args, beta=args.beta)
    mdp = load_mdp(args.input)
    return mdp if args.beta is None else mdp.with_beta(args.beta)


def _write_text(path: Optional[Path], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _write_csv(path: Optional[Path], header, rows) -> None:
    if path is None:
        out = sys.stdout
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_solve(args) -> int:
    mdp = _instance(args)
    opts = SolveOptions(algorithm=args.algorithm, mode=args.mode, y0=args.y0, max_policies=args.max_policies)
    t0 = time.perf_counter()
    rep = solve(mdp, opts)
    elapsed = (time.perf_counter() - t0) * 1e3
    doc = report_to_document(rep, mdp, elapsed)
    _write_text(args.output, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_curve(args) -> int:
    mdp = _instance(args)
    mode = Mode(args.mode)
    if args.samples < 1:
        raise InvalidModel("--samples must be positive")
    bounds = mdp.reward_bounds()
    ys = np.linspace(bounds.lo, bounds.hi, args.samples)
    rows = []
    warm = None
    for y in ys:
        aux = solve_auxiliary(mdp, y, warm_start=warm, mode=mode)
        warm = aux.policy
        rows.append((num(y), num(aux.pseudo_objective)))
    prefix = args.output_prefix
    _write_csv(Path(f"{prefix}_samples.csv"), ["y", "eta_tilde_star"], rows)
    if args.segments:
        segs = enumerate_segments(mdp, mode)
        _write_csv(Path(f"{prefix}_segments.csv"), ["k", "y_lo", "y_hi", "eta_k", "mu_k"],
                   [(k, num(s.lo), num(s.hi), num(s.objective), num(s.mean)) for k, s in enumerate(segs)])
        _write_csv(Path(f"{prefix}_fixed_points.csv"), ["y", "kind"],
                   [(num(fp.y), fp.kind) for fp in classify_fixed_points(segs)])
    return EXIT_OK


def _check_frontier(points) -> list[str]:
    problems = []
    order = sorted(points, key=lambda p: p.beta)
    for a, b in zip(order, order[1:]):
        if b.beta > a.beta and (b.variance > a.variance + 1e-9 or b.mean > a.mean + 1e-9):
            problems.append(f"frontier not monotone between beta={a.beta} and beta={b.beta}")
    return problems


def cmd_frontier(args) -> int:
    mdp = _instance(args)
    points = pareto_frontier(mdp, args.beta_grid, Algorithm(args.algorithm))
    for msg in _check_frontier(points):
        log.warning(msg)
    _write_csv(args.output, ["beta", "mu", "sigma", "eta"],
               [(num(p.beta), num(p.mean), num(p.variance), num(p.objective)) for p in points])
    return EXIT_OK


def _y0_grid(text: str, mdp: Mdp) -> np.ndarray:
    bounds = mdp.reward_bounds()
    if "," not in text:
        try:
            n = int(text)
        except ValueError:
            raise InvalidModel(f"--y0-grid must be a count or a list, got {text!r}") from None
        if n < 1:
            raise InvalidModel("--y0-grid count must be positive")
        return np.linspace(bounds.lo, bounds.hi, n)
    try:
        values = np.array(_floats(text))
    except argparse.ArgumentTypeError as exc:
        raise InvalidModel(str(exc)) from None
    return np.clip(values, bounds.lo, bounds.hi)


def cmd_compare(args) -> int:
    rows = []
    for C in args.capacities:
        mdp = _inventory(args, capacity=C, beta=args.beta)
        g = solve_global(mdp, SolveOptions(algorithm=Algorithm.GLOBAL))
        gp = solve_global(mdp, SolveOptions(algorithm=Algorithm.GLOBAL_PLUS))
        local = [r.objective for r in local_sweep(mdp, _y0_grid(args.y0_grid, mdp))]
        rows.append((C, num(mdp.beta), num(g.objective), g.aux_solves, num(gp.objective), gp.aux_solves,
                     num(min(local)), num(max(local)), ";".join(f"{v:.12g}" for v in local)))
    _write_csv(args.output, ["capacity", "beta", "global_eta", "global_aux_solves", "plus_eta",
                             "plus_aux_solves", "local_eta_min", "local_eta_max", "local_etas"], rows)
    return EXIT_OK


def cmd_bench(args) -> int:
    save_mdp(_inventory(args, beta=args.beta), args.output)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "curve": cmd_curve, "frontier": cmd_frontier,
            "compare": cmd_compare, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except InvalidModel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except PolicySpaceTooLarge as exc:
        print(f"error: PolicySpaceTooLarge: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except (InvalidModel, OSError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MvmdpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
