"""Command-line interface: ``mdvrp gen|solve|verify|lp-bound|bench``."""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from pathlib import Path

from .baselines import hkm_tree_splitting, lsl_tour_splitting
from .certify import check_feasible
from .exact import TooLargeError, brute_force_opt
from .instance import (Instance, ParseError, generate_random, parse_instance, parse_solution,
                       radial_lb, split_zero_radial, write_instance, write_solution)
from .lp import solve_lp_cutting_plane
from .pipeline import PipelineError, prepare, round_once
from .sampling import DEFAULT_GAMMA

ALGOS = ("lp-round", "tree-split", "tour-split", "brute")
BENCH_ALGOS = ("lp-round", "tree-split", "tour-split")
BENCH_COLUMNS = ("instance", "algorithm", "cost", "opt_lp", "lb", "ratio_to_lp", "wall_time")


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_instance(path: str) -> Instance:
    try:
        return parse_instance(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except ParseError as e:
        raise UsageError(f"{path}: {e}") from None


def solve(inst: Instance, algo: str, seed: int = 0, gamma: float = DEFAULT_GAMMA):
    """Run one algorithm; returns ``(solution, ledger lines)``."""
    if algo == "lp-round":
        run = round_once(prepare(inst, gamma=gamma), seed)
        lines = [f"algo\t{algo}", f"method\t{run.method}", f"seed\t{seed}", f"gamma\t{gamma}"]
        if run.certificate is not None:
            lines += run.certificate.as_lines()
        return run.solution, lines
    if algo == "tree-split":
        res = hkm_tree_splitting(inst)
        return res.solution, [f"algo\t{algo}", f"forest_cost\t{res.forest_cost}", f"lb\t{res.lb}",
                              f"bound\t{res.bound}", f"total\t{res.solution.cost}"]
    if algo == "tour-split":
        res = lsl_tour_splitting(inst)
        return res.solution, [f"algo\t{algo}", f"tsp_cost\t{res.tsp_cost}",
                              f"paths_cost\t{res.paths_cost}", f"lb\t{res.lb}",
                              f"bound\t{res.bound}", f"total\t{res.solution.cost}"]
    if algo == "brute":
        sol = brute_force_opt(inst)
        return sol, [f"algo\t{algo}", f"lb\t{radial_lb(inst)}", f"total\t{sol.cost}"]
    raise UsageError(f"unknown algorithm {algo!r}")


def cmd_gen(args) -> int:
    try:
        inst = generate_random(args.seed, args.clients, args.depots, args.k, args.mode, args.clusters)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(f"# generated seed {args.seed} mode {args.mode}\n" + write_instance(inst), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    if not 0 < args.gamma <= 0.5:
        raise UsageError("--gamma must lie in (0, 0.5]")
    try:
        sol, ledger = solve(inst, args.algo, args.seed, args.gamma)
    except (TooLargeError, PipelineError, AssertionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    header = f"# algo {args.algo} seed {args.seed}"
    if args.algo == "lp-round":
        header += f" gamma {args.gamma}"
    _emit(header + "\n" + write_solution(sol), args.out)
    if args.certify:
        stream = sys.stdout if args.out else sys.stderr
        for line in ledger:
            print(line, file=stream)
    problems = check_feasible(inst, sol)
    for p in problems:
        print(f"violation: {p}", file=sys.stderr)
    return 1 if problems else 0


def cmd_verify(args) -> int:
    inst = _read_instance(args.instance)
    try:
        sol = parse_solution(Path(args.solution).read_text(), inst)
    except OSError as e:
        raise UsageError(f"cannot read {args.solution}: {e.strerror}") from None
    except ParseError as e:
        print(f"invalid solution: {e}", file=sys.stderr)
        return 1
    problems = check_feasible(inst, sol)
    for p in problems:
        print(f"violation: {p}")
    if not problems:
        print(f"feasible\t{len(sol.tours)} tours\tcost {sol.cost:.6f}")
    return 1 if problems else 0


def cmd_lp_bound(args) -> int:
    inst = _read_instance(args.instance)
    reduced, _ = split_zero_radial(inst)
    if reduced.k < 3:
        raise UsageError("the LP bound is implemented for k >= 3")
    if reduced.n == 0:
        print("opt_lp 0.0\ndelta 0.0")
        return 0
    sol = solve_lp_cutting_plane(reduced, tol=args.tol)
    print(f"opt_lp {sol.objective!r}")
    print(f"delta {sol.delta!r}")
    return 0


def _seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--seeds expects a comma-separated integer list, got {text!r}") from None


def bench_rows(paths: list[Path], seeds: list[int], gamma: float = DEFAULT_GAMMA):
    for path in paths:
        inst = parse_instance(path.read_text())
        lb = radial_lb(inst)
        start = time.perf_counter()
        prep = prepare(inst, gamma=gamma)
        prep_time = time.perf_counter() - start
        opt_lp = prep.lp.objective if prep.lp is not None else math.nan
        for algo in BENCH_ALGOS:
            start = time.perf_counter()
            if algo == "lp-round":
                costs = [round_once(prep, s).cost for s in seeds]
                cost = math.fsum(costs) / len(costs)
                wall = prep_time + time.perf_counter() - start
            else:
                cost = solve(inst, algo)[0].cost
                wall = time.perf_counter() - start
            ratio = cost / opt_lp if opt_lp > 0 else math.nan
            yield (path.stem, algo, f"{cost:.6f}", f"{opt_lp:.6f}", f"{lb:.6f}",
                   f"{ratio:.6f}", f"{wall:.3f}")


def cmd_bench(args) -> int:
    suite = Path(args.suite)
    if not suite.is_dir():
        raise UsageError(f"suite directory {suite} not found")
    paths = sorted(suite.glob("*.mdvrp"))
    if not paths:
        raise UsageError(f"no *.mdvrp instances in {suite}")
    seeds = _seeds(args.seeds)
    if not seeds:
        raise UsageError("--seeds is empty")
    handle = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(BENCH_COLUMNS)
        for row in bench_rows(paths, seeds, args.gamma):
            writer.writerow(row)
            handle.flush()
    finally:
        if handle is not sys.stdout:
            handle.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdvrp", description="Multi-depot capacitated vehicle routing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--clients", type=int, required=True)
    p.add_argument("--depots", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=("euclidean-uniform", "euclidean-clustered"),
                   default="euclidean-uniform")
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("instance")
    p.add_argument("--algo", choices=ALGOS, default="lp-round")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--certify", action="store_true", help="print the cost ledger as key<TAB>value")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lp-bound", help="print the LP lower bound and delta")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=1e-7, help="cut separation tolerance")
    p.set_defaults(func=cmd_lp_bound)

    p = sub.add_parser("bench", help="benchmark all algorithms over a directory of instances")
    p.add_argument("--suite", required=True)
    p.add_argument("--seeds", default="0")
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
