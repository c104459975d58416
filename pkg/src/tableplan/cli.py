"""Command-line interface: instance generation, planning, benchmarking, and
SVG rendering.

Exit codes: 0 success, 1 planning failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import sys

from . import bench, render
from .geometry import Workspace
from .instance import (FormatError, GenerationError, is_feasible, load_instance,
                       load_plan, save_instance, save_plan)


def _parse_list(text: str, cast):
    return [cast(part) for part in text.split(",") if part]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tableplan",
                                     description="Tabletop rearrangement planning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--scenario", choices=bench.SCENARIOS, default="rand")
    gen.add_argument("-n", type=int, required=True, help="number of objects")
    gen.add_argument("--rho", type=float, required=True, help="workspace density in (0,1)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--width", type=float, default=10.0)
    gen.add_argument("--height", type=float, default=10.0)
    gen.add_argument("--out", required=True, help="output instance JSON path")

    plan = sub.add_parser("plan", help="plan a rearrangement for an instance file")
    plan.add_argument("--instance", required=True)
    plan.add_argument("--mode", choices=bench.ALL_MODES, default="etbm")
    plan.add_argument("--objective", choices=["pp", "ti"], default="pp")
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--time-limit", type=float, default=None)
    plan.add_argument("--out", default=None, help="output plan JSON path")

    bn = sub.add_parser("bench", help="run a benchmark grid and write a CSV")
    bn.add_argument("--scenario", choices=bench.SCENARIOS, default="rand")
    bn.add_argument("--n", required=True, help="comma-separated object counts")
    bn.add_argument("--rho", required=True, help="comma-separated densities")
    bn.add_argument("--modes", default="etbm,tbm", help="comma-separated planner modes")
    bn.add_argument("--objective", choices=["pp", "ti"], default="pp")
    bn.add_argument("--trials", type=int, default=5)
    bn.add_argument("--time-limit", type=float, default=60.0)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--workers", type=int, default=1)
    bn.add_argument("--csv", required=True, help="output CSV path")

    rd = sub.add_parser("render", help="render an instance (and optional plan) to SVG")
    rd.add_argument("--instance", required=True)
    rd.add_argument("--plan", default=None)
    rd.add_argument("--out", required=True,
                    help="SVG path (instance only) or frame directory (with a plan)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            inst = bench.generate(args.scenario, args.n, args.rho, args.seed,
                                  Workspace(args.width, args.height))
            save_instance(inst, args.out)
            print(f"wrote {args.out}")
            return 0

        if args.command == "plan":
            inst = load_instance(args.instance)
            if not is_feasible(inst.start, inst) or not is_feasible(inst.goal, inst):
                print("error: instance start/goal arrangement is infeasible", file=sys.stderr)
                return 2
            plan = bench.run_planner(inst, args.mode, args.objective, args.seed, args.time_limit)
            if plan is None:
                print("planning failed", file=sys.stderr)
                return 1
            if args.out:
                save_plan(plan, args.out)
                print(f"wrote {args.out} ({len(plan.actions)} actions)")
            else:
                print(f"plan with {len(plan.actions)} actions")
            return 0

        if args.command == "bench":
            records, aggregates = bench.run_suite(
                args.scenario, _parse_list(args.n, int), _parse_list(args.rho, float),
                _parse_list(args.modes, str), args.objective, args.trials,
                args.time_limit, args.seed, args.workers)
            with open(args.csv, "w") as f:
                f.write(bench.suite_to_csv(records, aggregates))
            print(f"wrote {args.csv} ({len(records)} trial rows)")
            return 0

        if args.command == "render":
            inst = load_instance(args.instance)
            plan = load_plan(args.plan) if args.plan else None
            paths = render.render(inst, plan, args.out)
            print(f"wrote {len(paths)} file(s)")
            return 0
    except (FormatError, GenerationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
