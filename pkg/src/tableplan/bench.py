"""Benchmark harness: seeded batch generation, planner execution under a
per-case time limit, metric aggregation, and CSV output."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import mcts, trlb
from .instance import PP, TI, OBJECTIVES, Instance, RearrangementPlan, gen_rand, gen_sq, plan_cost
from .geometry import Workspace

SCENARIOS = ("rand", "sq")
ALL_MODES = trlb.TRLB_MODES + mcts.MCTS_MODES

CSV_COLUMNS = ("scenario", "n", "rho", "mode", "objective", "trial", "seed",
               "success", "plan_len", "len_per_obj", "ti_cost", "time_s")


def generate(scenario: str, n: int, rho: float, seed: int, ws: Workspace | None = None) -> Instance:
    scenario = scenario.lower()
    if scenario == "rand":
        return gen_rand(n, rho, seed, ws)
    if scenario == "sq":
        return gen_sq(n, rho, seed, ws)
    raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


def run_planner(inst: Instance, mode: str, objective: str, seed: int,
                time_limit: float | None) -> RearrangementPlan | None:
    """Dispatch one planning run; returns the plan or None on failure."""
    mode = mode.lower()
    if mode in trlb.TRLB_MODES:
        return trlb.plan(inst, objective, mode, seed, time_limit).plan
    if mode in mcts.MCTS_MODES:
        cfg = mcts.MCTSConfig(time_budget=time_limit, seed=seed)
        return mcts.search(inst, objective, mode, cfg).plan
    raise ValueError(f"unknown mode {mode!r}; expected one of {ALL_MODES}")


@dataclass(frozen=True)
class TrialRecord:
    scenario: str
    n: int
    rho: float
    mode: str
    objective: str
    trial: int
    seed: int
    success: bool
    plan_len: int | None
    len_per_obj: float | None
    ti_cost: float | None
    time_s: float

    def row(self) -> dict:
        return {
            "scenario": self.scenario,
            "n": self.n,
            "rho": f"{self.rho:g}",
            "mode": self.mode,
            "objective": self.objective,
            "trial": self.trial,
            "seed": self.seed,
            "success": int(self.success),
            "plan_len": "" if self.plan_len is None else self.plan_len,
            "len_per_obj": "" if self.len_per_obj is None else f"{self.len_per_obj:.6f}",
            "ti_cost": "" if self.ti_cost is None else f"{self.ti_cost:.6f}",
            "time_s": f"{self.time_s:.3f}",
        }


def _trial_seed(master: int, cell_index: int, trial: int) -> int:
    # deterministic, collision-free for the grid sizes used here
    return (master * 1_000_003 + cell_index) * 4_099 + trial


def _run_trial(args) -> TrialRecord:
    scenario, n, rho, mode, objective, trial, seed, time_limit = args
    inst = generate(scenario, n, rho, seed)
    t0 = time.perf_counter()
    try:
        plan = run_planner(inst, mode, objective, seed, time_limit)
    except Exception:
        plan = None  # a planner crash counts as a failed trial
    elapsed = time.perf_counter() - t0
    if plan is None:
        return TrialRecord(scenario, n, rho, mode, objective, trial, seed,
                           False, None, None, None, elapsed)
    return TrialRecord(scenario, n, rho, mode, objective, trial, seed, True,
                       len(plan.actions), len(plan.actions) / n,
                       plan_cost(plan, inst, TI), elapsed)


def run_suite(scenario: str, ns, rhos, modes, objective: str, trials: int,
              time_limit: float | None, seed: int, workers: int = 1):
    """Run the full grid; all modes in a cell share the same instances.

    Returns (records, aggregate_rows): per-trial TrialRecords in deterministic
    (cell, trial, mode) order plus one aggregate row per (cell, mode) with
    success rate and means over the successful trials.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    modes = [m.lower() for m in modes]
    for m in modes:
        if m not in ALL_MODES:
            raise ValueError(f"unknown mode {m!r}; expected one of {ALL_MODES}")
    tasks = []
    for ci, (n, rho) in enumerate((n, rho) for n in ns for rho in rhos):
        for trial in range(trials):
            t_seed = _trial_seed(seed, ci, trial)
            for mode in modes:
                tasks.append((scenario.lower(), n, rho, mode, objective, trial, t_seed, time_limit))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, tasks))
    else:
        records = [_run_trial(t) for t in tasks]

    aggregates = []
    for n in ns:
        for rho in rhos:
            for mode in modes:
                cell = [r for r in records if r.n == n and r.rho == rho and r.mode == mode]
                done = [r for r in cell if r.success]
                agg = {
                    "scenario": scenario.lower(),
                    "n": n,
                    "rho": f"{rho:g}",
                    "mode": mode,
                    "objective": objective,
                    "trial": "mean",
                    "seed": "",
                    "success": f"{len(done) / len(cell):.4f}" if cell else "",
                    "plan_len": f"{sum(r.plan_len for r in done) / len(done):.4f}" if done else "",
                    "len_per_obj": f"{sum(r.len_per_obj for r in done) / len(done):.6f}" if done else "",
                    "ti_cost": f"{sum(r.ti_cost for r in done) / len(done):.6f}" if done else "",
                    "time_s": f"{sum(r.time_s for r in done) / len(done):.3f}" if done else "",
                }
                aggregates.append(agg)
    return records, aggregates


def suite_to_csv(records, aggregates) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.row())
    for row in aggregates:
        writer.writerow(row)
    return out.getvalue()
