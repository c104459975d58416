"""Two-step rearrangement planner: a symbolic primitive plan from the weighted
dependency graph (total-buffer or running-buffer minimization), lazy binding of
buffer poses by rejection sampling, and a bidirectional partial-plan
concatenation fallback for hard instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .depgraph import DependencyGraph, build, min_weight_fvs, scc
from .geometry import TWO_PI, Pose, in_workspace, collide
from .instance import (PP, TI, OBJECTIVES, Action, Instance, RearrangementPlan,
                       poses_close, validate_plan)
from .timing import Deadline, PlanningTimeout
from .weighting import hecp_weights, heti_weights

TRLB_MODES = ("etbm", "erbm", "tbm", "rbm")

_BUFFER_SAMPLES = 500   # candidate poses per to-buffer action
_REBIND_ATTEMPTS = 10   # full re-binding passes before giving up
_FRONTIER_CAP = 50      # nodes kept per bidirectional tree


def _rng(seed: int, *extra: int):
    return np.random.default_rng([seed % (2 ** 63), *extra])


@dataclass(frozen=True)
class PrimitiveAction:
    """Symbolic step: send object `obj` to a buffer or to its goal pose."""

    obj: int
    kind: str  # "goal" | "buffer"


@dataclass(frozen=True)
class PrimitivePlan:
    """Ordered primitive actions plus the achieved buffer metric (total buffer
    weight for TBM-style plans, peak concurrent buffer weight for RBM-style)."""

    actions: tuple
    metric: float


@dataclass(frozen=True)
class PartialPlan:
    """A bound action prefix together with the arrangement it reaches."""

    actions: tuple
    arrangement: tuple


@dataclass(frozen=True)
class AllocationFailure:
    """Buffer binding failed at primitive action `index`; carries the longest
    successfully bound prefix."""

    index: int
    partial: PartialPlan


@dataclass(frozen=True)
class PlanResult:
    plan: RearrangementPlan | None
    partial: PartialPlan | None = None

    @property
    def success(self) -> bool:
        return self.plan is not None


# ---------------------------------------------------------------------------
# Primitive plan computation
# ---------------------------------------------------------------------------


def primitive_plan_etbm(g: DependencyGraph, deadline: Deadline | None = None) -> PrimitivePlan:
    """Primitive plan minimizing the total weight of objects sent to buffers.

    The buffer set is an exact minimum-weight feedback vertex set; buffer moves
    are emitted lazily when a dependent goal move first needs them, remaining
    goal moves follow the dependency order of the residual acyclic graph, and
    buffered objects go to their goals at the end.
    """
    deadline = deadline or Deadline.never()
    fvs = min_weight_fvs(g, deadline)
    fvs_set = set(fvs)
    left_start: set = set()
    buffered: set = set()
    actions: list = []
    remaining = list(range(g.n))

    def emit_goal(v: int) -> None:
        actions.append(PrimitiveAction(v, "goal"))
        left_start.add(v)
        remaining.remove(v)

    while remaining:
        deadline.check()
        # prefer goal moves that need no new buffers (keeps occupancy windows short)
        pick = next((v for v in remaining if all(j in left_start for j in g.arcs[v])), None)
        if pick is not None:
            emit_goal(pick)
            continue
        # otherwise buffer the feedback-set dependencies of the first ready vertex
        pick = next((v for v in remaining if v not in fvs_set
                     and all(j in fvs_set or j in left_start for j in g.arcs[v])), None)
        if pick is None:
            # only mutually-blocking feedback vertices remain: buffer the smallest
            pick = next(v for v in remaining if v not in buffered)
            actions.append(PrimitiveAction(pick, "buffer"))
            buffered.add(pick)
            left_start.add(pick)
            continue
        for f in sorted(j for j in g.arcs[pick] if j in fvs_set and j not in left_start):
            actions.append(PrimitiveAction(f, "buffer"))
            buffered.add(f)
            left_start.add(f)
        emit_goal(pick)

    metric = sum(g.weights[v] for v in buffered)
    return PrimitivePlan(tuple(actions), metric)


def _integerize(weights, resolution: int) -> list:
    mean_w = sum(weights) / len(weights)
    if mean_w <= 0.0:
        return [1] * len(weights)
    return [max(1, round(w * resolution / mean_w)) for w in weights]


def _rbm_component(comp, g: DependencyGraph, hat, deadline: Deadline):
    """Minimal running-buffer plan for one strongly connected component via
    iterative deepening on the integer buffer budget and memoized
    depth-first search over (at-start, at-buffer) states."""
    local = {v: k for k, v in enumerate(comp)}
    m = len(comp)
    dep_mask = [0] * m   # out-neighbors inside the component (must leave start first)
    in_mask = [0] * m    # objects whose goal move waits on this start pose
    for k, v in enumerate(comp):
        for w in g.arcs[v]:
            if w in local:
                dep_mask[k] |= 1 << local[w]
                in_mask[local[w]] |= 1 << k
    w_local = [hat[v] for v in comp]
    full = (1 << m) - 1

    def normalize(start_mask, buffer_mask, load, out_actions):
        # a legal goal move never hurts: apply them eagerly, lowest index first
        while True:
            movable = start_mask | buffer_mask
            k = 0
            moved = False
            mm = movable
            while mm:
                if mm & 1 and dep_mask[k] & start_mask == 0:
                    bit = 1 << k
                    if start_mask & bit:
                        start_mask &= ~bit
                    else:
                        buffer_mask &= ~bit
                        load -= w_local[k]
                    out_actions.append(PrimitiveAction(comp[k], "goal"))
                    moved = True
                    break
                mm >>= 1
                k += 1
            if not moved:
                return start_mask, buffer_mask, load

    def solve(budget: int):
        visited = set()

        def dfs(start_mask, buffer_mask, load):
            deadline.check()
            if start_mask == 0 and buffer_mask == 0:
                return []
            key = (start_mask, buffer_mask)
            if key in visited:
                return None
            visited.add(key)
            pending = start_mask | buffer_mask
            mm = start_mask
            k = 0
            while mm:
                # only buffer objects whose start pose still blocks a pending goal
                if mm & 1 and in_mask[k] & pending and load + w_local[k] <= budget:
                    bit = 1 << k
                    seq = [PrimitiveAction(comp[k], "buffer")]
                    s2, b2, l2 = normalize(start_mask & ~bit, buffer_mask | bit,
                                           load + w_local[k], seq)
                    rest = dfs(s2, b2, l2)
                    if rest is not None:
                        return seq + rest
                mm >>= 1
                k += 1
            return None

        prefix: list = []
        s0, b0, l0 = normalize(full, 0, 0, prefix)
        if s0 == 0 and b0 == 0:
            return prefix
        rest = dfs(s0, b0, l0)
        return None if rest is None else prefix + rest

    # iterative deepening from zero so light objects can be buffered without
    # ever admitting a heavier concurrent load than necessary
    for budget in range(0, sum(w_local) + 1):
        seq = solve(budget)
        if seq is not None:
            return seq, _peak_load(seq, {v: hat[v] for v in comp})
    raise AssertionError("running-buffer search must succeed at the total-weight budget")


def _peak_load(actions, hat) -> int:
    load = 0
    peak = 0
    at_buffer = set()
    for a in actions:
        if a.kind == "buffer":
            load += hat[a.obj]
            at_buffer.add(a.obj)
            peak = max(peak, load)
        elif a.obj in at_buffer:
            load -= hat[a.obj]
            at_buffer.discard(a.obj)
    return peak


def primitive_plan_erbm(g: DependencyGraph, resolution: int = 4,
                        deadline: Deadline | None = None) -> PrimitivePlan:
    """Primitive plan minimizing the peak concurrent buffer weight.

    Weights are scaled by resolution/mean and rounded to integers (at least 1)
    so the budget search stays integral; components are solved independently in
    dependency order, and the metric is the peak integer load actually reached.
    """
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    deadline = deadline or Deadline.never()
    hat = _integerize(g.weights, resolution)
    actions: list = []
    achieved = 0
    for comp in scc(g):
        if len(comp) == 1:
            actions.append(PrimitiveAction(comp[0], "goal"))
            continue
        seq, peak = _rbm_component(comp, g, hat, deadline)
        actions.extend(seq)
        achieved = max(achieved, peak)
    return PrimitivePlan(tuple(actions), float(achieved))


# ---------------------------------------------------------------------------
# Buffer allocation
# ---------------------------------------------------------------------------


def allocate_buffers(inst: Instance, prim: PrimitivePlan, seed: int,
                     deadline: Deadline | None = None,
                     samples_per_action: int = _BUFFER_SAMPLES,
                     rebind_attempts: int = _REBIND_ATTEMPTS):
    """Bind buffer poses by rejection sampling; returns a RearrangementPlan or
    an AllocationFailure with the longest valid prefix.

    A candidate buffer pose must lie inside the workspace, avoid the current
    arrangement, and avoid the goal poses of objects whose goal moves execute
    while the buffered object occupies it. Goal moves that would be no-ops
    (object already at its goal pose) are dropped from the bound plan.
    """
    deadline = deadline or Deadline.never()
    fps = inst.footprints()
    ws = inst.workspace
    acts = prim.actions
    # occupancy window: from each buffer action to the same object's next move
    window_end = {}
    for k, act in enumerate(acts):
        if act.kind != "buffer":
            continue
        window_end[k] = next((k2 for k2 in range(k + 1, len(acts)) if acts[k2].obj == act.obj),
                             len(acts))
    best_failure: AllocationFailure | None = None
    for attempt in range(rebind_attempts):
        deadline.check()
        rng = _rng(seed, 0xA110C, attempt)
        bound: list = []
        current = list(inst.start)
        failed_at: int | None = None
        for k, act in enumerate(acts):
            deadline.check()
            o = act.obj
            fp = fps[o]
            if act.kind == "goal":
                target = inst.goal[o]
                blocked = any(j != o and collide(fp, target, fps[j], current[j])
                              for j in range(inst.n))
                if blocked or not in_workspace(fp, target, ws):
                    failed_at = k  # cannot happen for a consistent primitive plan
                    break
                if not poses_close(current[o], target):
                    bound.append(Action(o, target, "goal"))
                    current[o] = target
                continue
            window = [(fps[acts[k2].obj], inst.goal[acts[k2].obj])
                      for k2 in range(k + 1, window_end[k]) if acts[k2].kind == "goal"]
            pose = None
            for _ in range(samples_per_action):
                cand = Pose(rng.uniform(0.0, ws.width), rng.uniform(0.0, ws.height),
                            rng.uniform(0.0, TWO_PI))
                if not in_workspace(fp, cand, ws):
                    continue
                if any(j != o and collide(fp, cand, fps[j], current[j]) for j in range(inst.n)):
                    continue
                if any(collide(fp, cand, gfp, gpose) for gfp, gpose in window):
                    continue
                pose = cand
                break
            if pose is None:
                failed_at = k
                break
            bound.append(Action(o, pose, "buffer"))
            current[o] = pose
        if failed_at is None:
            plan = RearrangementPlan(tuple(bound))
            if validate_plan(plan, inst):
                return plan
            failed_at = 0
            bound = []
            current = list(inst.start)
        if best_failure is None or failed_at > best_failure.index:
            best_failure = AllocationFailure(failed_at, PartialPlan(tuple(bound), tuple(current)))
    return best_failure


# ---------------------------------------------------------------------------
# Full planner
# ---------------------------------------------------------------------------


def _mode_weights(inst: Instance, mode: str, objective: str) -> list:
    if mode in ("tbm", "rbm"):
        return [1.0] * inst.n
    if objective == PP:
        return hecp_weights(list(inst.objects), inst.workspace)
    return heti_weights(list(inst.objects))


def _primitive(g: DependencyGraph, mode: str, resolution: int, deadline: Deadline) -> PrimitivePlan:
    if mode in ("etbm", "tbm"):
        return primitive_plan_etbm(g, deadline)
    return primitive_plan_erbm(g, resolution, deadline)


def _pipeline(inst: Instance, start, goal, weights, mode: str, resolution: int,
              seed: int, deadline: Deadline):
    """One two-step attempt between arbitrary feasible arrangements."""
    sub = Instance(inst.workspace, inst.objects, start, goal, inst.seed)
    g = build(sub, weights)
    prim = _primitive(g, mode, resolution, deadline)
    return allocate_buffers(sub, prim, seed, deadline)


def _retag(actions, inst: Instance) -> list:
    """Re-express action tags against the true goal arrangement, snapping
    near-goal targets to the exact goal pose."""
    out = []
    for a in actions:
        gp = inst.goal[a.obj]
        if poses_close(a.pose, gp):
            out.append(Action(a.obj, gp, "goal"))
        else:
            out.append(Action(a.obj, a.pose, "buffer"))
    return out


def _reverse_actions(start_arrangement, actions) -> list:
    """Reverse a valid pick-n-place sequence: replayed backwards, each action
    returns its object to the pose held just before the forward action."""
    current = list(start_arrangement)
    pre = []
    for a in actions:
        pre.append(current[a.obj])
        current[a.obj] = a.pose
    return [Action(a.obj, p, "buffer") for a, p in zip(reversed(actions), reversed(pre))]


def _push(tree: list, node) -> None:
    tree.append(node)
    if len(tree) > _FRONTIER_CAP:
        del tree[1]  # evict the oldest non-root node


def _random_relocation(inst: Instance, arrangement, rng, tries: int = 40):
    """One uniformly sampled valid pick-n-place from an arrangement, or None."""
    fps = inst.footprints()
    ws = inst.workspace
    n = inst.n
    for _ in range(tries):
        o = int(rng.integers(n))
        cand = Pose(rng.uniform(0.0, ws.width), rng.uniform(0.0, ws.height),
                    rng.uniform(0.0, TWO_PI))
        if not in_workspace(fps[o], cand, ws):
            continue
        if any(j != o and collide(fps[o], cand, fps[j], arrangement[j]) for j in range(n)):
            continue
        return o, cand
    return None


def _bidirectional(inst: Instance, weights, mode: str, resolution: int, seed: int,
                   deadline: Deadline, first_partial: PartialPlan | None) -> PlanResult:
    """Grow partial-plan trees from both ends; connect a forward and a backward
    frontier arrangement whenever a pipeline attempt between them succeeds."""
    rng = _rng(seed, 0xB1D1)
    fwd = [(tuple(inst.start), ())]
    bwd = [(tuple(inst.goal), ())]
    best_partial = first_partial
    if first_partial is not None and first_partial.actions:
        fwd.append((first_partial.arrangement, tuple(first_partial.actions)))

    def attempt(start_arr, goal_arr):
        sub_seed = int(rng.integers(2 ** 62))
        return _pipeline(inst, start_arr, goal_arr, weights, mode, resolution, sub_seed, deadline)

    def assemble(prefix, middle, suffix):
        candidate = RearrangementPlan(tuple(_retag(list(prefix) + list(middle) + list(suffix), inst)))
        return candidate if validate_plan(candidate, inst) else None

    while not deadline.expired():
        f_arr, f_acts = fwd[int(rng.integers(len(fwd)))]
        b_arr, b_acts = bwd[int(rng.integers(len(bwd)))]
        try:
            outcome = attempt(f_arr, b_arr)
        except PlanningTimeout:
            break
        if isinstance(outcome, RearrangementPlan):
            plan = assemble(f_acts, outcome.actions, b_acts)
            if plan is not None:
                return PlanResult(plan)
        elif outcome.partial.actions:
            _push(fwd, (outcome.partial.arrangement, f_acts + tuple(outcome.partial.actions)))
            if best_partial is None or len(f_acts) + len(outcome.partial.actions) > len(best_partial.actions):
                best_partial = PartialPlan(f_acts + tuple(outcome.partial.actions),
                                           outcome.partial.arrangement)

        # grow the backward tree with reversed pick-n-places
        f_arr, f_acts = fwd[int(rng.integers(len(fwd)))]
        b_arr, b_acts = bwd[int(rng.integers(len(bwd)))]
        try:
            outcome = attempt(b_arr, f_arr)
        except PlanningTimeout:
            break
        if isinstance(outcome, RearrangementPlan):
            plan = assemble(f_acts, _reverse_actions(b_arr, outcome.actions), b_acts)
            if plan is not None:
                return PlanResult(plan)
        elif outcome.partial.actions:
            rev = _reverse_actions(b_arr, outcome.partial.actions)
            _push(bwd, (outcome.partial.arrangement, tuple(rev) + b_acts))

        # diversify both trees with one random valid relocation each, so the
        # search keeps making progress even when pipeline prefixes are empty
        f_arr, f_acts = fwd[int(rng.integers(len(fwd)))]
        move = _random_relocation(inst, f_arr, rng)
        if move is not None:
            o, pose = move
            arr = list(f_arr)
            arr[o] = pose
            _push(fwd, (tuple(arr), f_acts + (Action(o, pose, "buffer"),)))
        b_arr, b_acts = bwd[int(rng.integers(len(bwd)))]
        move = _random_relocation(inst, b_arr, rng)
        if move is not None:
            o, pose = move
            arr = list(b_arr)
            back = Action(o, b_arr[o], "buffer")  # reversed: return o to its pose
            arr[o] = pose
            _push(bwd, (tuple(arr), (back,) + b_acts))
    return PlanResult(None, best_partial)


def plan(inst: Instance, objective: str = PP, mode: str = "etbm", seed: int = 0,
         time_budget: float | None = None, resolution: int = 4) -> PlanResult:
    """Plan a rearrangement with the requested primitive-plan mode.

    Modes "etbm"/"erbm" weight the dependency graph (collision-probability
    weights for the "pp" objective, impedance weights for "ti"); "tbm"/"rbm"
    are the uniform-weight baselines. Falls back to bidirectional partial-plan
    concatenation when direct buffer binding fails. Deterministic given seed.
    """
    mode = mode.lower()
    if mode not in TRLB_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {TRLB_MODES}")
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    deadline = Deadline(time_budget)
    weights = _mode_weights(inst, mode, objective)
    try:
        g = build(inst, weights)
        prim = _primitive(g, mode, resolution, deadline)
        outcome = allocate_buffers(inst, prim, seed, deadline)
    except PlanningTimeout:
        return PlanResult(None)
    if isinstance(outcome, RearrangementPlan):
        return PlanResult(outcome)
    return _bidirectional(inst, weights, mode, resolution, seed, deadline, outcome.partial)
