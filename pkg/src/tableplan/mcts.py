"""Monte Carlo tree search over arrangements: UCB selection with optional
per-object weight scaling of the exploration constant, a reduced action space
(objects already at their goals generate no actions), and objective-dependent
rewards."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import depgraph
from .geometry import TWO_PI, Pose, collide, convex_polygons_collide, in_workspace, transform
from .instance import (PP, TI, OBJECTIVES, Action, Instance, RearrangementPlan,
                       poses_close, validate_plan)
from .timing import Deadline
from .weighting import hecp_weights, heti_weights

MCTS_MODES = ("mcts", "emcts")


def _rng(seed: int, *extra: int):
    return np.random.default_rng([seed % (2 ** 63), *extra])


@dataclass(frozen=True)
class MCTSAction:
    """A search-tree action: move `moved` to `pose` to advance object
    `beneficiary` (either `moved` itself going to its goal, or a blocker of
    `beneficiary`'s goal pose being relocated)."""

    moved: int
    pose: Pose
    tag: str
    beneficiary: int


@dataclass
class MCTSConfig:
    exploration: float = 1.0
    iterations: int = 2_000_000
    time_budget: float | None = None
    rollout_depth: int | None = None  # defaults to 2n
    relocation_samples: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.exploration <= 0.0:
            raise ValueError("exploration constant must be positive")
        if self.iterations <= 0:
            raise ValueError("iteration budget must be positive")
        if self.time_budget is not None and self.time_budget <= 0.0:
            raise ValueError("time budget must be positive")


class SearchNode:
    """Tree node over one arrangement with visit count and cumulative reward."""

    __slots__ = ("arrangement", "at_goal", "visits", "total_reward", "actions",
                 "children", "expanded")

    def __init__(self, arrangement, at_goal):
        self.arrangement = arrangement
        self.at_goal = at_goal
        self.visits = 0
        self.total_reward = 0.0
        self.actions = None
        self.children = None
        self.expanded = False

    @property
    def solved(self) -> bool:
        return all(self.at_goal)


class _Scene:
    """Per-search collision helper: caches world polygons keyed by (object,
    pose) and runs bounding-disc culling before any narrow-phase test."""

    __slots__ = ("inst", "fps", "radii", "ws", "dep", "polys")

    def __init__(self, inst: Instance, dep):
        self.inst = inst
        self.fps = inst.footprints()
        self.radii = [fp.bounding_radius for fp in self.fps]
        self.ws = inst.workspace
        self.dep = dep
        self.polys = {}

    def poly(self, i: int, pose: Pose):
        key = (i, pose)
        p = self.polys.get(key)
        if p is None:
            p = transform(self.fps[i], pose)
            self.polys[key] = p
        return p

    def pair_collides(self, i: int, pose_i: Pose, j: int, pose_j: Pose) -> bool:
        dx = pose_i.x - pose_j.x
        dy = pose_i.y - pose_j.y
        reach = self.radii[i] + self.radii[j]
        if dx * dx + dy * dy > reach * reach:
            return False
        return convex_polygons_collide(self.poly(i, pose_i), self.poly(j, pose_j))

    def inside(self, i: int, pose: Pose) -> bool:
        r = self.radii[i]
        if r <= pose.x <= self.ws.width - r and r <= pose.y <= self.ws.height - r:
            return True
        return in_workspace(self.fps[i], pose, self.ws)

    def goal_blockers(self, i: int, arrangement, at_start, at_goal) -> list:
        """Objects overlapping object i's goal pose in the given arrangement.

        Objects still at their start pose use the precomputed dependency arcs;
        objects at goal poses can never block another goal pose."""
        goal_pose = self.inst.goal[i]
        blockers = []
        for j in range(self.inst.n):
            if j == i or at_goal[j]:
                continue
            if at_start[j]:
                if j in self.dep.arcs[i]:
                    blockers.append(j)
            elif self.pair_collides(i, goal_pose, j, arrangement[j]):
                blockers.append(j)
        return blockers

    def sample_free_pose(self, obj: int, arrangement, rng, samples: int,
                         clear_goal_of: int | None = None) -> Pose | None:
        """Uniform rejection sampling of a collision-free pose for one object;
        with `clear_goal_of` set, the pose must also leave that object's goal
        pose unobstructed (otherwise the relocation would be pointless)."""
        for _ in range(samples):
            cand = Pose(rng.uniform(0.0, self.ws.width), rng.uniform(0.0, self.ws.height),
                        rng.uniform(0.0, TWO_PI))
            if not self.inside(obj, cand):
                continue
            if any(j != obj and self.pair_collides(obj, cand, j, arrangement[j])
                   for j in range(self.inst.n)):
                continue
            if clear_goal_of is not None and self.pair_collides(
                    obj, cand, clear_goal_of, self.inst.goal[clear_goal_of]):
                continue
            return cand
        return None


def _at_goal_flags(arrangement, inst: Instance):
    return tuple(poses_close(p, g) for p, g in zip(arrangement, inst.goal))


def _at_start_flags(arrangement, inst: Instance):
    return tuple(poses_close(p, s) for p, s in zip(arrangement, inst.start))


def legal_actions(arrangement, inst: Instance, rng, dep=None, samples: int = 100,
                  scene: _Scene | None = None) -> list:
    """Actions available from an arrangement.

    For every object away from its goal: move it to its goal pose when that
    pose is free, otherwise relocate each object currently overlapping the goal
    pose to a freshly sampled collision-free pose. Relocations whose sampling
    budget finds no free pose are omitted. Objects already at their goals
    generate no actions.
    """
    if scene is None:
        scene = _Scene(inst, dep if dep is not None else depgraph.build(inst, [1.0] * inst.n))
    at_goal = _at_goal_flags(arrangement, inst)
    at_start = _at_start_flags(arrangement, inst)
    actions: list = []
    for i in range(inst.n):
        if at_goal[i]:
            continue
        blockers = scene.goal_blockers(i, arrangement, at_start, at_goal)
        if not blockers:
            actions.append(MCTSAction(i, inst.goal[i], "goal", i))
            continue
        for j in blockers:
            pose = scene.sample_free_pose(j, arrangement, rng, samples, clear_goal_of=i)
            if pose is not None:
                actions.append(MCTSAction(j, pose, "buffer", i))
    return actions


def reward(arrangement, inst: Instance, weights, objective: str) -> float:
    """Progress reward: number of objects at goal ("pp") or their summed
    impedance weights ("ti")."""
    flags = _at_goal_flags(arrangement, inst)
    if objective == PP:
        return float(sum(flags))
    return float(sum(w for w, f in zip(weights, flags) if f))


def ucb_select(node: SearchNode, weights, cfg: MCTSConfig, weighted: bool = True) -> int:
    """Index of the child to follow from an expanded node.

    Unvisited children come first (in action order, i.e. lowest object index);
    otherwise pick the argmax of mean reward plus the exploration bonus, with
    the constant scaled by C*(1 + w_i / sum(w)) for the beneficiary object when
    `weighted` is set.
    """
    children = node.children
    for idx, child in enumerate(children):
        if child is None or child.visits == 0:
            return idx
    total_w = sum(weights)
    log_term = 2.0 * math.log(node.visits)
    best_idx = 0
    best_score = -math.inf
    for idx, (act, child) in enumerate(zip(node.actions, children)):
        c = cfg.exploration
        if weighted and total_w > 0.0:
            c *= 1.0 + weights[act.beneficiary] / total_w
        score = child.total_reward / child.visits + c * math.sqrt(log_term / child.visits)
        if score > best_score:
            best_score = score
            best_idx = idx
    return best_idx


@dataclass(frozen=True)
class SearchResult:
    plan: RearrangementPlan | None
    best_reward: float
    best_arrangement: tuple
    iterations: int
    root: SearchNode | None = None

    @property
    def success(self) -> bool:
        return self.plan is not None


def _extract_plan(taken, inst: Instance) -> RearrangementPlan:
    current = list(inst.start)
    actions = []
    for act in taken:
        if poses_close(current[act.moved], act.pose):
            continue  # no-op move
        actions.append(Action(act.moved, act.pose, act.tag))
        current[act.moved] = act.pose
    return RearrangementPlan(tuple(actions))


def search(inst: Instance, objective: str = PP, mode: str = "emcts",
           cfg: MCTSConfig | None = None) -> SearchResult:
    """Run the tree search until a node reaches the goal arrangement or the
    iteration/time budget expires. Deterministic given the config seed."""
    cfg = cfg or MCTSConfig()
    mode = mode.lower()
    if mode not in MCTS_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MCTS_MODES}")
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    n = inst.n
    weighted = mode == "emcts"
    if weighted:
        ucb_weights = (hecp_weights(list(inst.objects), inst.workspace) if objective == PP
                       else heti_weights(list(inst.objects)))
    else:
        ucb_weights = [1.0] * n
    heti = heti_weights(list(inst.objects)) if objective == TI else None
    dep = depgraph.build(inst, [1.0] * n)
    scene = _Scene(inst, dep)
    rollout_depth = cfg.rollout_depth if cfg.rollout_depth is not None else 2 * n
    deadline = Deadline(cfg.time_budget)
    rng = _rng(cfg.seed, 0x3C75)

    goal_flags = _at_goal_flags(inst.start, inst)
    root = SearchNode(tuple(inst.start), goal_flags)
    if root.solved:
        return SearchResult(RearrangementPlan(()), reward(root.arrangement, inst, heti, objective),
                            root.arrangement, 0, root)

    def state_reward(at_goal_flags) -> float:
        if objective == PP:
            return float(sum(at_goal_flags))
        return float(sum(w for w, f in zip(heti, at_goal_flags) if f))

    def expand(node: SearchNode) -> None:
        node.actions = legal_actions(node.arrangement, inst, rng, dep,
                                     cfg.relocation_samples, scene)
        node.children = [None] * len(node.actions)
        node.expanded = True

    def rollout(start_arrangement, start_flags):
        """Goal-greedy random playout: free goal moves are pure progress and are
        taken first (uniformly), otherwise a uniformly chosen blocker is
        relocated. Returns (max reward seen, action list if the playout reached
        the goal arrangement, final arrangement)."""
        current = list(start_arrangement)
        at_goal = list(start_flags)
        at_start = [poses_close(p, s) for p, s in zip(current, inst.start)]
        best = state_reward(at_goal)
        trace: list = []
        for _ in range(rollout_depth):
            goal_slots = []
            blocker_slots = []
            for i in range(n):
                if at_goal[i]:
                    continue
                blockers = scene.goal_blockers(i, current, at_start, at_goal)
                if not blockers:
                    goal_slots.append(i)
                else:
                    blocker_slots.extend((i, j) for j in blockers)
            act = None
            if goal_slots:
                moved = goal_slots[int(rng.integers(len(goal_slots)))]
                act = MCTSAction(moved, inst.goal[moved], "goal", moved)
            else:
                while blocker_slots:
                    k = int(rng.integers(len(blocker_slots)))
                    i, j = blocker_slots[k]
                    pose = scene.sample_free_pose(j, current, rng, cfg.relocation_samples,
                                                  clear_goal_of=i)
                    if pose is not None:
                        act = MCTSAction(j, pose, "buffer", i)
                        break
                    del blocker_slots[k]
            if act is None:
                break
            trace.append(act)
            current[act.moved] = act.pose
            at_goal[act.moved] = poses_close(act.pose, inst.goal[act.moved])
            at_start[act.moved] = poses_close(act.pose, inst.start[act.moved])
            r = state_reward(at_goal)
            if r > best:
                best = r
            if all(at_goal):
                return best, trace, tuple(current)
        return best, None, tuple(current)

    best_reward = state_reward(goal_flags)
    best_arrangement = root.arrangement
    iterations = 0
    for _ in range(cfg.iterations):
        if deadline.expired():
            break
        node = root
        path = [root]
        taken: list = []
        value = None
        while True:
            if not node.expanded:
                expand(node)
            if not node.actions:
                value = state_reward(node.at_goal)  # dead end
                break
            idx = ucb_select(node, ucb_weights, cfg, weighted)
            act = node.actions[idx]
            child = node.children[idx]
            if child is None:
                arrangement = list(node.arrangement)
                arrangement[act.moved] = act.pose
                arrangement = tuple(arrangement)
                child = SearchNode(arrangement, _at_goal_flags(arrangement, inst))
                node.children[idx] = child
                path.append(child)
                taken.append(act)
                if child.solved:
                    plan = _extract_plan(taken, inst)
                    if not validate_plan(plan, inst):
                        raise RuntimeError("internal error: search produced an invalid plan")
                    return SearchResult(plan, state_reward(child.at_goal),
                                        child.arrangement, iterations, root)
                value, trace, tail_arr = rollout(child.arrangement, child.at_goal)
                if trace is not None:
                    # graft the solving playout into the tree and return its path
                    tip = child
                    current = list(child.arrangement)
                    for act in trace:
                        current[act.moved] = act.pose
                        nxt = SearchNode(tuple(current), _at_goal_flags(current, inst))
                        tip.actions = [act]
                        tip.children = [nxt]
                        tip.expanded = True
                        tip = nxt
                        taken.append(act)
                    plan = _extract_plan(taken, inst)
                    if not validate_plan(plan, inst):
                        raise RuntimeError("internal error: search produced an invalid plan")
                    return SearchResult(plan, state_reward(tip.at_goal),
                                        tip.arrangement, iterations, root)
                break
            node = child
            path.append(child)
            taken.append(act)
        for nd in path:
            nd.visits += 1
            nd.total_reward += value
        iterations += 1
        tail = path[-1]
        r_tail = state_reward(tail.at_goal)
        if r_tail > best_reward:
            best_reward = r_tail
            best_arrangement = tail.arrangement
    return SearchResult(None, best_reward, best_arrangement, iterations, root)
