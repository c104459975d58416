"""Problem and plan data model: arrangements, instances, pick-n-place plans,
feasibility and cost evaluation, random instance generators, and JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, Footprint, Pose, Workspace, collide, in_workspace
from .weighting import ObjectCharacteristics, heti_weights

# Poses closer than this (per coordinate, and in angle) are considered equal.
POSE_TOL = 1e-6

PP = "pp"  # total number of pick-n-places
TI = "ti"  # total task impedance

OBJECTIVES = (PP, TI)


class GenerationError(RuntimeError):
    """Raised when rejection sampling cannot produce a feasible arrangement."""


class FormatError(ValueError):
    """Raised for malformed instance/plan documents; carries the JSON location."""

    def __init__(self, location: str, message: str):
        self.location = location
        super().__init__(f"{location}: {message}")


def poses_close(a: Pose, b: Pose, tol: float = POSE_TOL) -> bool:
    if abs(a.x - b.x) > tol or abs(a.y - b.y) > tol:
        return False
    dt = abs(a.theta - b.theta)
    return min(dt, TWO_PI - dt) <= tol


@dataclass(frozen=True)
class Instance:
    """A rearrangement problem: workspace, objects, start and goal arrangements."""

    workspace: Workspace
    objects: tuple
    start: tuple
    goal: tuple
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))
        n = len(self.objects)
        if n == 0:
            raise ValueError("instance needs at least one object")
        if len(self.start) != n or len(self.goal) != n:
            raise ValueError("start/goal arrangement length must match object count")

    @property
    def n(self) -> int:
        return len(self.objects)

    def footprints(self) -> list:
        return [c.footprint for c in self.objects]


@dataclass(frozen=True)
class Action:
    """One pick-n-place: move object `obj` to `pose` (tag "goal" or "buffer")."""

    obj: int
    pose: Pose
    tag: str

    def __post_init__(self) -> None:
        if self.tag not in ("goal", "buffer"):
            raise ValueError(f"unknown action tag {self.tag!r}")


@dataclass(frozen=True)
class RearrangementPlan:
    """Ordered pick-n-place sequence from the start to the goal arrangement."""

    actions: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


@dataclass(frozen=True)
class PlanReport:
    """Outcome of validating a plan; falsy when invalid, with the first violation."""

    ok: bool
    index: int | None = None
    kind: str | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_feasible(arrangement, inst: Instance) -> bool:
    """True iff every object is inside the workspace and no two objects collide."""
    if len(arrangement) != inst.n:
        raise ValueError("arrangement length must match object count")
    fps = inst.footprints()
    for fp, pose in zip(fps, arrangement):
        if not in_workspace(fp, pose, inst.workspace):
            return False
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            if collide(fps[i], arrangement[i], fps[j], arrangement[j]):
                return False
    return True


def density(inst: Instance) -> float:
    """Fraction of the workspace area covered by object footprints."""
    return sum(c.footprint.area for c in inst.objects) / inst.workspace.area


def validate_plan(plan: RearrangementPlan, inst: Instance) -> PlanReport:
    """Replay a plan from the start arrangement and report the first violation.

    Every action's target pose must be inside the workspace and collision-free
    against all other objects at their current poses; the final arrangement
    must match the goal within the pose tolerance.
    """
    fps = inst.footprints()
    current = list(inst.start)
    for k, act in enumerate(plan.actions):
        if not (0 <= act.obj < inst.n):
            return PlanReport(False, k, "bad-index", f"action {k}: object index {act.obj} out of range")
        fp = fps[act.obj]
        if not in_workspace(fp, act.pose, inst.workspace):
            return PlanReport(False, k, "out-of-workspace", f"action {k}: object {act.obj} leaves the workspace")
        for j in range(inst.n):
            if j != act.obj and collide(fp, act.pose, fps[j], current[j]):
                return PlanReport(False, k, "collision", f"action {k}: object {act.obj} collides with object {j}")
        current[act.obj] = act.pose
    for i in range(inst.n):
        if not poses_close(current[i], inst.goal[i]):
            return PlanReport(False, None, "wrong-final", f"object {i} does not end at its goal pose")
    return PlanReport(True)


def plan_cost(plan: RearrangementPlan, inst: Instance, objective: str) -> float:
    """Plan cost: action count ("pp") or summed impedance of moved objects ("ti")."""
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    report = validate_plan(plan, inst)
    if not report:
        raise ValueError(f"invalid plan: {report.message}")
    if objective == PP:
        return float(len(plan.actions))
    weights = heti_weights(inst.objects)
    return float(sum(weights[a.obj] for a in plan.actions))


# ---------------------------------------------------------------------------
# Instance generators
# ---------------------------------------------------------------------------

_MAX_ARRANGEMENT_ATTEMPTS = 100_000
_MAX_CONSECUTIVE_FAILURES = 1_000


def _sample_arrangement(rng, footprints, ws: Workspace):
    """Place objects one at a time by rejection sampling; restart the whole
    arrangement after too many consecutive single-object failures."""
    attempts = 0
    while True:
        poses = []
        restart = False
        for fp in footprints:
            consecutive = 0
            while True:
                if attempts >= _MAX_ARRANGEMENT_ATTEMPTS:
                    raise GenerationError(
                        f"could not sample a feasible arrangement in {_MAX_ARRANGEMENT_ATTEMPTS} attempts"
                    )
                attempts += 1
                pose = Pose(rng.uniform(0.0, ws.width), rng.uniform(0.0, ws.height), rng.uniform(0.0, TWO_PI))
                if in_workspace(fp, pose, ws) and not any(
                    collide(fp, pose, f2, p2) for f2, p2 in zip(footprints, poses)
                ):
                    poses.append(pose)
                    break
                consecutive += 1
                if consecutive >= _MAX_CONSECUTIVE_FAILURES:
                    restart = True
                    break
            if restart:
                break
        if not restart:
            return tuple(poses)


def _build_instance(footprints, rng, ws: Workspace, seed: int) -> Instance:
    start = _sample_arrangement(rng, footprints, ws)
    goal = _sample_arrangement(rng, footprints, ws)
    chars = tuple(ObjectCharacteristics(fp) for fp in footprints)
    return Instance(ws, chars, start, goal, seed)


def gen_rand(n: int, rho: float, seed: int, ws: Workspace | None = None) -> Instance:
    """Random instance: each object is a rectangle or ellipse with aspect ratio
    uniform in [1, 3]; raw areas uniform in [0.05, 1] are rescaled so the total
    covered fraction equals rho. Deterministic for a given seed."""
    if n < 1:
        raise ValueError("need at least one object")
    if not 0.0 < rho < 1.0:
        raise ValueError("density must lie in (0, 1)")
    ws = ws or Workspace(10.0, 10.0)
    rng = np.random.default_rng(seed)
    is_ellipse = rng.integers(0, 2, size=n)
    aspects = rng.uniform(1.0, 3.0, size=n)
    raw_areas = rng.uniform(0.05, 1.0, size=n)
    areas = raw_areas * (rho * ws.area / raw_areas.sum())
    footprints = []
    for ell, q, area in zip(is_ellipse, aspects, areas):
        if ell:
            b = math.sqrt(area / (math.pi * q))
            footprints.append(Footprint.ellipse(q * b, b))
        else:
            short = math.sqrt(area / q)
            footprints.append(Footprint.rectangle(q * short, short))
    return _build_instance(footprints, rng, ws, seed)


def gen_sq(n: int, rho: float, seed: int, ws: Workspace | None = None) -> Instance:
    """Squares instance: two large squares and n-2 small squares with a 9:1
    area ratio, total covered fraction rho. Deterministic for a given seed."""
    if n < 3:
        raise ValueError("squares scenario needs at least 3 objects")
    if not 0.0 < rho < 1.0:
        raise ValueError("density must lie in (0, 1)")
    ws = ws or Workspace(10.0, 10.0)
    rng = np.random.default_rng(seed)
    small_area = rho * ws.area / (n + 16)
    large_side = math.sqrt(9.0 * small_area)
    small_side = math.sqrt(small_area)
    footprints = [Footprint.rectangle(large_side, large_side) for _ in range(2)]
    footprints += [Footprint.rectangle(small_side, small_side) for _ in range(n - 2)]
    return _build_instance(footprints, rng, ws, seed)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def _require(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise FormatError(path, "expected an object")
    if key not in doc:
        raise FormatError(path, f"missing field '{key}'")
    return doc[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(path, "expected a number")
    return float(value)


def _pose_from_list(value, path: str) -> Pose:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise FormatError(path, "expected [x, y, theta]")
    return Pose(*(_number(v, f"{path}[{i}]") for i, v in enumerate(value)))


def _footprint_to_dict(fp: Footprint) -> dict:
    if fp.kind == "rect":
        return {"shape": "rect", "w": fp.params[0], "h": fp.params[1]}
    if fp.kind == "ellipse":
        return {"shape": "ellipse", "a": fp.params[0], "b": fp.params[1]}
    if fp.kind == "disc":
        return {"shape": "disc", "r": fp.params[0]}
    return {"shape": "poly", "vertices": [[x, y] for x, y in fp.params]}


def _footprint_from_dict(doc: dict, path: str) -> Footprint:
    shape = _require(doc, "shape", path)
    try:
        if shape == "rect":
            return Footprint.rectangle(_number(_require(doc, "w", path), f"{path}.w"),
                                       _number(_require(doc, "h", path), f"{path}.h"))
        if shape == "ellipse":
            return Footprint.ellipse(_number(_require(doc, "a", path), f"{path}.a"),
                                     _number(_require(doc, "b", path), f"{path}.b"))
        if shape == "disc":
            return Footprint.disc(_number(_require(doc, "r", path), f"{path}.r"))
        if shape == "poly":
            verts = _require(doc, "vertices", path)
            if not isinstance(verts, list) or len(verts) < 3:
                raise FormatError(f"{path}.vertices", "expected a list of at least 3 [x, y] pairs")
            pts = []
            for i, v in enumerate(verts):
                if not isinstance(v, (list, tuple)) or len(v) != 2:
                    raise FormatError(f"{path}.vertices[{i}]", "expected [x, y]")
                pts.append((_number(v[0], f"{path}.vertices[{i}][0]"),
                            _number(v[1], f"{path}.vertices[{i}][1]")))
            return Footprint.polygon(pts)
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(path, str(exc)) from exc
    raise FormatError(f"{path}.shape", f"unknown shape {shape!r}")


def instance_to_dict(inst: Instance) -> dict:
    objects = []
    for c in inst.objects:
        entry = _footprint_to_dict(c.footprint)
        if c.mass is not None:
            entry["mass"] = c.mass
        if c.impedance is not None:
            entry["impedance"] = c.impedance
        objects.append(entry)
    return {
        "workspace": {"w": inst.workspace.width, "h": inst.workspace.height},
        "objects": objects,
        "start": [[p.x, p.y, p.theta] for p in inst.start],
        "goal": [[p.x, p.y, p.theta] for p in inst.goal],
        "seed": inst.seed,
    }


def instance_from_dict(doc: dict) -> Instance:
    ws_doc = _require(doc, "workspace", "$")
    ws = Workspace(_number(_require(ws_doc, "w", "$.workspace"), "$.workspace.w"),
                   _number(_require(ws_doc, "h", "$.workspace"), "$.workspace.h"))
    objects_doc = _require(doc, "objects", "$")
    if not isinstance(objects_doc, list) or not objects_doc:
        raise FormatError("$.objects", "expected a nonempty list")
    chars = []
    for i, entry in enumerate(objects_doc):
        path = f"$.objects[{i}]"
        fp = _footprint_from_dict(entry, path)
        mass = entry.get("mass")
        imp = entry.get("impedance")
        chars.append(ObjectCharacteristics(
            fp,
            None if mass is None else _number(mass, f"{path}.mass"),
            None if imp is None else _number(imp, f"{path}.impedance"),
        ))
    def read_arrangement(key: str):
        arr_doc = _require(doc, key, "$")
        if not isinstance(arr_doc, list) or len(arr_doc) != len(chars):
            raise FormatError(f"$.{key}", f"expected a list of {len(chars)} poses")
        return tuple(_pose_from_list(p, f"$.{key}[{i}]") for i, p in enumerate(arr_doc))
    start = read_arrangement("start")
    goal = read_arrangement("goal")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise FormatError("$.seed", "expected an integer")
    return Instance(ws, tuple(chars), start, goal, seed)


def plan_to_dict(plan: RearrangementPlan) -> dict:
    return {"actions": [{"obj": a.obj, "pose": [a.pose.x, a.pose.y, a.pose.theta], "tag": a.tag}
                        for a in plan.actions]}


def plan_from_dict(doc: dict) -> RearrangementPlan:
    actions_doc = _require(doc, "actions", "$")
    if not isinstance(actions_doc, list):
        raise FormatError("$.actions", "expected a list")
    actions = []
    for i, entry in enumerate(actions_doc):
        path = f"$.actions[{i}]"
        obj = _require(entry, "obj", path)
        if isinstance(obj, bool) or not isinstance(obj, int):
            raise FormatError(f"{path}.obj", "expected an integer")
        pose = _pose_from_list(_require(entry, "pose", path), f"{path}.pose")
        tag = _require(entry, "tag", path)
        if tag not in ("goal", "buffer"):
            raise FormatError(f"{path}.tag", f"expected 'goal' or 'buffer', got {tag!r}")
        actions.append(Action(obj, pose, tag))
    return RearrangementPlan(tuple(actions))


def _load_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc


def instance_to_json(inst: Instance, indent: int | None = 2) -> str:
    return json.dumps(instance_to_dict(inst), indent=indent)


def instance_from_json(text: str) -> Instance:
    return instance_from_dict(_load_json(text))


def plan_to_json(plan: RearrangementPlan, indent: int | None = 2) -> str:
    return json.dumps(plan_to_dict(plan), indent=indent)


def plan_from_json(text: str) -> RearrangementPlan:
    return plan_from_dict(_load_json(text))


def load_instance(path) -> Instance:
    with open(path) as f:
        return instance_from_json(f.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as f:
        f.write(instance_to_json(inst) + "\n")


def load_plan(path) -> RearrangementPlan:
    with open(path) as f:
        return plan_from_json(f.read())


def save_plan(plan: RearrangementPlan, path) -> None:
    with open(path, "w") as f:
        f.write(plan_to_json(plan) + "\n")
