"""Weighted dependency graph over objects: construction from start/goal pose
overlaps, strongly connected components, and an exact minimum-weight feedback
vertex set solver."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .geometry import convex_polygons_collide, transform
from .instance import Instance
from .timing import Deadline

# Weight differences at or below this are treated as ties and broken by the
# lexicographically smallest vertex-index set.
_TIE_EPS = 1e-12


@dataclass(frozen=True)
class DependencyGraph:
    """Digraph with one weighted vertex per object; arc i -> j means object i's
    goal pose overlaps object j's start pose (i must wait for j to move)."""

    weights: tuple
    arcs: tuple  # arcs[i] = sorted tuple of out-neighbors of vertex i

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "arcs", tuple(tuple(a) for a in self.arcs))
        if len(self.weights) != len(self.arcs):
            raise ValueError("weights and adjacency lists must have equal length")
        for i, out in enumerate(self.arcs):
            if i in out:
                raise ValueError("self-arcs are not allowed")

    @property
    def n(self) -> int:
        return len(self.weights)


def build(inst: Instance, weights) -> DependencyGraph:
    """Dependency graph of an instance: O(n^2) two-phase collision checks
    between every goal pose and every other object's start pose."""
    n = inst.n
    if len(weights) != n:
        raise ValueError("need one weight per object")
    fps = inst.footprints()
    start_polys = [transform(fp, p) for fp, p in zip(fps, inst.start)]
    goal_polys = [transform(fp, p) for fp, p in zip(fps, inst.goal)]
    radii = [fp.bounding_radius for fp in fps]
    arcs = []
    for i in range(n):
        gx, gy = inst.goal[i].x, inst.goal[i].y
        out = []
        for j in range(n):
            if j == i:
                continue
            dx = gx - inst.start[j].x
            dy = gy - inst.start[j].y
            reach = radii[i] + radii[j]
            if dx * dx + dy * dy > reach * reach:
                continue
            if convex_polygons_collide(goal_polys[i], start_polys[j]):
                out.append(j)
        arcs.append(tuple(out))
    return DependencyGraph(tuple(weights), tuple(arcs))


def scc(g: DependencyGraph) -> list:
    """Strongly connected components, emitted in reverse topological order of
    the condensation (dependencies first), each sorted by vertex index."""
    n = g.n
    adj = g.arcs
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, ptr = work[-1]
            if ptr == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            for k in range(ptr, len(adj[v])):
                w = adj[v][k]
                if index[w] == -1:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                comps.append(sorted(comp))
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
    return comps


def _shortest_cycle(adj, alive):
    """Shortest directed cycle among `alive` vertices, or None if acyclic."""
    best = None
    for s in sorted(alive):
        parent = {s: None}
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if best is not None and dist[u] + 1 >= len(best):
                continue
            for w in adj[u]:
                if w == s:
                    cycle = [u]
                    while parent[cycle[-1]] is not None:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    if best is None or len(cycle) < len(best):
                        best = cycle
                    break
                if w in alive and w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
        if best is not None and len(best) == 2:
            return best
    return best


def _fvs_component(comp, g: DependencyGraph, deadline: Deadline):
    """Exact min-weight feedback vertex set of one strongly connected component
    by branch and bound over cycle covers."""
    local = {v: k for k, v in enumerate(comp)}
    m = len(comp)
    adj = [[local[w] for w in g.arcs[v] if w in local] for v in comp]
    weights = [g.weights[v] for v in comp]
    all_alive = frozenset(range(m))

    # greedy incumbent: repeatedly delete the cheapest vertex of a shortest cycle
    removed = set()
    while True:
        cyc = _shortest_cycle(adj, all_alive - removed)
        if cyc is None:
            break
        removed.add(min(cyc, key=lambda u: (weights[u], u)))
    best = [sum(weights[v] for v in removed), tuple(sorted(removed))]

    def consider(current: set, cost: float) -> None:
        cand = tuple(sorted(current))
        if cost < best[0] - _TIE_EPS or (abs(cost - best[0]) <= _TIE_EPS and cand < best[1]):
            best[0] = cost
            best[1] = cand

    def branch(current: set, banned: frozenset, cost: float) -> None:
        deadline.check()
        cyc = _shortest_cycle(adj, all_alive - current)
        if cyc is None:
            consider(current, cost)
            return
        allowed = [v for v in cyc if v not in banned]
        if not allowed:
            return
        # admissible bound: some allowed vertex of this cycle must be removed
        if cost + min(weights[v] for v in allowed) > best[0] + _TIE_EPS:
            return
        newly_banned = set()
        for v in sorted(allowed):
            current.add(v)
            branch(current, banned | frozenset(newly_banned), cost + weights[v])
            current.remove(v)
            newly_banned.add(v)

    branch(set(), frozenset(), 0.0)
    return [comp[v] for v in best[1]]


def min_weight_fvs(g: DependencyGraph, deadline: Deadline | None = None) -> list:
    """Exact minimum-weight feedback vertex set, solved per strongly connected
    component; ties resolved toward the lexicographically smallest index set."""
    deadline = deadline or Deadline.never()
    out = []
    for comp in scc(g):
        if len(comp) > 1:
            out.extend(_fvs_component(comp, g, deadline))
    return sorted(out)


def is_acyclic(g: DependencyGraph, removed=()) -> bool:
    """Kahn's algorithm on the graph minus `removed` vertices."""
    removed = set(removed)
    indeg = {v: 0 for v in range(g.n) if v not in removed}
    for v in indeg:
        for w in g.arcs[v]:
            if w in indeg:
                indeg[w] += 1
    queue = deque(v for v, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in g.arcs[v]:
            if w in indeg:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
    return seen == len(indeg)


def to_dot(g: DependencyGraph) -> str:
    """DOT dump for debugging; vertex labels are index:weight."""
    lines = ["digraph dependencies {"]
    for v in range(g.n):
        lines.append(f'  v{v} [label="{v}:{g.weights[v]:.4g}"];')
    for v in range(g.n):
        for w in g.arcs[v]:
            lines.append(f"  v{v} -> v{w};")
    lines.append("}")
    return "\n".join(lines)
