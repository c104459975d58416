"""Independent oracles used by the tests: dense point sampling and polygon
clipping for collision verdicts, Monte Carlo disc-offset areas, exhaustive
feedback-vertex-set and running-buffer minima, and a standalone plan replayer.

These deliberately avoid the library's separating-axis and planner code paths.
"""

import math

import numpy as np

from tableplan.geometry import in_workspace, transform
from tableplan.instance import poses_close


# ---------------------------------------------------------------------------
# geometry oracles
# ---------------------------------------------------------------------------


def polygon_area(poly) -> float:
    s = 0.0
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def point_strictly_inside(poly, p, eps=1e-12) -> bool:
    x, y = p
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= eps:
            return False
    return True


def sampling_overlap(poly_a, poly_b, rng, samples=20000) -> bool:
    """Dense point-sampling intersection oracle over both interiors."""
    for pa, pb in ((poly_a, poly_b), (poly_b, poly_a)):
        arr = np.asarray(pa)
        lo = arr.min(axis=0)
        hi = arr.max(axis=0)
        pts = rng.uniform(lo, hi, size=(samples, 2))
        for p in pts:
            if point_strictly_inside(pa, p) and point_strictly_inside(pb, p):
                return True
        # vertices and edge midpoints catch overlaps thinner than the sampling
        k = len(pa)
        for i in range(k):
            mx = (pa[i][0] + pa[(i + 1) % k][0]) / 2
            my = (pa[i][1] + pa[(i + 1) % k][1]) / 2
            if point_strictly_inside(pb, pa[i]) or point_strictly_inside(pb, (mx, my)):
                return True
    return False


def clip_intersection_area(subject, clip) -> float:
    """Exact convex intersection area via Sutherland-Hodgman clipping."""
    poly = [tuple(p) for p in subject]
    n = len(clip)
    for i in range(n):
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        out = []
        m = len(poly)
        for k in range(m):
            px, py = poly[k]
            qx, qy = poly[(k + 1) % m]
            p_in = ex * (py - ay) - ey * (px - ax) >= 0.0
            q_in = ex * (qy - ay) - ey * (qx - ax) >= 0.0
            if p_in:
                out.append((px, py))
            if p_in != q_in:
                # intersection of segment pq with the clip line
                dx, dy = qx - px, qy - py
                denom = ex * dy - ey * dx
                if denom != 0.0:
                    t = (ex * (ay - py) - ey * (ax - px)) / denom
                    out.append((px + t * dx, py + t * dy))
        poly = out
        if not poly:
            return 0.0
    return abs(polygon_area(poly))


def mc_minkowski_area(vertices, r, rng, samples) -> float:
    """Monte Carlo area of the polygon offset by a disc of radius r: fraction
    of box samples lying within distance r of the polygon."""
    v = np.asarray(vertices, dtype=float)
    lo = v.min(axis=0) - r
    hi = v.max(axis=0) + r
    pts = rng.uniform(lo, hi, size=(samples, 2))
    inside = np.ones(samples, dtype=bool)
    dist2 = np.full(samples, np.inf)
    k = len(v)
    for i in range(k):
        a = v[i]
        e = v[(i + 1) % k] - a
        rel = pts - a
        cross = e[0] * rel[:, 1] - e[1] * rel[:, 0]
        inside &= cross >= 0.0
        t = np.clip(rel @ e / (e @ e), 0.0, 1.0)
        proj = rel - t[:, None] * e
        dist2 = np.minimum(dist2, (proj ** 2).sum(axis=1))
    hits = inside | (dist2 <= r * r)
    box = float(np.prod(hi - lo))
    return box * float(hits.mean())


def convex_hull(points):
    """Andrew's monotone chain; returns CCW hull vertices."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct points")

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 1e-12:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def random_convex_polygon(rng, n_points=8, scale=1.0, center=(0.0, 0.0)):
    """Random convex polygon, centered so its centroid sits at `center`."""
    while True:
        pts = rng.uniform(-scale, scale, size=(n_points, 2))
        try:
            hull = convex_hull(pts)
        except ValueError:
            continue
        if len(hull) >= 3 and abs(polygon_area(hull)) > 0.05 * scale * scale:
            cx = sum(p[0] for p in hull) / len(hull)
            cy = sum(p[1] for p in hull) / len(hull)
            return [(x - cx + center[0], y - cy + center[1]) for x, y in hull]


# ---------------------------------------------------------------------------
# graph oracles
# ---------------------------------------------------------------------------


def acyclic_without(arcs, n, removed) -> bool:
    indeg = {v: 0 for v in range(n) if v not in removed}
    for v in indeg:
        for w in arcs[v]:
            if w in indeg:
                indeg[w] += 1
    queue = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in arcs[v]:
            if w in indeg:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
    return seen == len(indeg)


def brute_force_fvs(weights, arcs):
    """Exhaustive minimum-weight feedback vertex set over all 2^n subsets."""
    n = len(weights)
    subsets = sorted(range(1 << n),
                     key=lambda m: sum(weights[v] for v in range(n) if m >> v & 1))
    for mask in subsets:
        removed = {v for v in range(n) if mask >> v & 1}
        if acyclic_without(arcs, n, removed):
            return sum(weights[v] for v in removed), removed
    raise AssertionError("removing every vertex is always feasible")


def min_running_buffer(arcs, n) -> int:
    """Exhaustive minimum over plans of the peak number of concurrently
    buffered objects, by per-budget breadth-first reachability over the full
    (at-start, at-buffer) state space."""
    dep = [0] * n
    for v in range(n):
        for w in arcs[v]:
            dep[v] |= 1 << w
    full = (1 << n) - 1

    def feasible(budget: int) -> bool:
        start_state = (full, 0)
        seen = {start_state}
        frontier = [start_state]
        while frontier:
            nxt = []
            for start_mask, buffer_mask in frontier:
                if start_mask == 0 and buffer_mask == 0:
                    return True
                for i in range(n):
                    bit = 1 << i
                    if (start_mask | buffer_mask) & bit and dep[i] & start_mask == 0:
                        s2, b2 = start_mask & ~bit, buffer_mask & ~bit
                        if (s2, b2) not in seen:
                            seen.add((s2, b2))
                            nxt.append((s2, b2))
                    if start_mask & bit and bin(buffer_mask).count("1") + 1 <= budget:
                        s2, b2 = start_mask & ~bit, buffer_mask | bit
                        if (s2, b2) not in seen:
                            seen.add((s2, b2))
                            nxt.append((s2, b2))
            frontier = nxt
        return False

    for budget in range(n + 1):
        if feasible(budget):
            return budget
    raise AssertionError("buffering everything is always feasible")


def random_digraph(rng, n, arc_prob):
    arcs = []
    for i in range(n):
        out = tuple(j for j in range(n) if j != i and rng.random() < arc_prob)
        arcs.append(out)
    return arcs


# ---------------------------------------------------------------------------
# plan replay oracle
# ---------------------------------------------------------------------------


def replay_plan(inst, plan) -> bool:
    """Standalone replay of a plan using only the geometry primitives."""
    from tableplan.geometry import collide

    fps = [c.footprint for c in inst.objects]
    current = list(inst.start)
    for act in plan.actions:
        if not 0 <= act.obj < inst.n:
            return False
        if not in_workspace(fps[act.obj], act.pose, inst.workspace):
            return False
        for j in range(inst.n):
            if j != act.obj and collide(fps[act.obj], act.pose, fps[j], current[j]):
                return False
        current[act.obj] = act.pose
    return all(poses_close(p, g) for p, g in zip(current, inst.goal))
