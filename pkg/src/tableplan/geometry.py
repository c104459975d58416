"""Planar geometry core: poses, object footprints, workspace containment,
two-phase collision checking, and the disc-offset area formula behind the
collision-probability weights."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

# Projection overlaps at or below this count as separation, so placements that
# merely touch along a boundary are collision-free.
SAT_EPS = 1e-9

# Ellipses and discs are approximated by inscribed regular 16-gons for SAT;
# their cached area/perimeter stay exact so weights do not depend on the
# approximation resolution.
ELLIPSE_SEGMENTS = 16

Vec = tuple[float, float]


def normalize_angle(theta: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    if t >= TWO_PI:  # fmod rounding can land exactly on 2*pi
        t = 0.0
    return t


@dataclass(frozen=True)
class Pose:
    """Planar pose (x, y, theta); theta is stored normalized to [0, 2*pi)."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned rectangular tabletop with its origin at the lower-left corner."""

    width: float
    height: float

    def __post_init__(self) -> None:
        if not (self.width > 0.0 and self.height > 0.0):
            raise ValueError("workspace dimensions must be positive")

    @property
    def area(self) -> float:
        return self.width * self.height


def _ellipse_perimeter(a: float, b: float) -> float:
    # Ramanujan's second approximation; sub-ppm accurate for aspect ratios <= 3.
    h = ((a - b) / (a + b)) ** 2
    return math.pi * (a + b) * (1.0 + 3.0 * h / (10.0 + math.sqrt(4.0 - 3.0 * h)))


def _regular_inscribed(a: float, b: float, segments: int) -> tuple[Vec, ...]:
    pts = []
    for k in range(segments):
        phi = TWO_PI * k / segments
        pts.append((a * math.cos(phi), b * math.sin(phi)))
    return tuple(pts)


def _check_convex_ccw(vertices: tuple[Vec, ...]) -> None:
    n = len(vertices)
    if n < 3:
        raise ValueError("polygon needs at least 3 vertices")
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cx, cy = vertices[(i + 2) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if cross <= 0.0:
            raise ValueError("polygon vertices must be strictly convex and counterclockwise")


def _polygon_area(vertices: tuple[Vec, ...]) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def _polygon_perimeter(vertices: tuple[Vec, ...]) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        s += math.hypot(x2 - x1, y2 - y1)
    return s


@dataclass(frozen=True)
class Footprint:
    """Convex object footprint expressed in the object's body frame.

    Supported kinds: "rect", "ellipse", "disc", "poly". Collision tests run on
    `base_vertices`, the convex polygon used by the separating-axis test (exact
    for rect/poly, an inscribed 16-gon for ellipse/disc). `area` and
    `perimeter` are exact for every kind.
    """

    kind: str
    params: tuple
    area: float = field(init=False, repr=False, compare=False)
    perimeter: float = field(init=False, repr=False, compare=False)
    bounding_radius: float = field(init=False, repr=False, compare=False)
    base_vertices: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "rect":
            w, h = self.params
            if not (w > 0.0 and h > 0.0):
                raise ValueError("rectangle sides must be positive")
            verts = ((w / 2, h / 2), (-w / 2, h / 2), (-w / 2, -h / 2), (w / 2, -h / 2))
            area = w * h
            perim = 2.0 * (w + h)
            rad = math.hypot(w, h) / 2.0
        elif self.kind == "ellipse":
            a, b = self.params
            if not (a > 0.0 and b > 0.0):
                raise ValueError("ellipse semi-axes must be positive")
            verts = _regular_inscribed(a, b, ELLIPSE_SEGMENTS)
            area = math.pi * a * b
            perim = _ellipse_perimeter(a, b)
            rad = max(a, b)
        elif self.kind == "disc":
            (r,) = self.params
            if not r > 0.0:
                raise ValueError("disc radius must be positive")
            verts = _regular_inscribed(r, r, ELLIPSE_SEGMENTS)
            area = math.pi * r * r
            perim = TWO_PI * r
            rad = r
        elif self.kind == "poly":
            verts = tuple((float(x), float(y)) for x, y in self.params)
            _check_convex_ccw(verts)
            area = _polygon_area(verts)
            perim = _polygon_perimeter(verts)
            rad = max(math.hypot(x, y) for x, y in verts)
            object.__setattr__(self, "params", verts)
        else:
            raise ValueError(f"unknown footprint kind {self.kind!r}")
        object.__setattr__(self, "area", area)
        object.__setattr__(self, "perimeter", perim)
        object.__setattr__(self, "bounding_radius", rad)
        object.__setattr__(self, "base_vertices", verts)

    @classmethod
    def rectangle(cls, width: float, height: float) -> "Footprint":
        return cls("rect", (float(width), float(height)))

    @classmethod
    def ellipse(cls, a: float, b: float) -> "Footprint":
        return cls("ellipse", (float(a), float(b)))

    @classmethod
    def disc(cls, radius: float) -> "Footprint":
        return cls("disc", (float(radius),))

    @classmethod
    def polygon(cls, vertices) -> "Footprint":
        return cls("poly", tuple(vertices))


def transform(footprint: Footprint, pose: Pose) -> list:
    """World-frame polygon of the footprint at a pose (vertex order preserved)."""
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    x0, y0 = pose.x, pose.y
    return [(x0 + c * vx - s * vy, y0 + s * vx + c * vy) for vx, vy in footprint.base_vertices]


def _separated_on_axes(poly: list, other: list, eps: float) -> bool:
    """True if some edge normal of `poly` strictly separates the two polygons."""
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        ax = y1 - y2
        ay = x2 - x1
        min_a = min_b = math.inf
        max_a = max_b = -math.inf
        for px, py in poly:
            d = ax * px + ay * py
            if d < min_a:
                min_a = d
            if d > max_a:
                max_a = d
        for px, py in other:
            d = ax * px + ay * py
            if d < min_b:
                min_b = d
            if d > max_b:
                max_b = d
        # scale the tolerance by the axis length (the normal is unnormalized)
        tol = eps * math.hypot(ax, ay)
        if min_b >= max_a - tol or min_a >= max_b - tol:
            return True
    return False


def convex_polygons_collide(poly_a: list, poly_b: list, eps: float = SAT_EPS) -> bool:
    """Separating-axis test for convex polygons.

    Boundary contact within `eps` counts as non-colliding (open-set overlap).
    """
    if _separated_on_axes(poly_a, poly_b, eps):
        return False
    if _separated_on_axes(poly_b, poly_a, eps):
        return False
    return True


def collide(fp_a: Footprint, pose_a: Pose, fp_b: Footprint, pose_b: Pose) -> bool:
    """Two-phase collision check between footprints at the given poses.

    Broad phase compares bounding discs; the narrow phase runs SAT on the
    world-frame polygons. Touching boundaries do not count as a collision.
    """
    dx = pose_a.x - pose_b.x
    dy = pose_a.y - pose_b.y
    reach = fp_a.bounding_radius + fp_b.bounding_radius
    if dx * dx + dy * dy > reach * reach:
        return False
    return convex_polygons_collide(transform(fp_a, pose_a), transform(fp_b, pose_b))


def in_workspace(fp: Footprint, pose: Pose, ws: Workspace) -> bool:
    """True iff every vertex of the world-frame polygon lies inside the table."""
    w, h = ws.width, ws.height
    for x, y in transform(fp, pose):
        if x < 0.0 or x > w or y < 0.0 or y > h:
            return False
    return True


def minkowski_area(fp: Footprint, r_d: float) -> float:
    """Area of the footprint offset (Minkowski sum) by a disc of radius r_d."""
    if r_d < 0.0:
        raise ValueError("disc radius must be nonnegative")
    return fp.area + math.pi * r_d * r_d + r_d * fp.perimeter


def collision_probability(fp: Footprint, r_d: float, ws: Workspace) -> float:
    """Estimated probability that a uniformly placed disc of radius r_d collides
    with the footprint, assuming the footprint sits away from the boundary.

    This is an upper-bound heuristic; values are clamped to [0, 1].
    """
    if 2.0 * r_d >= min(ws.width, ws.height):
        raise ValueError("disc diameter must be smaller than both workspace sides")
    p = minkowski_area(fp, r_d) / ((ws.height - 2.0 * r_d) * (ws.width - 2.0 * r_d))
    return min(1.0, max(0.0, p))
