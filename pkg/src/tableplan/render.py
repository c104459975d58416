"""SVG rendering of instances and plan replays."""

from __future__ import annotations

import os

from .geometry import transform
from .instance import Instance, RearrangementPlan, validate_plan

_STROKE = 0.04  # stroke width in workspace units


def _color(i: int, n: int) -> str:
    return f"hsl({(i * 360) // max(n, 1)}, 70%, 45%)"


def _poly_points(fp, pose) -> str:
    return " ".join(f"{x:.6f},{y:.6f}" for x, y in transform(fp, pose))


def scene_svg(inst: Instance, arrangement, highlight: int | None = None) -> str:
    """One SVG scene: goal poses outlined (dashed), the given arrangement
    filled, the `highlight` object drawn with a heavier outline.

    Polygon coordinates are emitted in raw workspace units inside a y-flipped
    group, so parsed point lists match the world-frame transform output.
    """
    ws = inst.workspace
    n = inst.n
    fps = inst.footprints()
    margin = 0.5
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{ws.width * 48:.0f}" '
        f'height="{ws.height * 48:.0f}" '
        f'viewBox="{-margin} {-margin} {ws.width + 2 * margin} {ws.height + 2 * margin}">',
        f'<g transform="translate(0,{ws.height}) scale(1,-1)">',
        f'<rect x="0" y="0" width="{ws.width}" height="{ws.height}" '
        f'fill="white" stroke="black" stroke-width="{_STROKE}"/>',
    ]
    for i in range(n):
        lines.append(
            f'<polygon class="goal" points="{_poly_points(fps[i], inst.goal[i])}" '
            f'fill="none" stroke="{_color(i, n)}" stroke-width="{_STROKE}" '
            f'stroke-dasharray="0.15,0.1"/>'
        )
    for i in range(n):
        extra = f' stroke="black" stroke-width="{3 * _STROKE}"' if i == highlight \
            else f' stroke="{_color(i, n)}" stroke-width="{_STROKE}"'
        lines.append(
            f'<polygon class="object" points="{_poly_points(fps[i], arrangement[i])}" '
            f'fill="{_color(i, n)}" fill-opacity="0.65"{extra}/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines)


def render(inst: Instance, plan: RearrangementPlan | None = None, out_path: str = "scene.svg") -> list:
    """Write SVG file(s); returns the written paths.

    Without a plan, `out_path` is a single SVG of the start arrangement with
    goal outlines. With a plan, `out_path` is a directory receiving one frame
    per state (k actions -> k+1 frames), the moved object highlighted.
    """
    if plan is None:
        parent = os.path.dirname(os.path.abspath(out_path))
        os.makedirs(parent, exist_ok=True)
        with open(out_path, "w") as f:
            f.write(scene_svg(inst, inst.start))
        return [out_path]
    report = validate_plan(plan, inst)
    if not report:
        raise ValueError(f"cannot render an invalid plan: {report.message}")
    os.makedirs(out_path, exist_ok=True)
    paths = []
    current = list(inst.start)
    frame = os.path.join(out_path, "frame_000.svg")
    with open(frame, "w") as f:
        f.write(scene_svg(inst, current))
    paths.append(frame)
    for k, act in enumerate(plan.actions, start=1):
        current[act.obj] = act.pose
        frame = os.path.join(out_path, f"frame_{k:03d}.svg")
        with open(frame, "w") as f:
            f.write(scene_svg(inst, current, highlight=act.obj))
        paths.append(frame)
    return paths
