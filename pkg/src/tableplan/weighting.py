"""Per-object weights: collision-probability weights for the relocation-count
objective and impedance weights for the task-impedance objective."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Footprint, Workspace


@dataclass(frozen=True)
class ObjectCharacteristics:
    """Footprint plus optional physical properties of one object."""

    footprint: Footprint
    mass: float | None = None
    impedance: float | None = None

    def __post_init__(self) -> None:
        if self.mass is not None and self.mass < 0.0:
            raise ValueError("mass must be nonnegative")
        if self.impedance is not None and self.impedance < 0.0:
            raise ValueError("impedance must be nonnegative")


def hecp_weights(chars: list, ws: Workspace) -> list:
    """Collision-probability weight per object.

    Each object is weighted by the estimated probability of colliding with a
    disc of average object size placed uniformly in the workspace:
    w_i = (s_i + s_mean + r_mean * c_i) / ((H - 2 r_mean)(W - 2 r_mean)).
    """
    if not chars:
        raise ValueError("object list must be nonempty")
    areas = [c.footprint.area for c in chars]
    perims = [c.footprint.perimeter for c in chars]
    s_mean = sum(areas) / len(areas)
    r_mean = math.sqrt(s_mean / math.pi)
    denom = (ws.height - 2.0 * r_mean) * (ws.width - 2.0 * r_mean)
    if denom <= 0.0 or 2.0 * r_mean >= min(ws.width, ws.height):
        raise ValueError("average object size too large for this workspace")
    return [(s + s_mean + r_mean * c) / denom for s, c in zip(areas, perims)]


def heti_weights(chars: list) -> list:
    """Manipulation-impedance weight per object.

    Uses the explicit impedance when present, else the mass, else the footprint
    area as a universally available size proxy.
    """
    out = []
    for c in chars:
        if c.impedance is not None:
            out.append(float(c.impedance))
        elif c.mass is not None:
            out.append(float(c.mass))
        else:
            out.append(c.footprint.area)
    return out
