"""Cooperative deadline handling shared by the planners."""

from __future__ import annotations

import time


class PlanningTimeout(Exception):
    """Raised inside planner internals when a cooperative deadline expires."""


class Deadline:
    """Wall-clock budget; planners poll it at loop boundaries."""

    __slots__ = ("_limit",)

    def __init__(self, seconds: float | None = None):
        self._limit = None if seconds is None else time.monotonic() + seconds

    @classmethod
    def never(cls) -> "Deadline":
        return cls(None)

    def expired(self) -> bool:
        return self._limit is not None and time.monotonic() >= self._limit

    def check(self) -> None:
        if self.expired():
            raise PlanningTimeout()
