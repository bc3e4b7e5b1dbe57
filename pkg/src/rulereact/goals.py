"""Named goals and their status protocol."""

from __future__ import annotations

import enum
from typing import Callable

from .errors import NotAvailable, UnknownGoal

__all__ = ["GoalStatus", "GoalStore"]


class GoalStatus(enum.Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    ACTIVE = "Active"
    AVAILABLE = "Available"
    NO_SUCH = "NoSuch"

    def __str__(self):
        return self.value


Listener = Callable[[str, GoalStatus, GoalStatus], None]


class GoalStore:
    """Mapping from goal name to status.

    ``NO_SUCH`` is never stored; it is what :meth:`status` reports for an
    absent goal.  Every change is appended to ``transitions`` as
    ``(name, old, new)`` and passed to ``listener`` if one is given.
    """

    def __init__(self, listener: Listener | None = None) -> None:
        self._goals: dict[str, GoalStatus] = {}
        self.transitions: list[tuple[str, GoalStatus, GoalStatus]] = []
        self.listener = listener

    def __contains__(self, name: str) -> bool:
        return name in self._goals

    def __iter__(self):
        return iter(self._goals)

    def _change(self, name: str, new: GoalStatus) -> None:
        old = self._goals.get(name, GoalStatus.NO_SUCH)
        if new is GoalStatus.NO_SUCH:
            del self._goals[name]
        else:
            self._goals[name] = new
        self.transitions.append((name, old, new))
        if self.listener is not None:
            self.listener(name, old, new)

    def _require(self, name: str) -> GoalStatus:
        try:
            return self._goals[name]
        except KeyError:
            raise UnknownGoal(f"no such goal: {name!r}") from None

    def set(self, name: str) -> None:
        """Make ``name`` Available, whatever its previous status."""
        self._change(name, GoalStatus.AVAILABLE)

    def succeed(self, name: str) -> None:
        self._require(name)
        self._change(name, GoalStatus.SUCCESS)

    def fail(self, name: str) -> None:
        self._require(name)
        self._change(name, GoalStatus.FAILURE)

    def status(self, name: str) -> GoalStatus:
        return self._goals.get(name, GoalStatus.NO_SUCH)

    def clear(self, name: str) -> None:
        if name in self._goals:
            self._change(name, GoalStatus.NO_SUCH)

    def mark_active(self, name: str) -> None:
        if self._require(name) is not GoalStatus.AVAILABLE:
            raise NotAvailable(f"goal {name!r} is {self._goals[name]}, not Available")
        self._change(name, GoalStatus.ACTIVE)

    def is_available(self, name: str) -> bool:
        return self.status(name) is GoalStatus.AVAILABLE

    def is_done(self, name: str) -> bool:
        return self.status(name) in (GoalStatus.SUCCESS, GoalStatus.FAILURE)
