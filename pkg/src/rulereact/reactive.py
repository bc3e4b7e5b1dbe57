"""Synchronous-reactive kernel of resumable programs.

A program is a tree of nodes built with the combinators below and executed
one *instant* at a time with :func:`react`.  Two kinds of control points
split an instant:

* ``stop_point()`` parks a branch until the next instant.
* ``suspend_point()`` parks a branch, but an enclosing :func:`close` resumes
  it within the same instant.  Outside any close it degrades to a stop.

Every node instance owns its cursor state.  Templates are copied with
:meth:`Program.fresh`; :func:`loop` does this for each iteration, so two
iterations never share state.

    >>> log = []
    >>> p = seq(effect(lambda: log.append(1)), stop_point(),
    ...         effect(lambda: log.append(2)))
    >>> react(p), log
    (<ActivationStatus.STOPPED: 'stopped'>, [1])
    >>> react(p), log
    (<ActivationStatus.TERMINATED: 'terminated'>, [1, 2])
"""

from __future__ import annotations

import enum
import itertools
from typing import Any, Callable, Iterator

from .errors import CloseDivergence, InstantaneousLoop, ReentrantActivation

__all__ = [
    "ActivationStatus",
    "Instant",
    "Program",
    "Effect",
    "Nothing",
    "StopPoint",
    "SuspendPoint",
    "Seq",
    "Merge",
    "Loop",
    "Close",
    "Defer",
    "effect",
    "nothing",
    "stop_point",
    "suspend_point",
    "seq",
    "merge",
    "loop",
    "close",
    "defer",
    "react",
    "DEFAULT_ROUND_BOUND",
]

DEFAULT_ROUND_BOUND = 64


class ActivationStatus(enum.Enum):
    TERMINATED = "terminated"
    STOPPED = "stopped"
    SUSPENDED = "suspended"


TERMINATED = ActivationStatus.TERMINATED
STOPPED = ActivationStatus.STOPPED
SUSPENDED = ActivationStatus.SUSPENDED

_instant_ids = itertools.count(1)


class Instant:
    """Per-``react`` activation context.

    ``id`` is unique across the process, so a branch stopped during one
    instant is recognisably runnable in any later one.  ``env`` is an opaque
    slot that lets higher layers (the rule engine) reach shared state from
    inside nodes.
    """

    __slots__ = ("id", "env")

    def __init__(self, env: Any = None) -> None:
        self.id = next(_instant_ids)
        self.env = env


class Program:
    """Base node.  Subclasses implement ``_step`` and ``fresh``."""

    __slots__ = ("_status", "_stopped_in", "_busy")

    def __init__(self) -> None:
        self._status: ActivationStatus | None = None
        self._stopped_in = 0
        self._busy = False

    @property
    def status(self) -> ActivationStatus | None:
        """Status of the last activation, ``None`` if never activated."""
        return self._status

    @property
    def terminated(self) -> bool:
        return self._status is TERMINATED

    def activate(self, instant: Instant) -> ActivationStatus:
        if self._status is TERMINATED:
            return TERMINATED
        # a branch that stopped this instant stays parked, even under close
        if self._status is STOPPED and self._stopped_in == instant.id:
            return STOPPED
        if self._busy:
            raise ReentrantActivation(f"{type(self).__name__} activated from inside itself")
        self._busy = True
        try:
            status = self._step(instant)
        finally:
            self._busy = False
        self._status = status
        if status is STOPPED:
            self._stopped_in = instant.id
        return status

    def _step(self, instant: Instant) -> ActivationStatus:
        raise NotImplementedError

    def fresh(self) -> Program:
        """Return an unactivated copy of this program's tree."""
        raise NotImplementedError

    def parked(self) -> Iterator[str]:
        """Yield ``"stop"``/``"suspend"`` for every control point a live
        branch of this instance is currently parked at."""
        return iter(())


class Effect(Program):
    __slots__ = ("step",)

    def __init__(self, step: Callable[[], Any]) -> None:
        super().__init__()
        self.step = step

    def _step(self, instant):
        self.step()
        return TERMINATED

    def fresh(self):
        return Effect(self.step)


class Nothing(Program):
    __slots__ = ()

    def _step(self, instant):
        return TERMINATED

    def fresh(self):
        return Nothing()


class StopPoint(Program):
    __slots__ = ("_reached",)

    def __init__(self) -> None:
        super().__init__()
        self._reached = False

    def _step(self, instant):
        if self._reached:
            return TERMINATED
        self._reached = True
        return STOPPED

    def fresh(self):
        return StopPoint()

    def parked(self):
        if self._status is STOPPED:
            yield "stop"


class SuspendPoint(Program):
    __slots__ = ("_reached",)

    def __init__(self) -> None:
        super().__init__()
        self._reached = False

    def _step(self, instant):
        if self._reached:
            return TERMINATED
        self._reached = True
        return SUSPENDED

    def fresh(self):
        return SuspendPoint()

    def parked(self):
        if self._status is SUSPENDED:
            yield "suspend"


class Seq(Program):
    __slots__ = ("first", "second")

    def __init__(self, first: Program, second: Program) -> None:
        super().__init__()
        self.first = first
        self.second = second

    def _step(self, instant):
        status = self.first.activate(instant)
        if status is not TERMINATED:
            return status
        return self.second.activate(instant)

    def fresh(self):
        return Seq(self.first.fresh(), self.second.fresh())

    def parked(self):
        if self._status is TERMINATED:
            return
        if not self.first.terminated:
            yield from self.first.parked()
        else:
            yield from self.second.parked()


def _combine(statuses) -> ActivationStatus:
    result = TERMINATED
    for status in statuses:
        if status is SUSPENDED:
            return SUSPENDED
        if status is STOPPED:
            result = STOPPED
    return result


class Merge(Program):
    """Parallel composition; branches are activated strictly left to right.

    Stored flat: ``Merge([a, b, c])`` behaves exactly like the left fold
    ``merge(merge(a, b), c)`` but activates without deep recursion.
    """

    __slots__ = ("branches",)

    def __init__(self, branches: list[Program]) -> None:
        super().__init__()
        self.branches = list(branches)

    def _step(self, instant):
        return _combine([branch.activate(instant) for branch in self.branches])

    def fresh(self):
        return Merge([branch.fresh() for branch in self.branches])

    def parked(self):
        for branch in self.branches:
            if not branch.terminated:
                yield from branch.parked()


class Loop(Program):
    __slots__ = ("template", "_body")

    def __init__(self, template: Program) -> None:
        super().__init__()
        self.template = template
        self._body: Program | None = None

    def _step(self, instant):
        while True:
            if self._body is None:
                self._body = self.template.fresh()
            body = self._body
            first_run = body.status is None
            status = body.activate(instant)
            if status is not TERMINATED:
                return status
            if first_run:
                raise InstantaneousLoop("loop body terminated without reaching a control point")
            self._body = None

    def fresh(self):
        return Loop(self.template)

    def parked(self):
        if self._body is not None:
            yield from self._body.parked()


class Close(Program):
    """Re-activates ``inner`` until no branch is left suspended.

    ``rounds`` holds the number of micro-rounds the last activation took.
    """

    __slots__ = ("inner", "bound", "rounds")

    def __init__(self, inner: Program, bound: int = DEFAULT_ROUND_BOUND) -> None:
        super().__init__()
        if bound < 1:
            raise ValueError("micro-round bound must be positive")
        self.inner = inner
        self.bound = bound
        self.rounds = 0

    def _step(self, instant):
        rounds = 0
        while True:
            rounds += 1
            self.rounds = rounds
            status = self.inner.activate(instant)
            if status is not SUSPENDED:
                return status
            if rounds >= self.bound:
                raise CloseDivergence(f"instant did not settle within {self.bound} micro-rounds")

    def fresh(self):
        return Close(self.inner.fresh(), self.bound)

    def parked(self):
        yield from self.inner.parked()


class Defer(Program):
    """Builds its program from ``factory`` on first activation.

    This is how run-time decisions (branching on the store, recursion over
    a list) enter a program; each fresh copy calls the factory again.
    """

    __slots__ = ("factory", "_program")

    def __init__(self, factory: Callable[[], Program]) -> None:
        super().__init__()
        self.factory = factory
        self._program: Program | None = None

    def _step(self, instant):
        if self._program is None:
            program = self.factory()
            if not isinstance(program, Program):
                raise TypeError(f"defer factory returned {type(program).__name__}, not a Program")
            self._program = program
        return self._program.activate(instant)

    def fresh(self):
        return Defer(self.factory)

    def parked(self):
        if self._program is not None:
            yield from self._program.parked()


def effect(step: Callable[[], Any]) -> Program:
    return Effect(step)


def nothing() -> Program:
    return Nothing()


def stop_point() -> Program:
    return StopPoint()


def suspend_point() -> Program:
    return SuspendPoint()


def seq(*programs: Program) -> Program:
    """Sequential composition; ``seq()`` is ``nothing()``."""
    if not programs:
        return Nothing()
    result = programs[-1]
    for program in reversed(programs[:-1]):
        result = Seq(program, result)
    return result


def merge(*programs: Program) -> Program:
    """Parallel composition, activated left to right; ``merge()`` is ``nothing()``."""
    if not programs:
        return Nothing()
    if len(programs) == 1:
        return programs[0]
    return Merge(list(programs))


def loop(body: Program) -> Program:
    return Loop(body)


def close(inner: Program, bound: int = DEFAULT_ROUND_BOUND) -> Close:
    return Close(inner, bound)


def defer(factory: Callable[[], Program]) -> Program:
    return Defer(factory)


def react(program: Program, env: Any = None) -> ActivationStatus:
    """Run one instant of ``program`` and return its status."""
    return program.activate(Instant(env))
