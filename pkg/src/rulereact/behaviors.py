"""Declarative agent behaviors compiled into rules over a goal store.

A behavior pursues one goal.  Its rule is enabled (fitness 1) while the
goal is Available and the optional precondition holds.  When it fires, the
goal is marked Active and the steps are interpreted:

* Sequential: each ``Action`` runs and is followed by an unconditional
  wait; each ``Subgoal`` is set, waited on until done, then cleared.  A
  subgoal that does not succeed fails the parent and abandons the rest.
* Concurrent: all subgoals are set and all actions run at once, then a
  single wait covers every subgoal; the parent succeeds only if every
  subgoal succeeded.

Action results are ignored, as are the results of the original
``behaviorRule`` interpreter this mirrors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .engine import Rule, wait
from .goals import GoalStatus, GoalStore
from .reactive import Program, defer, effect, seq

__all__ = [
    "Action",
    "Behavior",
    "BehaviorKind",
    "BehaviorStep",
    "Subgoal",
    "behavior_rule",
    "split_steps",
]


class BehaviorKind(enum.Enum):
    SEQUENTIAL = "sequential"
    CONCURRENT = "concurrent"


@dataclass(frozen=True)
class Subgoal:
    name: str


@dataclass(frozen=True)
class Action:
    act: Callable[[], bool]


BehaviorStep = Union[Subgoal, Action]


@dataclass(frozen=True)
class Behavior:
    goal: str
    precond: Callable[[], bool] | None = None
    kind: BehaviorKind = BehaviorKind.SEQUENTIAL
    steps: Sequence[BehaviorStep] = field(default_factory=tuple)
    name: str | None = None

    def __post_init__(self):
        if not self.goal:
            raise ValueError("behavior goal name must be non-empty")
        object.__setattr__(self, "steps", tuple(self.steps))


def split_steps(steps: Sequence[BehaviorStep]) -> tuple[list[str], list[Callable[[], bool]]]:
    """Partition into (subgoal names, actions), keeping relative order."""
    subgoals: list[str] = []
    actions: list[Callable[[], bool]] = []
    for step in steps:
        if isinstance(step, Subgoal):
            subgoals.append(step.name)
        elif isinstance(step, Action):
            actions.append(step.act)
        else:
            raise TypeError(f"not a behavior step: {step!r}")
    return subgoals, actions


def _adopt(goals: GoalStore, goal: str) -> Callable[[], None]:
    def adopt():
        # a sibling behavior may have adopted the goal earlier in this instant
        if goals.is_available(goal):
            goals.mark_active(goal)

    return adopt


def _sequential(goals: GoalStore, goal: str, steps: tuple[BehaviorStep, ...]) -> Program:
    if not steps:
        return effect(lambda: goals.succeed(goal))
    step, rest = steps[0], steps[1:]
    if isinstance(step, Action):
        return seq(effect(step.act), wait(), defer(lambda: _sequential(goals, goal, rest)))

    sub = step.name

    def outcome() -> Program:
        succeeded = goals.status(sub) is GoalStatus.SUCCESS
        cleanup = effect(lambda: goals.clear(sub))
        if succeeded:
            return seq(cleanup, _sequential(goals, goal, rest))
        return seq(cleanup, effect(lambda: goals.fail(goal)))

    return seq(
        effect(lambda: goals.set(sub)),
        wait(lambda: 1 if goals.is_done(sub) else 0),
        defer(outcome),
    )


def _concurrent(goals: GoalStore, goal: str, steps: tuple[BehaviorStep, ...]) -> Program:
    subgoals, actions = split_steps(steps)

    def start():
        for sub in subgoals:
            goals.set(sub)
        for act in actions:
            act()

    def finish():
        succeeded = all(goals.status(sub) is GoalStatus.SUCCESS for sub in subgoals)
        for sub in subgoals:
            goals.clear(sub)
        if succeeded:
            goals.succeed(goal)
        else:
            goals.fail(goal)

    return seq(
        effect(start),
        wait(lambda: 1 if all(goals.is_done(sub) for sub in subgoals) else 0),
        effect(finish),
    )


def behavior_rule(behavior: Behavior, goals: GoalStore) -> Rule:
    """Compile ``behavior`` into a rule acting on ``goals``."""
    goal, precond = behavior.goal, behavior.precond

    def cond() -> int:
        if not goals.is_available(goal):
            return 0
        return 1 if precond is None or precond() else 0

    if behavior.kind is BehaviorKind.SEQUENTIAL:
        steps = behavior.steps
        body = defer(lambda: _sequential(goals, goal, steps))
    elif behavior.kind is BehaviorKind.CONCURRENT:
        body = _concurrent(goals, goal, behavior.steps)
    else:
        raise TypeError(f"unknown behavior kind {behavior.kind!r}")
    return Rule(cond, seq(effect(_adopt(goals, goal)), body), behavior.name or goal)
