"""Declarative agent scenarios: goals, behaviors and a scripted world.

A scenario file is YAML (JSON works too)::

    seed: 0
    policy: allbest
    maxInstants: 20
    flags: {door_open: false}
    rootGoals: [leave]
    behaviors:
      - goal: leave
        precond: door_open
        kind: sequential
        steps:
          - action: emit
            args: [walking out]
    script:
      - instant: 2
        set: {door_open: true}

The world is a store of boolean flags.  Script entries are applied before
the monitor call of their instant; besides ``set`` they may carry
``succeed``/``fail`` lists that settle goals the way an external action
server would.

Each instant produces one trace line ``instant=<n> events=[e1;e2;...]``.
Events are, in execution order: ``<goal>:<Status>`` for every goal
transition (``NoSuch`` when cleared), ``fire:<behavior>`` when a behavior
rule fires, and the message of every ``emit`` action.  After the last
instant one ``final <goal>=<Status>`` line is printed per root goal.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator, Mapping

import yaml

from .behaviors import Action, Behavior, BehaviorKind, Subgoal, behavior_rule
from .engine import AllBest, ConflictPolicy, RuleEngine, parse_policy, persistent
from .errors import ScenarioError
from .goals import GoalStore

__all__ = [
    "BUILTIN_ACTIONS",
    "BehaviorSpec",
    "Scenario",
    "ScenarioRun",
    "ScriptEntry",
    "StepSpec",
    "World",
    "builtin_action",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
]

# name -> argument types
BUILTIN_ACTIONS: dict[str, tuple[type, ...]] = {
    "emit": (str,),
    "set-flag": (str, bool),
    "succeed-always": (),
    "check-flag": (str,),
}
_FLAG_ARGS = {"set-flag": 0, "check-flag": 0}


class World:
    """Boolean flag store plus the event list of the current instant."""

    def __init__(self, flags: Mapping[str, bool] | None = None) -> None:
        self.flags: dict[str, bool] = dict(flags or {})
        self.events: list[str] = []

    def emit(self, message: str) -> None:
        self.events.append(message)


def builtin_action(name: str, args: tuple, world: World) -> Callable[[], bool]:
    """Look up a built-in action and bind it to ``world``."""
    if name == "emit":
        (message,) = args

        def run() -> bool:
            world.emit(message)
            return True

    elif name == "set-flag":
        flag, value = args

        def run() -> bool:
            world.flags[flag] = value
            return True

    elif name == "succeed-always":

        def run() -> bool:
            return True

    elif name == "check-flag":
        (flag,) = args

        def run() -> bool:
            return world.flags[flag]

    else:
        raise ScenarioError(f"unknown action {name!r}")
    return run


@dataclass(frozen=True)
class StepSpec:
    subgoal: str | None = None
    action: str | None = None
    args: tuple = ()


@dataclass(frozen=True)
class BehaviorSpec:
    goal: str
    kind: BehaviorKind
    steps: tuple[StepSpec, ...]
    precond: str | None = None
    persistent: bool = False
    name: str | None = None


@dataclass(frozen=True)
class ScriptEntry:
    instant: int
    flags: Mapping[str, bool] = field(default_factory=dict)
    succeed: tuple[str, ...] = ()
    fail: tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    policy: ConflictPolicy = field(default_factory=AllBest)
    max_instants: int = 100
    flags: Mapping[str, bool] = field(default_factory=dict)
    root_goals: tuple[str, ...] = ()
    behaviors: tuple[BehaviorSpec, ...] = ()
    script: tuple[ScriptEntry, ...] = ()


# -- precondition expressions ------------------------------------------------


def compile_precond(text: str, flags: Mapping[str, bool]) -> Callable[[Mapping[str, bool]], bool]:
    """Compile ``and``/``or``/``not`` over flag names into a predicate."""
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise ScenarioError(f"bad precondition {text!r}: {exc.msg}") from None

    def build(node) -> Callable[[Mapping[str, bool]], bool]:
        if isinstance(node, ast.BoolOp):
            parts = [build(value) for value in node.values]
            if isinstance(node.op, ast.And):
                return lambda world: all(part(world) for part in parts)
            return lambda world: any(part(world) for part in parts)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            inner = build(node.operand)
            return lambda world: not inner(world)
        if isinstance(node, ast.Name):
            if node.id not in flags:
                raise ScenarioError(f"precondition {text!r} references undeclared flag {node.id!r}")
            name = node.id
            return lambda world: world[name]
        if isinstance(node, ast.Constant) and isinstance(node.value, bool):
            value = node.value
            return lambda world: value
        raise ScenarioError(f"unsupported construct in precondition {text!r}")

    return build(tree)


# -- parsing -----------------------------------------------------------------


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise ScenarioError(message)


def _mapping(value, where: str, allowed: set[str]) -> dict:
    _expect(isinstance(value, dict), f"{where}: expected a mapping")
    unknown = sorted(set(value) - allowed)
    _expect(not unknown, f"{where}: unknown field(s) {', '.join(map(str, unknown))}")
    return value


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _name(value, where: str) -> str:
    _expect(isinstance(value, str) and value != "", f"{where}: expected a non-empty string")
    return value


def _parse_step(raw, where: str, flags: Mapping[str, bool]) -> StepSpec:
    raw = _mapping(raw, where, {"subgoal", "action", "args"})
    _expect(("subgoal" in raw) != ("action" in raw), f"{where}: need exactly one of subgoal/action")
    if "subgoal" in raw:
        _expect("args" not in raw, f"{where}: subgoal steps take no args")
        return StepSpec(subgoal=_name(raw["subgoal"], f"{where}.subgoal"))
    name = raw["action"]
    _expect(name in BUILTIN_ACTIONS, f"{where}: unknown action {name!r}")
    args = raw.get("args", [])
    _expect(isinstance(args, list), f"{where}.args: expected a list")
    types = BUILTIN_ACTIONS[name]
    _expect(len(args) == len(types), f"{where}: {name} takes {len(types)} argument(s)")
    for i, (arg, kind) in enumerate(zip(args, types)):
        _expect(isinstance(arg, kind), f"{where}.args[{i}]: expected {kind.__name__}")
    if name in _FLAG_ARGS:
        flag = args[_FLAG_ARGS[name]]
        _expect(flag in flags, f"{where}: {name} references undeclared flag {flag!r}")
    return StepSpec(action=name, args=tuple(args))


def _parse_behavior(raw, where: str, flags: Mapping[str, bool]) -> BehaviorSpec:
    raw = _mapping(raw, where, {"goal", "precond", "kind", "steps", "persistent", "name"})
    _expect("goal" in raw, f"{where}: missing goal")
    goal = _name(raw["goal"], f"{where}.goal")
    kind_text = raw.get("kind", "sequential")
    _expect(isinstance(kind_text, str), f"{where}.kind: expected a string")
    try:
        kind = BehaviorKind(kind_text.lower())
    except ValueError:
        raise ScenarioError(f"{where}.kind: expected sequential or concurrent") from None
    precond = raw.get("precond")
    if precond is not None:
        _expect(isinstance(precond, str), f"{where}.precond: expected an expression string")
        compile_precond(precond, flags)
    steps = raw.get("steps", [])
    _expect(isinstance(steps, list), f"{where}.steps: expected a list")
    is_persistent = raw.get("persistent", False)
    _expect(isinstance(is_persistent, bool), f"{where}.persistent: expected a boolean")
    name = raw.get("name")
    if name is not None:
        name = _name(name, f"{where}.name")
    return BehaviorSpec(
        goal=goal,
        kind=kind,
        steps=tuple(_parse_step(s, f"{where}.steps[{i}]", flags) for i, s in enumerate(steps)),
        precond=precond,
        persistent=is_persistent,
        name=name,
    )


def _parse_script(raw, flags: Mapping[str, bool]) -> tuple[ScriptEntry, ...]:
    _expect(isinstance(raw, list), "script: expected a list")
    entries = []
    previous = 1
    for i, item in enumerate(raw):
        where = f"script[{i}]"
        item = _mapping(item, where, {"instant", "set", "succeed", "fail"})
        instant = item.get("instant")
        _expect(_is_int(instant) and instant >= 1, f"{where}.instant: expected an integer >= 1")
        _expect(instant >= previous, f"{where}.instant: instants must be non-decreasing")
        previous = instant
        assigned = item.get("set", {})
        _expect(isinstance(assigned, dict), f"{where}.set: expected a mapping")
        for flag, value in assigned.items():
            _expect(flag in flags, f"{where}.set: undeclared flag {flag!r}")
            _expect(isinstance(value, bool), f"{where}.set.{flag}: expected a boolean")
        outcomes = {}
        for key in ("succeed", "fail"):
            goals = item.get(key, [])
            _expect(isinstance(goals, list), f"{where}.{key}: expected a list")
            outcomes[key] = tuple(_name(g, f"{where}.{key}") for g in goals)
        entries.append(ScriptEntry(instant, dict(assigned), outcomes["succeed"], outcomes["fail"]))
    return tuple(entries)


def parse_scenario(data: Any) -> Scenario:
    """Validate already-loaded scenario data and build a :class:`Scenario`."""
    data = _mapping(
        data,
        "scenario",
        {"seed", "policy", "maxInstants", "flags", "rootGoals", "behaviors", "script"},
    )
    seed = data.get("seed", 0)
    _expect(_is_int(seed), "seed: expected an integer")
    policy_text = data.get("policy", "allbest")
    _expect(isinstance(policy_text, str), "policy: expected a string")
    try:
        policy = parse_policy(policy_text)
    except ValueError as exc:
        raise ScenarioError(f"policy: {exc}") from None
    max_instants = data.get("maxInstants", 100)
    _expect(_is_int(max_instants) and max_instants >= 1, "maxInstants: expected a positive integer")

    flags = data.get("flags", {})
    _expect(isinstance(flags, dict), "flags: expected a mapping")
    for flag, value in flags.items():
        _expect(isinstance(flag, str) and flag.isidentifier(), f"flags: bad flag name {flag!r}")
        _expect(isinstance(value, bool), f"flags.{flag}: expected a boolean")

    roots = data.get("rootGoals", [])
    _expect(isinstance(roots, list), "rootGoals: expected a list")
    roots = tuple(_name(g, "rootGoals") for g in roots)

    behaviors = data.get("behaviors", [])
    _expect(isinstance(behaviors, list), "behaviors: expected a list")
    return Scenario(
        seed=seed,
        policy=policy,
        max_instants=max_instants,
        flags=dict(flags),
        root_goals=roots,
        behaviors=tuple(
            _parse_behavior(b, f"behaviors[{i}]", flags) for i, b in enumerate(behaviors)
        ),
        script=_parse_script(data.get("script", []), flags),
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from None
    return parse_scenario(data)


# -- running -----------------------------------------------------------------


class ScenarioRun:
    """One execution of a scenario.  Iterate :meth:`trace` for output lines.

    ``max_rounds`` is the largest micro-round count any instant needed.
    """

    def __init__(
        self,
        scenario: Scenario,
        *,
        seed: int | None = None,
        policy: ConflictPolicy | None = None,
        max_instants: int | None = None,
    ) -> None:
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.policy = scenario.policy if policy is None else policy
        self.max_instants = scenario.max_instants if max_instants is None else max_instants
        self.world = World(scenario.flags)
        self.goals = GoalStore(listener=self._on_goal)
        self.engine = RuleEngine(self.seed)
        self.engine.on_fire = self._on_fire
        self.max_rounds = 0
        self.instants = 0
        for spec in scenario.behaviors:
            rule = behavior_rule(self._behavior(spec), self.goals)
            self.engine.add(persistent(rule) if spec.persistent else rule)

    def _on_goal(self, name, old, new):
        self.world.events.append(f"{name}:{new}")

    def _on_fire(self, rule, initial):
        if initial and rule is not None:
            self.world.events.append(f"fire:{rule.name}")

    def _behavior(self, spec: BehaviorSpec) -> Behavior:
        precond = None
        if spec.precond is not None:
            predicate = compile_precond(spec.precond, self.scenario.flags)
            flags = self.world.flags
            precond = lambda: predicate(flags)  # noqa: E731
        steps = [
            Subgoal(s.subgoal)
            if s.subgoal is not None
            else Action(builtin_action(s.action, s.args, self.world))
            for s in spec.steps
        ]
        return Behavior(spec.goal, precond, spec.kind, steps, spec.name)

    def _apply_script(self, instant: int) -> None:
        for entry in self.scenario.script:
            if entry.instant != instant:
                continue
            self.world.flags.update(entry.flags)
            for goal in entry.succeed:
                self.goals.succeed(goal)
            for goal in entry.fail:
                self.goals.fail(goal)

    def _roots_done(self) -> bool:
        roots = self.scenario.root_goals
        return bool(roots) and all(self.goals.is_done(g) for g in roots)

    def trace(self) -> Iterator[str]:
        for goal in self.scenario.root_goals:
            self.goals.set(goal)
        for instant in range(1, self.max_instants + 1):
            self._apply_script(instant)
            report = self.engine.monitor(self.policy)
            self.instants = instant
            self.max_rounds = max(self.max_rounds, report.rounds)
            events, self.world.events = self.world.events, []
            yield f"instant={instant} events=[{';'.join(events)}]"
            if self._roots_done():
                break
        for goal in self.scenario.root_goals:
            yield f"final {goal}={self.goals.status(goal)}"


def run_scenario(scenario: Scenario, **overrides) -> list[str]:
    return list(ScenarioRun(scenario, **overrides).trace())
