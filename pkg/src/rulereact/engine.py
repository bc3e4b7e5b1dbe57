"""Rules with integer fitness, conflict resolution and overlapping actions.

A rule set is a merge of rule instances, each ``seq(gate(cond), action)``.
:func:`monitor` runs one instant of::

    close(merge(clear_registry, merge(rules...), select))

The merge order does the work: the registry is cleared first, every gate
evaluates its condition, registers ``(token, fitness)`` and suspends, the
selector filters the registry last, and in the next micro-round the gates
whose token survived let their action run.  Fitness 0 means "not enabled".
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import FitnessError, ReentrantMonitor, RuleReactError
from .reactive import (
    DEFAULT_ROUND_BOUND,
    SUSPENDED,
    STOPPED,
    TERMINATED,
    ActivationStatus,
    Instant,
    Program,
    close,
    effect,
    loop,
    merge,
    react,
    seq,
    stop_point,
    suspend_point,
)

__all__ = [
    "AllBest",
    "RandBest",
    "AllDownTo",
    "RandDownTo",
    "ConflictPolicy",
    "FitnessEntry",
    "InstantReport",
    "Rule",
    "RuleEngine",
    "add_rule",
    "compute_enabled",
    "condition_gate",
    "mk_set",
    "monitor",
    "new_set",
    "parse_policy",
    "persistent",
    "wait",
]

Condition = Callable[[], int]


@dataclass(frozen=True)
class FitnessEntry:
    token: int
    fitness: int


class ConflictPolicy:
    randomized = False


@dataclass(frozen=True)
class AllBest(ConflictPolicy):
    def __str__(self):
        return "allbest"


@dataclass(frozen=True)
class RandBest(ConflictPolicy):
    randomized = True

    def __str__(self):
        return "randbest"


@dataclass(frozen=True)
class AllDownTo(ConflictPolicy):
    threshold: int

    def __str__(self):
        return f"alldownto:{self.threshold}"


@dataclass(frozen=True)
class RandDownTo(ConflictPolicy):
    threshold: int
    randomized = True

    def __str__(self):
        return f"randdownto:{self.threshold}"


_POLICY_RE = re.compile(r"^(allbest|randbest|alldownto:(\d+)|randdownto:(\d+))$")


def parse_policy(text: str) -> ConflictPolicy:
    """Parse ``allbest``, ``randbest``, ``alldownto:<v>`` or ``randdownto:<v>``."""
    match = _POLICY_RE.match(text.strip().lower())
    if match is None:
        raise ValueError(f"unknown conflict policy {text!r}")
    word = match.group(1)
    if word == "allbest":
        return AllBest()
    if word == "randbest":
        return RandBest()
    if word.startswith("alldownto"):
        return AllDownTo(int(match.group(2)))
    return RandDownTo(int(match.group(3)))


def compute_enabled(
    policy: ConflictPolicy, registry: Sequence[FitnessEntry], rng: random.Random
) -> list[FitnessEntry]:
    """Filter ``registry`` down to the entries allowed to fire.

    The selection floor is always 1, so a zero-fitness entry is never
    chosen, not even by ``AllDownTo(0)``.  Randomized policies draw one
    element of the corresponding ``All*`` result with ``rng.choice``.
    """
    if isinstance(policy, (AllBest, RandBest)):
        best = max((entry.fitness for entry in registry), default=0)
        chosen = [entry for entry in registry if entry.fitness == best] if best >= 1 else []
    elif isinstance(policy, (AllDownTo, RandDownTo)):
        floor = max(policy.threshold, 1)
        chosen = [entry for entry in registry if entry.fitness >= floor]
    else:
        raise TypeError(f"not a conflict policy: {policy!r}")
    if policy.randomized and chosen:
        return [rng.choice(chosen)]
    return chosen


def _fitness(value) -> int:
    if isinstance(value, bool):
        return int(value)
    if not isinstance(value, int) or value < 0:
        raise FitnessError(f"condition returned {value!r}; fitness must be a non-negative integer")
    return value


@dataclass(frozen=True)
class Rule:
    """A condition returning a fitness and an action program (a template,
    copied each time the rule is added to an engine)."""

    cond: Condition
    action: Program
    name: str | None = None


@dataclass(frozen=True)
class InstantReport:
    index: int
    registry: tuple[FitnessEntry, ...]
    selected: tuple[FitnessEntry, ...]
    rounds: int
    fired: tuple[tuple[str, str | None], ...]


class _Gate(Program):
    """Blocks its continuation until monitoring selects it.

    Each blocked instant: evaluate the condition once, register a fresh
    token, suspend; on resumption pass if the token was selected, else stop
    and try again next instant.
    """

    __slots__ = ("cond", "initial", "_token")

    def __init__(self, cond: Condition, initial: bool = False) -> None:
        super().__init__()
        self.cond = cond
        self.initial = initial
        self._token: int | None = None

    def _step(self, instant: Instant) -> ActivationStatus:
        engine = instant.env
        if not isinstance(engine, RuleEngine):
            raise RuleReactError("condition gate activated outside a rule engine")
        if self._token is None:
            self._token = engine._register(self.cond)
            return SUSPENDED
        token, self._token = self._token, None
        if token in engine._selected:
            engine._passed(self.initial)
            return TERMINATED
        return STOPPED

    def fresh(self):
        return _Gate(self.cond, self.initial)

    def parked(self):
        if self._status is SUSPENDED:
            yield "suspend"
        elif self._status is STOPPED:
            yield "stop"


class _RuleInstance(Program):
    __slots__ = ("rule", "body")

    def __init__(self, rule: Rule, body: Program) -> None:
        super().__init__()
        self.rule = rule
        self.body = body

    def _step(self, instant):
        engine = instant.env
        outer, engine._current = engine._current, self.rule
        try:
            return self.body.activate(instant)
        finally:
            engine._current = outer

    def fresh(self):
        return _RuleInstance(self.rule, self.body.fresh())

    def parked(self):
        yield from self.body.parked()


def condition_gate(cond: Condition) -> Program:
    return _Gate(cond)


def wait(cond: Condition | None = None) -> Program:
    """Interrupt the current action until a later instant.

    ``wait()`` resumes unconditionally at the next instant, after every
    condition of that instant has been evaluated.  ``wait(f)`` turns the
    rest of the action into a rule guarded by ``f``.
    """
    if cond is None:
        return seq(stop_point(), suspend_point())
    return seq(stop_point(), _Gate(cond))


def persistent(rule: Rule) -> Rule:
    """Re-arm ``rule`` on its own condition after each execution."""
    body = seq(rule.action, wait(rule.cond))
    return Rule(rule.cond, loop(body), rule.name)


class RuleEngine:
    """An ordered set of live rule instances plus a per-instant registry.

    Rules fire in insertion order.  ``on_fire(rule, initial)`` is called
    whenever a gate passes; ``initial`` is false for ``wait(f)`` resumptions.
    """

    def __init__(self, seed: int = 0, micro_round_bound: int = DEFAULT_ROUND_BOUND) -> None:
        if micro_round_bound < 1:
            raise ValueError("micro_round_bound must be positive")
        self.seed = seed
        self.rng = random.Random(seed)
        self.micro_round_bound = micro_round_bound
        self.registry: list[FitnessEntry] = []
        self.instant = 0
        self.last_report: InstantReport | None = None
        self.on_fire: Callable[[Rule | None, bool], None] | None = None
        self._instances: list[_RuleInstance] = []
        self._selected: frozenset[int] = frozenset()
        self._tokens = itertools.count(1)
        self._policy: ConflictPolicy = AllBest()
        self._fired: list[tuple[str, str | None]] = []
        self._current: Rule | None = None
        self._monitoring = False

    def __len__(self) -> int:
        return len(self._instances)

    @property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(instance.rule for instance in self._instances)

    @property
    def instances(self) -> tuple[Program, ...]:
        return tuple(self._instances)

    def add(self, rule: Rule) -> RuleEngine:
        body = seq(_Gate(rule.cond, initial=True), rule.action.fresh())
        self._instances.append(_RuleInstance(rule, body))
        return self

    def _register(self, cond: Condition) -> int:
        token = next(self._tokens)
        self.registry.append(FitnessEntry(token, _fitness(cond())))
        return token

    def _passed(self, initial: bool) -> None:
        rule = self._current
        name = rule.name if rule is not None else None
        self._fired.append(("fire" if initial else "resume", name))
        if self.on_fire is not None:
            self.on_fire(rule, initial)

    def _clear(self) -> None:
        self.registry = []
        self._selected = frozenset()

    def _select(self) -> None:
        chosen = compute_enabled(self._policy, self.registry, self.rng)
        self._selected = frozenset(entry.token for entry in chosen)

    def monitor(self, policy: ConflictPolicy) -> InstantReport:
        """Execute exactly one instant under ``policy``."""
        if self._monitoring:
            raise ReentrantMonitor("monitor called from inside an action or condition")
        if not isinstance(policy, ConflictPolicy):
            raise TypeError(f"not a conflict policy: {policy!r}")
        self._monitoring = True
        try:
            self.instant += 1
            self._policy = policy
            self._fired = []
            clear_var = loop(seq(effect(self._clear), stop_point()))
            selector = loop(seq(effect(self._select), stop_point()))
            root = close(
                merge(clear_var, merge(merge(*self._instances), selector)),
                self.micro_round_bound,
            )
            react(root, env=self)
            # rules added by actions during this instant are kept untouched
            self._instances = [i for i in self._instances if i.status is not TERMINATED]
            selected = tuple(e for e in self.registry if e.token in self._selected)
            self.last_report = InstantReport(
                self.instant, tuple(self.registry), selected, root.rounds, tuple(self._fired)
            )
        finally:
            self._monitoring = False
        return self.last_report


def new_set(seed: int = 0, micro_round_bound: int = DEFAULT_ROUND_BOUND) -> RuleEngine:
    return RuleEngine(seed, micro_round_bound)


def add_rule(rule: Rule, engine: RuleEngine) -> RuleEngine:
    """Append ``rule``; returns the same engine handle."""
    return engine.add(rule)


def mk_set(rules: Iterable[Rule], seed: int = 0) -> RuleEngine:
    """Engine holding ``rules``; list order is activation order."""
    engine = new_set(seed)
    for rule in rules:
        engine.add(rule)
    return engine


def monitor(policy: ConflictPolicy, engine: RuleEngine) -> InstantReport:
    return engine.monitor(policy)
