"""Rule-based reactive programming with overlapping rules.

Layers, bottom up:

* :mod:`rulereact.reactive` - resumable programs run instant by instant.
* :mod:`rulereact.engine` - rules, conflict resolution, ``wait``/``persistent``.
* :mod:`rulereact.goals` - the goal status store.
* :mod:`rulereact.behaviors` - declarative behaviors compiled to rules.
* :mod:`rulereact.scenario` and :mod:`rulereact.cli` - the scenario harness.
"""

from .behaviors import Action, Behavior, BehaviorKind, Subgoal, behavior_rule, split_steps
from .engine import (
    AllBest,
    AllDownTo,
    ConflictPolicy,
    FitnessEntry,
    RandBest,
    RandDownTo,
    Rule,
    RuleEngine,
    add_rule,
    compute_enabled,
    mk_set,
    monitor,
    new_set,
    parse_policy,
    persistent,
    wait,
)
from .errors import (
    CloseDivergence,
    FitnessError,
    InstantaneousLoop,
    NotAvailable,
    ReentrantActivation,
    ReentrantMonitor,
    RuleReactError,
    ScenarioError,
    UnknownGoal,
)
from .gcd import run_gcd
from .goals import GoalStatus, GoalStore
from .reactive import (
    ActivationStatus,
    Program,
    close,
    defer,
    effect,
    loop,
    merge,
    nothing,
    react,
    seq,
    stop_point,
    suspend_point,
)

__version__ = "0.1.0"
