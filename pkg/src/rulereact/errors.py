"""Exception hierarchy shared by every layer of the package."""


class RuleReactError(Exception):
    """Base class for errors raised while building or running programs."""


class InstantaneousLoop(RuleReactError):
    """A loop body terminated without reaching any control point."""


class CloseDivergence(RuleReactError):
    """A closed program kept suspending past its micro-round bound."""


class ReentrantActivation(RuleReactError):
    """A program was activated again from inside its own activation."""


class ReentrantMonitor(RuleReactError):
    """``monitor`` was called on an engine that is already monitoring."""


class FitnessError(RuleReactError, ValueError):
    """A condition produced something other than a non-negative integer."""


class UnknownGoal(RuleReactError):
    """The goal is not present in the store."""


class NotAvailable(RuleReactError):
    """The goal exists but is not in the Available state."""


class ScenarioError(RuleReactError):
    """A scenario file failed to parse or validate."""
