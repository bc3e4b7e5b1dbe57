"""Greatest common divisor by two symmetric subtraction rules."""

from __future__ import annotations

from .engine import AllBest, Rule, mk_set, persistent
from .reactive import effect


class Cell:
    __slots__ = ("value",)

    def __init__(self, value: int) -> None:
        self.value = value


def _subtract(big: Cell, small: Cell) -> Rule:
    # enabled while big > small; subtracts small from big
    return persistent(
        Rule(
            cond=lambda: 1 if big.value > small.value else 0,
            action=effect(lambda: setattr(big, "value", big.value - small.value)),
        )
    )


def run_gcd(x: int, y: int) -> int:
    """``do X > Y -> X := X - Y | Y > X -> Y := Y - X od``, one rule per guard."""
    if x < 1 or y < 1:
        raise ValueError("gcd arguments must be positive integers")
    rx, ry = Cell(x), Cell(y)
    rules = mk_set([_subtract(rx, ry), _subtract(ry, rx)])
    policy = AllBest()
    while rx.value != ry.value:
        rules.monitor(policy)
    return rx.value
