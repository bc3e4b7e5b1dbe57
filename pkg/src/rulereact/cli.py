"""Command-line entry point: ``rulereact gcd X Y`` and ``rulereact run FILE``."""

from __future__ import annotations

import argparse
import sys

from .engine import parse_policy
from .errors import RuleReactError, ScenarioError
from .gcd import run_gcd
from .scenario import ScenarioRun, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ENGINE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text}")
    return value


def _policy(text: str):
    try:
        return parse_policy(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rulereact", description="Rule-based reactive engine harness.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gcd = sub.add_parser("gcd", help="compute gcd(x, y) with two persistent rules")
    gcd.add_argument("x", type=_positive)
    gcd.add_argument("y", type=_positive)

    run = sub.add_parser("run", help="run an agent scenario and print its trace")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--policy", type=_policy, help="allbest|randbest|alldownto:V|randdownto:V")
    run.add_argument("--max-instants", type=_positive)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gcd":
        print(run_gcd(args.x, args.y))
        return EXIT_OK

    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"rulereact: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run = ScenarioRun(
        scenario, seed=args.seed, policy=args.policy, max_instants=args.max_instants
    )
    try:
        for line in run.trace():
            print(line)
    except RuleReactError as exc:
        sys.stdout.flush()
        print(f"rulereact: engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    return EXIT_OK
