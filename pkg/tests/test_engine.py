from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulereact.engine import (
    AllBest,
    AllDownTo,
    FitnessEntry,
    RandBest,
    RandDownTo,
    Rule,
    RuleEngine,
    add_rule,
    compute_enabled,
    condition_gate,
    mk_set,
    monitor,
    new_set,
    parse_policy,
    persistent,
    wait,
)
from rulereact.errors import FitnessError, ReentrantMonitor, RuleReactError
from rulereact.reactive import effect, loop, react, seq, stop_point


def entries(*fitnesses):
    return [FitnessEntry(token, f) for token, f in enumerate(fitnesses, start=1)]


def emitting(log, *items):
    return seq(*(effect(lambda item=item: log.append(item)) for item in items))


# -- compute_enabled ---------------------------------------------------------


def test_allbest_argmax():
    reg = entries(3, 1, 3, 0)
    assert compute_enabled(AllBest(), reg, random.Random(0)) == [reg[0], reg[2]]


def test_allbest_all_zero_is_empty():
    assert compute_enabled(AllBest(), entries(0, 0), random.Random(0)) == []
    assert compute_enabled(AllBest(), [], random.Random(0)) == []


def test_alldownto_threshold():
    reg = entries(3, 1, 2, 0)
    assert compute_enabled(AllDownTo(2), reg, random.Random(0)) == [reg[0], reg[2]]


def test_alldownto_zero_still_excludes_zero():
    reg = entries(0, 4, 0, 1)
    assert compute_enabled(AllDownTo(0), reg, random.Random(0)) == [reg[1], reg[3]]


def test_randbest_seeded_choice_is_reproducible():
    reg = entries(5, 5)
    first = compute_enabled(RandBest(), reg, random.Random(42))
    second = compute_enabled(RandBest(), reg, random.Random(42))
    assert first == second and len(first) == 1 and first[0] in reg


def test_rand_policies_empty_when_nothing_qualifies():
    rng = random.Random(0)
    assert compute_enabled(RandBest(), entries(0), rng) == []
    assert compute_enabled(RandDownTo(5), entries(1, 4), rng) == []


@settings(max_examples=300)
@given(
    st.lists(st.integers(0, 10), max_size=20),
    st.integers(0, 12),
    st.integers(0, 2**32),
)
def test_rand_refines_all(fitnesses, threshold, seed):
    reg = entries(*fitnesses)
    for rand_policy, all_policy in ((RandBest(), AllBest()), (RandDownTo(threshold), AllDownTo(threshold))):
        full = compute_enabled(all_policy, reg, random.Random(seed))
        picked = compute_enabled(rand_policy, reg, random.Random(seed))
        assert len(picked) == (1 if full else 0)
        assert set(picked) <= set(full)
        assert all(e.fitness >= 1 for e in full)


@pytest.mark.parametrize(
    "text, policy",
    [
        ("allbest", AllBest()),
        ("RandBest", RandBest()),
        ("alldownto:3", AllDownTo(3)),
        ("randdownto:0", RandDownTo(0)),
    ],
)
def test_parse_policy(text, policy):
    assert parse_policy(text) == policy
    assert parse_policy(str(policy)) == policy


@pytest.mark.parametrize("text", ["", "best", "alldownto", "alldownto:-1", "randdownto:x"])
def test_parse_policy_rejects(text):
    with pytest.raises(ValueError):
        parse_policy(text)


# -- engine ------------------------------------------------------------------


def test_empty_engine_monitor_is_noop():
    engine = new_set(0)
    report = monitor(AllBest(), engine)
    assert report.registry == () and report.fired == ()
    assert len(engine) == 0


def test_new_set_add_rule_fires():
    log = []
    engine = add_rule(Rule(lambda: 1, emitting(log, "x")), new_set(0))
    monitor(AllBest(), engine)
    assert log == ["x"]


def test_rules_fire_in_insertion_order():
    log = []
    engine = mk_set([Rule(lambda: 1, emitting(log, "r1")), Rule(lambda: 1, emitting(log, "r2"))])
    monitor(AllBest(), engine)
    assert log == ["r1", "r2"]


def test_zero_fitness_never_fires():
    log = []
    engine = mk_set([Rule(lambda: 0, emitting(log, "never"))])
    for policy in (AllBest(), RandBest(), AllDownTo(0), RandDownTo(0)):
        for _ in range(5):
            monitor(policy, engine)
    assert log == [] and len(engine) == 1


def test_mk_set_matches_add_rule_chain():
    def trace(build):
        log = []
        a = Rule(lambda: 1, seq(emitting(log, "a1"), wait(), emitting(log, "a2")))
        b = Rule(lambda: 1, seq(emitting(log, "b1"), wait(), emitting(log, "b2")))
        engine = build(a, b)
        out = []
        for _ in range(3):
            monitor(AllBest(), engine)
            out.append(list(log))
            log.clear()
        return out

    via_mk = trace(lambda a, b: mk_set([a, b], seed=3))
    via_add = trace(lambda a, b: add_rule(b, add_rule(a, new_set(3))))
    assert via_mk == via_add == [["a1", "b1"], ["a2", "b2"], []]
    assert trace(lambda a, b: mk_set([b, a])) == [["b1", "a1"], ["b2", "a2"], []]


def test_mk_set_empty_is_new_set():
    engine = mk_set([])
    assert len(engine) == 0
    assert monitor(AllBest(), engine).fired == ()


def test_add_rule_returns_same_handle():
    engine = new_set()
    assert add_rule(Rule(lambda: 0, effect(lambda: None)), engine) is engine


def test_same_seed_same_trace():
    def run(seed):
        log = []
        rules = [Rule(lambda i=i: 2, emitting(log, f"r{i}")) for i in range(6)]
        engine = mk_set([persistent(r) for r in rules], seed=seed)
        for _ in range(20):
            monitor(RandBest(), engine)
        return log

    assert run(7) == run(7)
    assert len(run(7)) == 20


def test_fitness_evaluated_before_any_firing():
    # both conditions read x == 0 in phase A; both fire, and the second
    # action observes the first one's write
    state = {"x": 0, "seen": None}

    def first():
        state["x"] = 1

    def second():
        state["seen"] = state["x"]

    engine = mk_set(
        [
            Rule(lambda: 1 if state["x"] == 0 else 0, effect(first)),
            Rule(lambda: 1 if state["x"] == 0 else 0, effect(second)),
        ]
    )
    report = monitor(AllBest(), engine)
    assert [e.fitness for e in report.registry] == [1, 1]
    assert state["seen"] == 1


def test_all_zero_leaves_rules_live():
    log = []
    engine = mk_set([Rule(lambda: 0, emitting(log, "a")), Rule(lambda: 0, emitting(log, "b"))])
    report = monitor(AllBest(), engine)
    assert log == [] and report.selected == () and len(engine) == 2


def test_gate_evaluates_once_per_instant():
    calls = []
    ready = {"go": False}

    def cond():
        calls.append(1)
        return 1 if ready["go"] else 0

    engine = mk_set([Rule(cond, effect(lambda: None))])
    for k in range(1, 5):
        monitor(AllBest(), engine)
        assert len(calls) == k
    ready["go"] = True
    monitor(AllBest(), engine)
    assert len(calls) == 5 and len(engine) == 0


def test_equal_fitness_gates_both_pass_under_allbest():
    log = []
    engine = mk_set([Rule(lambda: 4, emitting(log, "a")), Rule(lambda: 4, emitting(log, "b")), Rule(lambda: 2, emitting(log, "c"))])
    report = monitor(AllBest(), engine)
    assert log == ["a", "b"]
    assert [e.fitness for e in report.selected] == [4, 4]


def test_tokens_unique():
    engine = mk_set([persistent(Rule(lambda: 1, effect(lambda: None))) for _ in range(3)])
    tokens = []
    for _ in range(5):
        tokens += [e.token for e in monitor(AllBest(), engine).registry]
    assert len(tokens) == len(set(tokens)) == 15


def test_wait_absent_overlap():
    log = []
    a = Rule(lambda: 1, seq(emitting(log, "a1"), wait(), emitting(log, "a2")), "A")
    b = Rule(lambda: 1, emitting(log, "b"), "B")
    engine = mk_set([a, b])
    monitor(AllBest(), engine)
    assert log == ["a1", "b"]
    log.clear()
    report = monitor(AllBest(), engine)
    assert log == ["a2"]
    # the unconditional resumption is not a selected gate
    assert report.registry == ()
    assert len(engine) == 0


def test_wait_present_never_satisfied_stays_live():
    log = []
    engine = mk_set([Rule(lambda: 1, seq(emitting(log, "start"), wait(lambda: 0), emitting(log, "never")))])
    for _ in range(10):
        monitor(AllBest(), engine)
    assert log == ["start"] and len(engine) == 1


def test_waiting_remainder_competes_like_a_rule():
    log = []
    level = {"v": 0}
    waiting = Rule(lambda: 1, seq(emitting(log, "w0"), wait(lambda: level["v"]), emitting(log, "w1")))
    engine = mk_set([waiting])
    monitor(AllBest(), engine)
    engine.add(Rule(lambda: 3, emitting(log, "fresh3")))
    level["v"] = 2
    monitor(AllBest(), engine)
    # fitness 2 loses to 3 under AllBest
    assert log == ["w0", "fresh3"]
    engine.add(Rule(lambda: 2, emitting(log, "fresh2")))
    monitor(AllBest(), engine)
    assert log == ["w0", "fresh3", "w1", "fresh2"]


def test_fired_report_distinguishes_resumption():
    engine = mk_set([Rule(lambda: 1, seq(wait(lambda: 1), effect(lambda: None)), "r")])
    assert monitor(AllBest(), engine).fired == (("fire", "r"),)
    assert monitor(AllBest(), engine).fired == (("resume", "r"),)


def test_on_fire_hook():
    seen = []
    rule = Rule(lambda: 1, effect(lambda: None), "named")
    engine = mk_set([rule])
    engine.on_fire = lambda r, initial: seen.append((r.name, initial))
    monitor(AllBest(), engine)
    assert seen == [("named", True)]


def test_rule_added_during_action_waits_for_next_instant():
    log = []
    engine = new_set()
    late = Rule(lambda: 1, emitting(log, "late"))
    engine.add(Rule(lambda: 1, seq(effect(lambda: engine.add(late)), emitting(log, "adder"))))
    monitor(AllBest(), engine)
    assert log == ["adder"] and len(engine) == 1
    monitor(AllBest(), engine)
    assert log == ["adder", "late"]


def test_reentrant_monitor_raises():
    engine = new_set()
    engine.add(Rule(lambda: 1, effect(lambda: monitor(AllBest(), engine))))
    with pytest.raises(ReentrantMonitor):
        monitor(AllBest(), engine)


def test_engines_are_independent():
    log = []
    e1 = mk_set([persistent(Rule(lambda: 1, emitting(log, "e1")))])
    e2 = mk_set([persistent(Rule(lambda: 1, emitting(log, "e2")))])
    for _ in range(2):
        monitor(AllBest(), e1)
        monitor(AllBest(), e2)
    assert log == ["e1", "e2", "e1", "e2"]


def test_policy_may_vary_per_instant():
    log = []
    engine = mk_set([persistent(Rule(lambda: 1, emitting(log, "one"))), persistent(Rule(lambda: 3, emitting(log, "three")))])
    monitor(AllBest(), engine)
    monitor(AllDownTo(1), engine)
    assert log == ["three", "one", "three"]


def test_negative_fitness_rejected():
    engine = mk_set([Rule(lambda: -1, effect(lambda: None))])
    with pytest.raises(FitnessError):
        monitor(AllBest(), engine)


def test_bool_fitness_accepted():
    log = []
    engine = mk_set([Rule(lambda: True, emitting(log, "t"))])
    monitor(AllBest(), engine)
    assert log == ["t"]


def test_gate_outside_engine_is_an_error():
    with pytest.raises(RuleReactError):
        react(condition_gate(lambda: 1))


def test_monitor_rejects_non_policy():
    with pytest.raises(TypeError):
        monitor("allbest", new_set())


def test_same_rule_in_two_engines_has_separate_state():
    log = []
    rule = Rule(lambda: 1, seq(emitting(log, "x"), wait(), emitting(log, "y")))
    e1, e2 = mk_set([rule]), mk_set([rule])
    monitor(AllBest(), e1)
    monitor(AllBest(), e1)
    monitor(AllBest(), e2)
    assert log == ["x", "y", "x"]


# -- persistent ----------------------------------------------------------------


def test_persistent_counter():
    count = {"n": 0}
    bump = effect(lambda: count.__setitem__("n", count["n"] + 1))
    plain = mk_set([Rule(lambda: 1, bump)])
    for _ in range(5):
        monitor(AllBest(), plain)
    assert count["n"] == 1
    count["n"] = 0
    engine = mk_set([persistent(Rule(lambda: 1, bump))])
    for _ in range(5):
        monitor(AllBest(), engine)
    assert count["n"] == 5


def test_persistent_pauses_while_disabled():
    log = []
    on = {"v": 1}
    engine = mk_set([persistent(Rule(lambda: on["v"], emitting(log, "tick")))])
    pattern = [1, 1, 0, 0, 1, 0, 1]
    for v in pattern:
        on["v"] = v
        monitor(AllBest(), engine)
    assert len(log) == sum(pattern)
    assert len(engine) == 1


def test_persistent_multi_instant_action():
    log = []
    engine = mk_set([persistent(Rule(lambda: 1, seq(emitting(log, "a"), wait(), emitting(log, "b"))))])
    per_instant = []
    for _ in range(4):
        monitor(AllBest(), engine)
        per_instant.append(list(log))
        log.clear()
    # re-arming goes through wait(cond), whose stop defers the next firing
    assert per_instant == [["a"], ["b"], ["a"], ["b"]]


def test_monitor_settles_in_two_rounds_with_wait_actions():
    log = []
    engine = mk_set(
        [
            persistent(Rule(lambda: 1, seq(emitting(log, "p"), wait(), emitting(log, "q")))),
            Rule(lambda: 1, seq(wait(lambda: 1), wait(), emitting(log, "r"))),
        ]
    )
    for _ in range(6):
        assert monitor(AllBest(), engine).rounds <= 2


def test_micro_round_bound_is_configurable():
    from rulereact.errors import CloseDivergence
    from rulereact.reactive import suspend_point

    engine = RuleEngine(micro_round_bound=2)
    # a raw suspend after the gate needs a third round
    engine.add(Rule(lambda: 1, seq(suspend_point(), effect(lambda: None))))
    with pytest.raises(CloseDivergence):
        monitor(AllBest(), engine)
    engine = RuleEngine(micro_round_bound=3)
    engine.add(Rule(lambda: 1, seq(suspend_point(), effect(lambda: None))))
    assert monitor(AllBest(), engine).rounds == 3


def test_instantaneous_loop_in_action_propagates():
    from rulereact.errors import InstantaneousLoop

    engine = mk_set([Rule(lambda: 1, loop(effect(lambda: None)))])
    with pytest.raises(InstantaneousLoop):
        monitor(AllBest(), engine)


def test_stop_in_action_parks_rule_until_next_instant():
    log = []
    engine = mk_set([Rule(lambda: 1, seq(emitting(log, "a"), stop_point(), emitting(log, "b")))])
    monitor(AllBest(), engine)
    assert log == ["a"]
    monitor(AllBest(), engine)
    # continuation after a bare stop runs in phase A, before any selection
    assert log == ["a", "b"]
