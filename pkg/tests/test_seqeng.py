from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import B, all_terms
from prsbuchi.brs import successors
from prsbuchi.graphs import RunMode
from prsbuchi.oracle import find_witness
from prsbuchi.seqeng import (
    Constraint,
    PrefixSystem,
    ReachAutomaton,
    head_path,
    head_reachable,
    infinite_run_seq,
    is_pop_free,
    pre_star,
    term_to_word,
    word_to_term,
)
from prsbuchi.terms import EPS, atom, is_seq_term, last

VARS5 = ("X", "Y", "Z", "W", "V")
MODES = list(RunMode)
PROBLEM = {RunMode.ACCEPTING_INFINITELY_OFTEN: 1, RunMode.NO_ACCEPTING: 2,
           RunMode.FINITELY_MANY_NON_NULL_ACCEPTING: 3}


def test_head_reachable_examples():
    assert head_reachable(B("rule r1: X -a-> Y.(Z);"), "X") == {"X", "Z"}
    assert head_reachable(B("accepting rule r1: X -a-> Y;"), "X", Constraint.NON_ACCEPTING) == {"X"}
    assert head_reachable(B(""), "X") == {"X"}


def test_head_reachable_rejects_parallel():
    with pytest.raises(ValueError):
        head_reachable(B("rule r1: X -a-> Y || Z;"), "X")


def test_infinite_run_examples():
    b = B("rule r1: X -a-> Y.(Z); accepting rule r2: Z -c-> Z;")
    d = infinite_run_seq(b, "X", RunMode.ACCEPTING_INFINITELY_OFTEN)
    assert d.is_yes and d.witness.unroll(b, 3) is not None
    assert infinite_run_seq(B("accepting rule r1: X -a-> Y;"), "X", RunMode.NO_ACCEPTING).is_no
    b = B("accepting rule r1: X -a-> Y; rule r2: Y -b-> Y;")
    d = infinite_run_seq(b, "X", RunMode.FINITELY_MANY_NON_NULL_ACCEPTING)
    assert d.is_yes and d.witness.prefix == ("r1",) and d.witness.pump == ("r2",)


def test_pre_star_examples():
    ps = PrefixSystem.of(B("rule r1: X -a-> Y;"))
    aut = pre_star(ps, _exact({("Y",)}))
    assert aut.accepts(("X",)) and aut.accepts(("Y",)) and not aut.accepts(("Z",))
    ps = PrefixSystem.of(B("rule r1: X.(Y) -a-> Z;"))
    aut = pre_star(ps, _exact({("Z",)}))
    assert aut.accepts(("Z",)) and aut.accepts(("Y", "X"))
    assert not aut.accepts(("X", "Y"))
    target = _exact({("Z",)})
    res = pre_star(PrefixSystem.of(B("")), target)
    assert res.trans == target.trans and res.finals == target.finals


def _exact(words: set) -> ReachAutomaton:
    """Automaton accepting exactly ``words`` (a trie from the control state)."""
    states, trans, finals = {"p"}, set(), set()
    for w in words:
        cur = "p"
        for i, x in enumerate(w):
            nxt = ("n", w[:i + 1])
            states.add(nxt)
            trans.add((cur, x, nxt))
            cur = nxt
        finals.add(cur)
    return ReachAutomaton(states, trans, finals)


def test_pop_free_examples():
    assert is_pop_free(B("rule r1: X -a-> Y.(Z); rule r2: X -b-> Y;"))
    assert not is_pop_free(B("rule r1: X.(Y) -a-> Z;"))
    assert not is_pop_free(B("rule r1: X -a-> eps;"))
    assert is_pop_free(B(""))


def test_word_round_trip_and_step_agreement():
    b = B("rule r1: X -a-> Y.(Z); rule r2: Y.(Z) -b-> X; rule r3: Z -c-> eps; rule r4: Z -a-> W;")
    ps = PrefixSystem.of(b)
    for t in all_terms(5, vars=("X", "Y", "Z", "W")):
        if t is EPS or not is_seq_term(t):
            continue
        w = term_to_word(t)
        assert w[0] == last(t)
        assert word_to_term(w) == t
        words = sorted(ps.step(w))
        terms = sorted((rid, term_to_word(t2)) for rid, _, t2 in successors(t, b))
        assert words == terms


def random_seq_brs(rng: random.Random, pops: bool = False):
    vs = VARS5[:rng.randint(2, 5)]
    rules = []
    for i in range(rng.randint(1, 6)):
        acc = "accepting " if rng.random() < 0.35 else ""
        x, y, z = (rng.choice(vs) for _ in range(3))
        kind = rng.choice(("push", "rename", "pop", "erase") if pops else ("push", "rename"))
        rhs = {"push": f"{y}.({z})", "rename": y, "pop": z, "erase": "eps"}[kind]
        lhs = f"{x}.({y})" if kind == "pop" else x
        rules.append(f"{acc}rule r{i + 1}: {lhs} -a-> {rhs};")
    return B(" ".join(rules), vars=", ".join(VARS5), alphabet="a"), vs[0]


def bfs_heads(b, x, depth: int, non_accepting: bool):
    acc = b.accepting_ids
    layer, seen = {atom(x)}, {atom(x)}
    for _ in range(depth):
        nxt = set()
        for t in layer:
            for rid, _, t2 in successors(t, b):
                if non_accepting and rid in acc:
                    continue
                if t2 not in seen:
                    nxt.add(t2)
        seen |= nxt
        layer = nxt
    return {last(t) for t in seen if t is not EPS}, not layer


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_head_reachable_matches_bfs_pop_free(seed):
    b, x = random_seq_brs(random.Random(seed))
    for c in Constraint:
        heads, _ = bfs_heads(b, x, 8, c is Constraint.NON_ACCEPTING)
        assert head_reachable(b, x, c) == heads


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_head_reachable_with_pops_contains_bfs(seed):
    b, x = random_seq_brs(random.Random(seed), pops=True)
    for c in Constraint:
        heads, saturated = bfs_heads(b, x, 8, c is Constraint.NON_ACCEPTING)
        got = head_reachable(b, x, c)
        assert heads <= got
        if saturated:
            assert got == heads


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_non_accepting_reach_is_monotone(seed):
    b, x = random_seq_brs(random.Random(seed), pops=seed % 2 == 0)
    assert head_reachable(b, x, Constraint.NON_ACCEPTING) <= head_reachable(b, x, Constraint.ANY)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_head_paths_replay(seed):
    b, x = random_seq_brs(random.Random(seed), pops=seed % 2 == 0)
    for y in head_reachable(b, x):
        p = head_path(b, x, y)
        assert p is not None
        t = atom(x)
        for rid in p:
            nxt = [t2 for r, _, t2 in successors(t, b) if r == rid]
            assert nxt
            t = nxt[0]
        # sequential terms have one rewritable position, so the rule id fixes the step
        assert t is not EPS and last(t) == y


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 100_000))
def test_infinite_runs_replay_and_agree_with_oracle(seed):
    b, x = random_seq_brs(random.Random(seed), pops=seed % 3 == 0)
    acc = b.accepting_ids
    for mode in MODES:
        d = infinite_run_seq(b, x, mode)
        if d.is_yes and d.witness is not None:
            w = d.witness
            assert w.unroll(b, 3) is not None
            pre_acc = any(r in acc for r in w.prefix)
            pump_acc = any(r in acc for r in w.pump)
            if mode is RunMode.ACCEPTING_INFINITELY_OFTEN:
                assert pump_acc
            elif mode is RunMode.NO_ACCEPTING:
                assert not pre_acc and not pump_acc
            else:
                assert pre_acc and not pump_acc
        lw = find_witness(b, x, PROBLEM[mode], depth=8, budget=5000)
        if lw is not None:
            assert not d.is_no
