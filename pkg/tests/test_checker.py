from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import B, brs_corpus, compare_with_oracle, pattern_ok, random_normal_form
from prsbuchi.checker import (
    GF,
    Act,
    And,
    Condition,
    F,
    Not,
    Or,
    ac_set,
    check_problem,
    decide_problem,
    fragment_verdict,
    model_check_fragment,
    parse_fragment,
    parse_prop,
    prop_action_set,
)
from prsbuchi.decision import Verdict
from prsbuchi.graphs import RunMode
from prsbuchi.petri import infinite_run, par_brs_to_net
from prsbuchi.saturate import decompose
from prsbuchi.seqeng import head_reachable
from prsbuchi.witness import replay

CORPUS = dict(brs_corpus())
E1 = CORPUS["e1"]


def test_prop_action_sets():
    assert prop_action_set(Act("a"), {"a", "b"}) == {"a"}
    assert prop_action_set(Not(Act("a")), {"a", "b"}) == {"b"}
    assert prop_action_set(And(Act("a"), Not(Act("a"))), {"a", "b"}) == set()
    assert prop_action_set(Or(Act("a"), Act("b")), {"a", "b"}) == {"a", "b"}
    with pytest.raises(ValueError):
        prop_action_set(Act("z"), {"a"})


def test_ac_set_examples():
    b = B("rule r1: X -a-> Y; rule r2: X -b-> Y;")
    assert ac_set(b, Act("a")) == {"r1"}
    assert ac_set(b, Not(Act("a"))) == {"r2"}
    assert ac_set(b, Or(Act("a"), Act("b"))) == {"r1", "r2"}


def props(sigma):
    leaf = st.sampled_from(sorted(sigma)).map(Act)
    return st.recursive(leaf, lambda sub: st.one_of(
        sub.map(Not), st.builds(And, sub, sub), st.builds(Or, sub, sub)), max_leaves=6)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_ac_set_partitions_rules(data):
    b = CORPUS[data.draw(st.sampled_from(sorted(CORPUS)))]
    psi = data.draw(props(b.alphabet))
    pos, neg = ac_set(b, psi), ac_set(b, Not(psi))
    assert pos | neg == {r.id for r in b.rules} and not pos & neg
    assert parse_prop(str(psi)) == psi


def test_formula_parsing():
    assert parse_fragment("GF a") == GF(Act("a"))
    assert parse_fragment("G F a") == GF(Act("a"))
    assert parse_fragment("!F (a || b)") == Not(F(Or(Act("a"), Act("b"))))
    assert parse_fragment("!!GF !a") == Not(Not(GF(Not(Act("a")))))
    assert parse_fragment(str(parse_fragment("F (a && !b)"))) == F(And(Act("a"), Not(Act("b"))))
    with pytest.raises(ValueError):
        parse_fragment("F")
    with pytest.raises(ValueError):
        parse_fragment("a")


def test_e3_problem_one_via_cond1():
    pv = check_problem(CORPUS["e3"], "X", 1)
    assert pv.verdict is Verdict.YES and pv.condition is Condition.COND1
    # candidates are tried in name order; X qualifies through its summary rule X -#-> Y
    bundle = decompose(CORPUS["e3"])
    assert "Y" in head_reachable(bundle.rseq, "X")
    net = par_brs_to_net(bundle.rpar)
    assert infinite_run(net, net.unit("Y"), RunMode.ACCEPTING_INFINITELY_OFTEN).is_yes
    assert replay(CORPUS["e3"], pv.witness, 3) and pattern_ok(CORPUS["e3"], pv.witness, 1)


def test_rename_cycle():
    b = B("rule r1: X -a-> Y; rule r2: Y -b-> X;")
    assert check_problem(b, "X", 2).verdict is Verdict.YES
    assert check_problem(b, "X", 1).verdict is Verdict.NO


def test_dead_system():
    b = B("accepting rule r1: X -a-> eps;")
    for p in (1, 2, 3):
        assert check_problem(b, "X", p).verdict is Verdict.NO


def test_unknown_variable_and_problem():
    bundle = decompose(E1)
    with pytest.raises(ValueError):
        decide_problem(bundle, "Q", 1)
    with pytest.raises(ValueError):
        decide_problem(bundle, "X", 4)


def test_fragment_examples():
    assert model_check_fragment(E1, "X", parse_fragment("GF a")).verdict is Verdict.YES
    d = model_check_fragment(E1, "X", parse_fragment("F b"))
    assert d.verdict is Verdict.NO and d.witness is not None
    assert model_check_fragment(B("rule r: X -a-> X;"), "X", parse_fragment("!GF b")).verdict is Verdict.YES


def test_vacuous_truth_is_flagged():
    fv = fragment_verdict(B("rule r1: X -a-> eps;"), "X", parse_fragment("GF b"))
    assert fv.verdict is Verdict.YES and fv.vacuous
    fv = fragment_verdict(B("rule r1: X -a-> eps;"), "X", parse_fragment("!GF b"))
    assert fv.verdict is Verdict.YES and fv.vacuous


def test_double_negation_is_eliminated():
    for src in ("F a", "GF b"):
        phi = parse_fragment(src)
        assert model_check_fragment(E1, "X", Not(Not(phi))).verdict is model_check_fragment(E1, "X", phi).verdict


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_case_table_consistency(name):
    """Both a formula and its negation can hold only vacuously; both can fail only with two kinds of runs."""
    b = CORPUS[name]
    for a in sorted(b.alphabet):
        for kind in (F, GF):
            pos = fragment_verdict(b, "X", kind(Act(a)))
            neg = fragment_verdict(b, "X", Not(kind(Act(a))))
            assert pos.verdict is not Verdict.UNKNOWN and neg.verdict is not Verdict.UNKNOWN
            if pos.verdict is Verdict.YES and neg.verdict is Verdict.YES:
                assert pos.vacuous
            if pos.verdict is Verdict.NO and neg.verdict is Verdict.NO:
                # some infinite run satisfies the formula and some other run violates it
                assert pos.decision.witness is not None and neg.decision.witness is not None


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_engine_agrees_with_oracle_on_corpus(name):
    rows = compare_with_oracle(CORPUS[name], "X")
    assert [r["problems"] for r in rows] == [[], [], []]
    assert all(r["engine"] is not Verdict.UNKNOWN for r in rows)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_engine_agrees_with_oracle_on_random_systems(seed):
    b = random_normal_form(random.Random(seed))
    for row in compare_with_oracle(b, "X", depth=8, budget=5000):
        assert row["problems"] == []
