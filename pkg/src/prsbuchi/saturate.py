"""Decomposition of a normal-form system into a parallel part and a pop-free sequential part.

``build_parallel_brs`` summarizes every push rule whose pushed variable
can be consumed (down to ``eps`` or to a variable popped by a matching
pop rule) into a rename rule labelled ``#`` (non-accepting) or ``$``
(accepting). ``extend_with_flags`` adds the rules into the two sink
variables ``Z_ACC`` and ``Z_NOT_ACC``. ``build_sequential_brs`` keeps the
push rules and adds ``#``/``$`` renames for every coverability fact of
the parallel part.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from .brs import Brs, Rule, RuleKind, is_normal_form, seq_shape, successors
from .decision import Decision, no, unknown, yes
from .petri.engine import CoverMode, ReachMode, coverability, exact_reachability, flagged_coverability
from .petri.net import par_brs_to_net, term_to_marking
from .terms import EPS, Z_ACC, Z_NOT_ACC, Term, atom, variables

log = logging.getLogger(__name__)

SHARP, DOLLAR, FLAG_ACC, FLAG_NACC = "#", "$", "@acc", "@nacc"
FAD_BUDGET = 20_000
WITNESS_BUDGET = 2_000
MAX_NESTING = 200  # deeper terms are left unexplored


class QueryCache:
    """Memo of engine queries, keyed by the epoch of the system they ran against."""

    def __init__(self) -> None:
        self.epoch = 0
        self._memo: dict = {}

    def bump(self) -> None:
        self.epoch += 1
        self._memo.clear()

    def get(self, key, compute):
        k = (key, self.epoch)
        if k not in self._memo:
            self._memo[k] = compute()
        return self._memo[k]


@dataclass
class _Stage:
    brs: Brs
    any_unknown: bool = False
    provenance: dict = field(default_factory=dict)
    iterations: int = 0


def _push_parts(r: Rule) -> tuple[str, str, str]:
    """``X -a-> Y.(Z)`` as ``(X, Y, Z)``."""
    return r.lhs.name, r.rhs.head, r.rhs.tail.name


def _pop_parts(r: Rule) -> tuple[str, str, str]:
    """``Y.(W) -b-> W'`` as ``(Y, W, W')``."""
    return r.lhs.head, r.lhs.tail.name, r.rhs.name


def _fresh_id(base: str, taken: set) -> str:
    rid, k = base, 1
    while rid in taken:
        k += 1
        rid = f"{base}_{k}"
    taken.add(rid)
    return rid


def _push_rules(b: Brs) -> list[Rule]:
    return [r for r in b.rules if seq_shape(r) is RuleKind.SEQ_PUSH]


def _pop_rules(b: Brs) -> list[Rule]:
    return [r for r in b.rules if seq_shape(r) is RuleKind.SEQ_POP]


def _par_rules(b: Brs) -> list[Rule]:
    return [r for r in b.rules if seq_shape(r) is None or seq_shape(r) in (RuleKind.SEQ_RENAME, RuleKind.SEQ_ERASE)]


def _build_parallel(b: Brs) -> _Stage:
    if not is_normal_form(b):
        raise ValueError("the system is not in normal form")
    vars_ = sorted(b.vars)
    alphabet = set(b.alphabet) | {SHARP, DOLLAR}
    rules = list(_par_rules(b))
    taken = {r.id for r in b.rules}
    present: dict = {}
    provenance: dict = {}
    cache = QueryCache()
    current = Brs(vars_, alphabet, rules)
    net = par_brs_to_net(current)
    pushes, pops = _push_rules(b), _pop_rules(b)
    stage = _Stage(current)
    last_pass_unknown = False

    def query(z: str, target: str | None, mode: ReachMode) -> Decision:
        goal = net.marking() if target is None else net.unit(target)
        return cache.get((z, target, mode), lambda: exact_reachability(net, net.unit(z), goal, mode))

    def add(x: str, label: str, y: str, why: dict) -> bool:
        nonlocal current, net
        accepting = label == DOLLAR
        key = (x, label, y, accepting)
        if key in present:
            return False
        rid = _fresh_id(f"{'dollar' if accepting else 'sharp'}_{x}_{y}", taken)
        r = Rule(rid, atom(x), label, atom(y), accepting)
        present[key] = r
        rules.append(r)
        provenance[rid] = why
        current = Brs(vars_, alphabet, rules)
        net = par_brs_to_net(current)
        cache.bump()
        return True

    def note(d: Decision) -> None:
        nonlocal last_pass_unknown
        if d.is_unknown:
            last_pass_unknown = True

    def why(kind: str, push: Rule, pop: Rule | None, d: Decision) -> dict:
        w = d.witness
        return {"query": kind, "push": push.id, "pop": pop.id if pop else None,
                "witness": w.origins(net) if w is not None else []}

    while True:
        stage.iterations += 1
        last_pass_unknown = False
        flag = False
        for p in pushes:
            x, y, z = _push_parts(p)
            d = query(z, None, ReachMode.ANY if p.accepting else ReachMode.ACCEPTING_SEEN)
            note(d)
            if d.is_yes and add(x, DOLLAR, y, why("reach_eps_accepting", p, None, d)):
                flag = True
            if not p.accepting:
                d = query(z, None, ReachMode.NONE_ACCEPTING)
                note(d)
                if d.is_yes and add(x, SHARP, y, why("reach_eps_non_accepting", p, None, d)):
                    flag = True
            for q in pops:
                yq, w, w2 = _pop_parts(q)
                if yq != y:
                    continue
                either = p.accepting or q.accepting
                d = query(z, w, ReachMode.ANY if either else ReachMode.ACCEPTING_SEEN)
                note(d)
                if d.is_yes and add(x, DOLLAR, w2, why("reach_var_accepting", p, q, d)):
                    flag = True
                if not either:
                    d = query(z, w, ReachMode.NONE_ACCEPTING)
                    note(d)
                    if d.is_yes and add(x, SHARP, w2, why("reach_var_non_accepting", p, q, d)):
                        flag = True
        if not flag:
            break
    stage.brs = current
    stage.any_unknown = last_pass_unknown
    stage.provenance = provenance
    return stage


def build_parallel_brs(b: Brs) -> tuple[Brs, bool]:
    st = _build_parallel(b)
    return st.brs, st.any_unknown


# -- finite accepting derivations ---------------------------------------------------


def _may_enable(b: Brs, z: str) -> set[str]:
    """Over-approximation of the rules that can become enabled from ``z``.

    Tracks variables that may sit at a rewritable position separately from
    variables that may only occur as frozen sequential heads.
    """
    active, heads = {z}, set()
    enabled: set[str] = set()
    erasing = False
    changed = True
    while changed:
        changed = False
        for r in b.rules:
            if r.id in enabled:
                continue
            if seq_shape(r) is RuleKind.SEQ_POP:
                ok = r.lhs.head in heads and r.lhs.tail.name in active
            else:
                ok = variables(r.lhs) <= active
            if not ok:
                continue
            enabled.add(r.id)
            changed = True
            if seq_shape(r) is RuleKind.SEQ_PUSH:
                heads.add(r.rhs.head)
                active.add(r.rhs.tail.name)
            else:
                active |= variables(r.rhs)
            if r.rhs is EPS:
                erasing = True
        # a head becomes rewritable once its tail can vanish
        if erasing and not heads <= active:
            active |= heads
            changed = True
    return enabled


def _accepting_capable(b: Brs, rbar: Brs) -> set[str]:
    """Variables from which some finite derivation fires an accepting rule, read off the summarized system.

    Least fixpoint: ``z`` qualifies if, in the parallel part, ``z`` can cover
    the left side of an accepting rule (summaries included) or of a push
    rule that is accepting or pushes a qualifying variable.
    """
    net = par_brs_to_net(rbar)
    vars_ = sorted(b.vars)
    goals = [r.lhs for r in rbar.rules if r.accepting]
    cover: dict = {}

    def coverable(x: str, lhs: Term) -> bool:
        key = (x, lhs)
        if key not in cover:
            cover[key] = coverability(net, net.unit(x), term_to_marking(net, lhs)).is_yes
        return cover[key]

    found = {x for x in vars_ if any(coverable(x, g) for g in goals)}
    pushes = _push_rules(b)
    changed = True
    while changed:
        changed = False
        for x in vars_:
            if x in found:
                continue
            for p in pushes:
                px, _, pz = _push_parts(p)
                if (p.accepting or pz in found) and coverable(x, p.lhs):
                    found.add(x)
                    changed = True
                    break
    return found


def _search_accepting(b: Brs, z: str, budget: int) -> list | None | bool:
    """Breadth-first search for an accepting step: steps, ``None`` when cut short, ``False`` if exhausted."""
    acc = b.accepting_ids
    start = atom(z)
    parent: dict[Term, tuple] = {start: None}
    queue = deque([start])
    truncated = False
    while queue:
        t = queue.popleft()
        for rid, _, t2 in successors(t, b):
            if rid in acc:
                steps = [(rid, t2)]
                cur = t
                while parent[cur] is not None:
                    prev, prid = parent[cur]
                    steps.append((prid, cur))
                    cur = prev
                return steps[::-1]
            if t2.nesting > MAX_NESTING:
                truncated = True
                continue
            if t2 not in parent:
                if len(parent) >= budget:
                    return None
                parent[t2] = (t, rid)
                queue.append(t2)
    return None if truncated else False


def finite_accepting_derivation(b: Brs, z: str, budget: int = FAD_BUDGET, rbar: Brs | None = None,
                                rbar_exact: bool | None = None) -> Decision:
    """Is some finite derivation from ``z`` accepting, i.e. is an accepting rule ever enabled?

    Decided on the summarized parallel system when its construction was
    conclusive; a bounded search supplies witnesses and is the fallback.
    """
    acc = b.accepting_ids
    if not acc:
        return no("no accepting rules")
    if not acc & _may_enable(b, z):
        return no("no accepting rule can become enabled")
    if rbar is None:
        rbar, unk = build_parallel_brs(b)
        rbar_exact = not unk
    capable = z in _accepting_capable(b, rbar)
    if not capable and rbar_exact:
        return no("no accepting rule is coverable in the summarized system")
    steps = _search_accepting(b, z, budget if not capable else min(budget, WITNESS_BUDGET))
    if steps:
        return yes(steps)
    if capable:
        return yes(None, reason="accepting rule coverable in the summarized system")
    if steps is False:
        return no("finite state space exhausted")
    return unknown(f"search cut short (budget {budget} or nesting {MAX_NESTING})")


# -- flag rules and the sequential system -----------------------------------------------


def _extend(b: Brs, rbar: Brs, rbar_exact: bool = True) -> _Stage:
    rules = list(rbar.rules)
    taken = {r.id for r in rules} | {r.id for r in b.rules}
    provenance: dict = {}
    any_unknown = False
    have: set = set()
    for p in _push_rules(b):
        x, _, z = _push_parts(p)
        if p.accepting:
            d = yes(None, reason="accepting push rule")
        else:
            d = finite_accepting_derivation(b, z, rbar=rbar, rbar_exact=rbar_exact)
            any_unknown |= d.is_unknown
        if d.is_yes and (x, FLAG_ACC) not in have:
            have.add((x, FLAG_ACC))
            rid = _fresh_id(f"zacc_{x}", taken)
            rules.append(Rule(rid, atom(x), FLAG_ACC, atom(Z_ACC), True))
            provenance[rid] = {"query": "accepting_push" if p.accepting else "finite_accepting_derivation",
                               "push": p.id, "pop": None,
                               "witness": [s[0] for s in d.witness] if d.witness else []}
        if not p.accepting and (x, FLAG_NACC) not in have:
            have.add((x, FLAG_NACC))
            rid = _fresh_id(f"znacc_{x}", taken)
            rules.append(Rule(rid, atom(x), FLAG_NACC, atom(Z_NOT_ACC), False))
            provenance[rid] = {"query": "non_accepting_push", "push": p.id, "pop": None, "witness": []}
    vars_ = set(rbar.vars) | {Z_ACC, Z_NOT_ACC}
    alphabet = set(rbar.alphabet) | {FLAG_ACC, FLAG_NACC}
    return _Stage(Brs(vars_, alphabet, rules), any_unknown, provenance)


def extend_with_flags(b: Brs, rbar: Brs, rbar_exact: bool = True) -> Brs:
    """``rbar_exact`` states that every query behind ``rbar`` was conclusive."""
    return _extend(b, rbar, rbar_exact).brs


def _build_sequential(b: Brs, rpar: Brs) -> _Stage:
    net = par_brs_to_net(rpar)
    rules = list(_push_rules(b))
    taken = {r.id for r in rules} | {r.id for r in rpar.rules}
    provenance: dict = {}
    any_unknown = False
    vars_ = sorted(b.vars)
    for x in vars_:
        for y in vars_:
            for mode, label in ((CoverMode.NONE_ACCEPTING_NON_NULL, SHARP), (CoverMode.ACCEPTING_SEEN, DOLLAR)):
                d = flagged_coverability(net, net.unit(x), net.unit(y), mode)
                any_unknown |= d.is_unknown
                if not d.is_yes:
                    continue
                accepting = label == DOLLAR
                rid = _fresh_id(f"cov_{'dollar' if accepting else 'sharp'}_{x}_{y}", taken)
                rules.append(Rule(rid, atom(x), label, atom(y), accepting))
                provenance[rid] = {"query": f"cover_{mode.value}", "push": None, "pop": None,
                                   "witness": d.witness.origins(net)}
    alphabet = set(b.alphabet) | {SHARP, DOLLAR}
    return _Stage(Brs(vars_, alphabet, rules), any_unknown, provenance)


def build_sequential_brs(b: Brs, rpar: Brs) -> tuple[Brs, bool]:
    st = _build_sequential(b, rpar)
    return st.brs, st.any_unknown


# -- bundle ---------------------------------------------------------------------------------


@dataclass
class DecompositionBundle:
    source: Brs
    rpar: Brs
    rseq: Brs
    provenance: dict
    any_unknown: bool
    iterations: int = 0
    rbar: Brs | None = None

    @property
    def anyUnknown(self) -> bool:  # noqa: N802
        return self.any_unknown


def decompose(b: Brs) -> DecompositionBundle:
    par_stage = _build_parallel(b)
    flag_stage = _extend(b, par_stage.brs, not par_stage.any_unknown)
    seq_stage = _build_sequential(b, flag_stage.brs)
    provenance = {**par_stage.provenance, **flag_stage.provenance, **seq_stage.provenance}
    log.debug("decomposition: %d parallel rules, %d sequential rules, %d iterations",
              len(flag_stage.brs.rules), len(seq_stage.brs.rules), par_stage.iterations)
    return DecompositionBundle(
        source=b,
        rpar=flag_stage.brs,
        rseq=seq_stage.brs,
        provenance=provenance,
        any_unknown=par_stage.any_unknown or flag_stage.any_unknown or seq_stage.any_unknown,
        iterations=par_stage.iterations,
        rbar=par_stage.brs,
    )


__all__ = [
    "DOLLAR", "DecompositionBundle", "FLAG_ACC", "FLAG_NACC", "QueryCache", "SHARP",
    "build_parallel_brs", "build_sequential_brs", "decompose", "extend_with_flags",
    "finite_accepting_derivation",
]
