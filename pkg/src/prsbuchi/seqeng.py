"""Decision engine for sequential systems.

A sequential term ``X1.(X2.(...Xn.(Y)...))`` is the stack word
``Y Xn ... X1`` (innermost variable first); only the innermost variable
is rewritable. Pop-free systems reduce to a graph on variables; systems
with pops are handled by pre* saturation over a pushdown encoding.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .brs import Brs, Derivation, RuleKind, derivation_from_rules, is_sequential, seq_shape
from .decision import Decision, no, yes
from .graphs import RunMode, lasso, path
from .terms import EPS, Term, atom, seq_from_heads

CONTROL = "p"
FINAL = "f"


class Constraint(enum.Enum):
    ANY = "Any"
    NON_ACCEPTING = "NonAccepting"


def _require_sequential(b: Brs) -> None:
    if not is_sequential(b):
        raise ValueError("the system is not sequential")


def is_pop_free(b: Brs) -> bool:
    _require_sequential(b)
    return all(seq_shape(r) not in (RuleKind.SEQ_POP, RuleKind.SEQ_ERASE) for r in b.rules)


# -- pop-free fast path ----------------------------------------------------------


@dataclass(frozen=True)
class HeadEdge:
    src: str
    dst: str
    accepting: bool
    origin: str


@dataclass
class HeadGraph:
    vertices: frozenset
    edges: list = field(default_factory=list)

    @classmethod
    def of(cls, b: Brs) -> HeadGraph:
        if not is_pop_free(b):
            raise ValueError("head graphs need a pop-free sequential system")
        edges = []
        for r in b.rules:
            shape = seq_shape(r)
            dst = r.rhs.tail.name if shape is RuleKind.SEQ_PUSH else r.rhs.name
            edges.append(HeadEdge(r.lhs.name, dst, r.accepting, r.id))
        return cls(frozenset(b.vars), edges)

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.vertices)
        for e in self.edges:
            g.add_edge(e.src, e.dst, key=e.origin, t=e.origin, acc=e.accepting)
        return g


# -- pushdown encoding and pre* --------------------------------------------------------


@dataclass(frozen=True)
class WordRule:
    lhs: tuple
    rhs: tuple
    rule: str
    accepting: bool


@dataclass
class PrefixSystem:
    rules: list

    @classmethod
    def of(cls, b: Brs) -> PrefixSystem:
        _require_sequential(b)
        out = []
        for r in b.rules:
            shape = seq_shape(r)
            if shape is RuleKind.SEQ_PUSH:
                lhs, rhs = (r.lhs.name,), (r.rhs.tail.name, r.rhs.head)
            elif shape is RuleKind.SEQ_POP:
                lhs, rhs = (r.lhs.tail.name, r.lhs.head), (r.rhs.name,)
            elif shape is RuleKind.SEQ_RENAME:
                lhs, rhs = (r.lhs.name,), (r.rhs.name,)
            else:
                lhs, rhs = (r.lhs.name,), ()
            out.append(WordRule(lhs, rhs, r.id, r.accepting))
        return cls(out)

    def step(self, word: tuple) -> list[tuple[str, tuple]]:
        out = []
        for wr in self.rules:
            n = len(wr.lhs)
            if word[:n] == wr.lhs:
                out.append((wr.rule, wr.rhs + word[n:]))
        return out


def term_to_word(t: Term) -> tuple:
    from .terms import seq_heads

    if t is EPS:
        return ()
    return tuple(reversed(seq_heads(t)))


def word_to_term(w: tuple) -> Term:
    if not w:
        return EPS
    return seq_from_heads(list(reversed(w)))


@dataclass
class ReachAutomaton:
    """Finite automaton over stack words; a configuration ``<c, w>`` is read from state ``c``."""

    states: set
    trans: set
    finals: set

    def targets(self, start, word: tuple) -> set:
        cur = {start}
        for sym in word:
            cur = {d for (s, a, d) in self.trans if s in cur and a == sym}
            if not cur:
                break
        return cur

    def accepts(self, word: tuple, start=CONTROL) -> bool:
        return bool(self.targets(start, word) & self.finals)

    def copy(self) -> ReachAutomaton:
        return ReachAutomaton(set(self.states), set(self.trans), set(self.finals))


def words_with_head(head: str, alphabet, control=CONTROL) -> ReachAutomaton:
    """Automaton for ``{<control, head w>}``."""
    trans = {(control, head, FINAL)} | {(FINAL, v, FINAL) for v in alphabet}
    return ReachAutomaton({control, FINAL}, trans, {FINAL})


def _saturate(pds: list, aut: ReachAutomaton) -> ReachAutomaton:
    """pre* saturation for pushdown rules ``(p, sym, p2, word)`` with one-symbol lhs."""
    aut = aut.copy()
    for p, _, p2, _ in pds:
        aut.states |= {p, p2}
    changed = True
    while changed:
        changed = False
        for p, sym, p2, w in pds:
            for q in aut.targets(p2, w):
                if (p, sym, q) not in aut.trans:
                    aut.trans.add((p, sym, q))
                    changed = True
    return aut


def _pds(ps: PrefixSystem, flagging: str | None = None, drop_accepting: bool = False) -> list:
    """Pushdown rules over control states; two-symbol lhs rules go through an auxiliary state.

    ``flagging``: ``None`` (single control state), ``"acc"`` (second state
    entered by an accepting rule) or ``"moved"`` (entered by any rule).
    """
    flags = (0,) if flagging is None else (0, 1)
    out = []
    for wr in ps.rules:
        if drop_accepting and wr.accepting:
            continue
        for f in flags:
            if flagging is None:
                src, dst = CONTROL, CONTROL
            else:
                moved = flagging == "moved" or wr.accepting or f == 1
                src, dst = (CONTROL, f), (CONTROL, 1 if moved else 0)
            if len(wr.lhs) == 1:
                out.append((src, wr.lhs[0], dst, wr.rhs))
            else:
                aux = ("aux", wr.rule, f)
                out.append((src, wr.lhs[0], aux, ()))
                out.append((aux, wr.lhs[1], dst, wr.rhs))
    return out


def pre_star(ps: PrefixSystem, target: ReachAutomaton, constraint: Constraint = Constraint.ANY) -> ReachAutomaton:
    """Words from which some derivation (respecting ``constraint``) reaches ``target``."""
    return _saturate(_pds(ps, drop_accepting=constraint is Constraint.NON_ACCEPTING), target)


def _alphabet(b: Brs) -> set:
    return set(b.vars)


def head_reachable(b: Brs, x: str, constraint: Constraint = Constraint.ANY) -> set[str]:
    _require_sequential(b)
    if x not in b.vars:
        raise ValueError(f"unknown variable {x}")
    if is_pop_free(b):
        g = HeadGraph.of(b).to_networkx()
        if constraint is Constraint.NON_ACCEPTING:
            g.remove_edges_from([(u, v, k) for u, v, k, d in g.edges(keys=True, data=True) if d["acc"]])
        return nx.descendants(g, x) | {x}
    ps = PrefixSystem.of(b)
    out = {x}
    for y in sorted(b.vars):
        if y != x and pre_star(ps, words_with_head(y, _alphabet(b)), constraint).accepts((x,)):
            out.add(y)
    return out


def head_path(b: Brs, x: str, y: str, constraint: Constraint = Constraint.ANY,
              budget: int = 20_000) -> list[str] | None:
    """Rule ids of a derivation from ``x`` to a term with innermost variable ``y``."""
    _require_sequential(b)
    allowed = None if constraint is Constraint.ANY else (lambda d: not d["acc"])
    if is_pop_free(b):
        return path(HeadGraph.of(b).to_networkx(), x, y, allowed)
    acc = b.accepting_ids
    ps = PrefixSystem.of(b)
    start = (x,)
    parent: dict = {start: None}
    queue = deque([start])
    while queue and len(parent) < budget:
        w = queue.popleft()
        if w and w[0] == y:
            out = []
            while parent[w] is not None:
                w, rid = parent[w]
                out.append(rid)
            return out[::-1]
        for rid, w2 in ps.step(w):
            if constraint is Constraint.NON_ACCEPTING and rid in acc:
                continue
            if w2 not in parent:
                parent[w2] = (w, rid)
                queue.append(w2)
    return None


def _flagged_head_reach(b: Brs, ps: PrefixSystem, flagging: str, drop_accepting: bool, x: str, y: str) -> bool:
    """``<(p,0), x> =>* <(p,1), y w>`` in the flagged pushdown encoding."""
    pds = _pds(ps, flagging=flagging, drop_accepting=drop_accepting)
    aut = _saturate(pds, words_with_head(y, _alphabet(b), control=(CONTROL, 1)))
    return bool(aut.targets((CONTROL, 0), (x,)) & aut.finals)


# -- infinite runs -------------------------------------------------------------------


@dataclass(frozen=True)
class SeqRunWitness:
    """Rule sequences: ``prefix`` from ``start``, then ``pump`` from the atom ``last`` of the reached term."""

    start: str
    prefix: tuple
    pump: tuple

    def unroll(self, b: Brs, pumps: int = 3) -> Derivation | None:
        """The concrete derivation ``prefix pump^k``; ``None`` if it does not replay."""
        ps = PrefixSystem.of(b)
        word = (self.start,)
        steps = []
        for rid in list(self.prefix) + list(self.pump) * pumps:
            nxt = [w for r, w in ps.step(word) if r == rid]
            if not nxt:
                return None
            word = nxt[0]
            steps.append((rid, word_to_term(word)))
        return derivation_from_rules(b, atom(self.start), steps)


def infinite_run_seq(b: Brs, x: str, mode: RunMode, budget: int = 20_000) -> Decision:
    _require_sequential(b)
    if x not in b.vars:
        raise ValueError(f"unknown variable {x}")
    if is_pop_free(b):
        g = HeadGraph.of(b).to_networkx()
        res = lasso(g, x, mode)
        if res is None:
            return no("head graph has no suitable cycle")
        return yes(SeqRunWitness(x, tuple(res[0]), tuple(res[1])))
    return _infinite_run_general(b, x, mode, budget)


def _infinite_run_general(b: Brs, x: str, mode: RunMode, budget: int) -> Decision:
    # An infinite run has infinitely many positions whose stack cell is never
    # popped afterwards; two of them with the same head Y give Y =>+ Y w.
    ps = PrefixSystem.of(b)
    found = False
    for y in sorted(b.vars):
        if mode is RunMode.ACCEPTING_INFINITELY_OFTEN:
            ok = y in head_reachable(b, x) and _flagged_head_reach(b, ps, "acc", False, y, y)
        elif mode is RunMode.NO_ACCEPTING:
            ok = (y in head_reachable(b, x, Constraint.NON_ACCEPTING)
                  and _flagged_head_reach(b, ps, "moved", True, y, y))
        else:
            ok = (_flagged_head_reach(b, ps, "acc", False, x, y)
                  and _flagged_head_reach(b, ps, "moved", True, y, y))
        if ok:
            found = True
            break
    if not found:
        return no("no repeated head")
    w = _search_pump(b, ps, x, mode, budget)
    if w is None:
        return yes(None, reason="repeated head exists; no witness within budget")
    return yes(w)


def _search_pump(b: Brs, ps: PrefixSystem, x: str, mode: RunMode, budget: int) -> SeqRunWitness | None:
    """Breadth-first search for a segment that never pops below its start and ends on the same head."""
    acc = b.accepting_ids
    start = ((x,), False)
    # (word, accepting seen) -> (parent, rule, depth, depth reached by the last accepting step or -1)
    info: dict = {start: (None, None, 0, -1)}
    queue = deque([start])
    while queue and len(info) < budget:
        node = queue.popleft()
        w, seen = node
        _, _, depth, last_acc = info[node]
        for rid, w2 in ps.step(w):
            is_acc = rid in acc
            low = len(w2)
            a = node
            while a is not None:
                aw = a[0]
                low = min(low, len(aw))
                parent, _, da, la = info[a]
                if aw and w2 and aw[0] == w2[0] and low >= len(aw):
                    seg_acc = is_acc or last_acc > da
                    if mode is RunMode.ACCEPTING_INFINITELY_OFTEN:
                        ok = seg_acc
                    elif mode is RunMode.NO_ACCEPTING:
                        ok = not seg_acc and la == -1
                    else:
                        ok = not seg_acc and la != -1
                    if ok:
                        return SeqRunWitness(x, tuple(_path(info, a)), tuple(_path(info, node, a) + [rid]))
                a = parent
            nxt = (w2, seen or is_acc)
            if nxt not in info:
                info[nxt] = (node, rid, depth + 1, depth + 1 if is_acc else last_acc)
                queue.append(nxt)
    return None


def _path(info: dict, node, stop=None) -> list[str]:
    out = []
    while node != stop and info[node][0] is not None:
        out.append(info[node][1])
        node = info[node][0]
    return out[::-1]
