"""Bounded brute-force exploration of the rewrite LTS and lasso search on it.

Independent of the decomposition: only ``brs.successors`` is used. A
returned witness is a proof of an infinite derivation; failing to find
one proves nothing unless the explored fragment is the whole LTS.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .brs import Brs, Derivation, derivation_from_rules, successors
from .terms import EPS, Term, atom, is_seq_term, is_submultiset, multiset_minus, par_of, seq_heads, seq_from_heads
from .witness import LassoWitness, ParFrame, PumpKind, SeqFrame, replay

DEFAULT_DEPTH = 12
DEFAULT_BUDGET = 100_000

__all__ = ["DEFAULT_BUDGET", "DEFAULT_DEPTH", "LassoWitness", "LtsFragment", "PumpKind",
           "explore", "find_witness", "replay"]


@dataclass
class LtsFragment:
    root: Term
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    frontier: set = field(default_factory=set)
    depth: int = 0
    dist: dict = field(default_factory=dict)

    @property
    def saturated(self) -> bool:
        return not self.frontier

    def out_edges(self) -> dict:
        out: dict = {t: [] for t in self.nodes}
        for s, rid, d in self.edges:
            out[s].append((rid, d))
        return out


def explore(b: Brs, x: str, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> LtsFragment:
    root = atom(x)
    frag = LtsFragment(root, [root], [], set(), depth, {root: 0})
    queue = deque([root])
    while queue:
        t = queue.popleft()
        succ = successors(t, b)
        if not succ:
            continue
        if frag.dist[t] >= depth:
            frag.frontier.add(t)
            continue
        new = [t2 for _, _, t2 in succ if t2 not in frag.dist]
        if len(frag.nodes) + len(set(new)) > budget:
            frag.frontier.add(t)
            frag.frontier.update(queue)
            break
        for rid, _, t2 in succ:
            frag.edges.append((t, rid, t2))
            if t2 not in frag.dist:
                frag.dist[t2] = frag.dist[t] + 1
                frag.nodes.append(t2)
                queue.append(t2)
    return frag


def _pump_shape(t: Term, t2: Term, local: list[Term]):
    """``(context, local start, growth)`` if ``t -> t2`` repeats as one of the three pump kinds."""
    if t2 == t:
        return (), t, ()
    if is_submultiset(t.factors, t2.factors):
        return (), t, (ParFrame(par_of(multiset_minus(t2.factors, t.factors))),)
    if t is not EPS and t2 is not EPS and is_seq_term(t) and is_seq_term(t2):
        ctx = seq_heads(t)[:-1]
        h2 = seq_heads(t2)
        if h2[:len(ctx)] != ctx or h2[-1] != seq_heads(t)[-1] or len(h2) <= len(ctx) + 1:
            return None
        for s in local:
            if s == EPS or not is_seq_term(s) or seq_heads(s)[:len(ctx)] != ctx or len(seq_heads(s)) <= len(ctx):
                return None
        return tuple(SeqFrame(h) for h in ctx), atom(h2[-1]), tuple(SeqFrame(h) for h in h2[len(ctx):-1])
    return None


def _strip_context(ctx: tuple, t: Term) -> Term:
    if not ctx:
        return t
    return seq_from_heads(seq_heads(t)[len(ctx):])


def find_witness(b: Brs, x: str, problem: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET,
                 frag: LtsFragment | None = None) -> LassoWitness | None:
    """A lasso from ``x`` with the accepting pattern of ``problem`` inside the explored fragment."""
    if problem not in (1, 2, 3):
        raise ValueError(f"unknown problem {problem}")
    if frag is None:
        frag = explore(b, x, depth, budget)
    acc = b.accepting_ids
    out = frag.out_edges()
    # prefix states (term, prefix has an accepting step)
    root = (frag.root, False)
    parent: dict = {root: None}
    order = [root]
    queue = deque([root])
    while queue:
        t, seen = queue.popleft()
        for rid, t2 in out.get(t, ()):
            is_acc = rid in acc
            if problem == 2 and is_acc:
                continue
            nxt = (t2, seen or is_acc)
            if nxt not in parent:
                parent[nxt] = ((t, seen), rid)
                order.append(nxt)
                queue.append(nxt)
    for state in order:
        t, seen = state
        if problem == 3 and not seen:
            continue
        w = _pump_from(b, t, out, acc, want_acc=problem == 1)
        if w is None:
            continue
        prefix = _path(parent, state)
        pre = derivation_from_rules(b, frag.root, prefix)
        ctx, _, growth, pump = w
        lw = LassoWitness(pre, ctx, pump, growth)
        if replay(b, lw, 3):
            return lw
    return None


def _path(parent: dict, state) -> list[tuple[str, Term]]:
    out = []
    while parent[state] is not None:
        prev, rid = parent[state]
        out.append((rid, state[0]))
        state = prev
    return out[::-1]


def _pump_from(b: Brs, t: Term, out: dict, acc: frozenset, want_acc: bool):
    """Breadth-first pump search from ``t`` over the fragment."""
    start = (t, False)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        s, has_acc = queue.popleft()
        for rid, s2 in out.get(s, ()):
            is_acc = rid in acc
            if not want_acc and is_acc:
                continue
            h2 = has_acc or is_acc
            if not want_acc or h2:
                path = _path(parent, (s, has_acc)) + [(rid, s2)]
                shape = _pump_shape(t, s2, [r for _, r in path])
                if shape is not None:
                    ctx, local_start, growth = shape
                    local = [(r, _strip_context(ctx, res)) for r, res in path]
                    pump = derivation_from_rules(b, local_start, local)
                    if pump is not None:
                        return ctx, local_start, growth, pump
            nxt = (s2, h2)
            if nxt not in parent:
                parent[nxt] = ((s, has_acc), rid)
                queue.append(nxt)
    return None


def lasso_to_derivation(b: Brs, w: LassoWitness, pumps: int = 3) -> Derivation | None:
    return w.unroll(b, pumps)
