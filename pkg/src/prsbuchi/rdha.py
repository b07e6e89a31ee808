"""Restricted dynamic hierarchical automata: validation, configuration semantics, translation to PRS."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .brs import Brs, Rule, successors
from .terms import EPS, Atom, Par, Seq, Term, atom, par, seq


@dataclass(frozen=True)
class Nil:
    def __str__(self) -> str:
        return "NIL"


@dataclass(frozen=True)
class Halt:
    def __str__(self) -> str:
        return "HALT"


@dataclass(frozen=True)
class Chan:
    name: str

    def __str__(self) -> str:
        return f"chan({self.name})"


@dataclass(frozen=True)
class New:
    machine: int
    entry: str

    def __str__(self) -> str:
        return f"NEW({self.machine},{self.entry})"


@dataclass(frozen=True)
class Transition:
    u: object  # node name or (box, node)
    a: str
    sy: object
    v: object

    def __str__(self) -> str:
        return f"<{_fmt(self.u)}, {self.a}, {self.sy}, {_fmt(self.v)}>"


def _fmt(e) -> str:
    return f"({e[0]},{e[1]})" if isinstance(e, tuple) else str(e)


@dataclass(frozen=True)
class Machine:
    name: str
    nodes: frozenset
    boxes: frozenset
    initial: frozenset
    exits: frozenset
    hierarchy: dict = field(hash=False)
    delta: tuple = ()


@dataclass(frozen=True)
class Rdha:
    machines: tuple
    inputs: frozenset
    channels: frozenset

    @property
    def all_nodes(self) -> set[str]:
        return set().union(*(m.nodes for m in self.machines)) if self.machines else set()

    @property
    def all_boxes(self) -> set[str]:
        return set().union(*(m.boxes for m in self.machines)) if self.machines else set()

    @property
    def initial_nodes(self) -> list[str]:
        return sorted(set().union(*(m.initial for m in self.machines))) if self.machines else []

    def transitions(self):
        for m in self.machines:
            yield from m.delta


def validate(r: Rdha) -> list[str]:
    out: list[str] = []
    n = len(r.machines)
    all_nodes = r.all_nodes
    for i, m in enumerate(r.machines):
        where = f"machine {m.name}"
        if m.nodes & m.boxes:
            out.append(f"{where}: nodes and boxes must be disjoint")
        if not m.initial <= m.nodes:
            out.append(f"{where}: initial nodes must be nodes")
        if not m.exits <= m.nodes:
            out.append(f"{where}: exit nodes must be nodes")
        for b in m.boxes:
            if b not in m.hierarchy:
                out.append(f"{where}: box {b} has no hierarchy target")
        for b, j in m.hierarchy.items():
            if b not in m.boxes:
                out.append(f"{where}: hierarchy maps undeclared box {b}")
            if not 0 <= j < n:
                out.append(f"{where}: box {b} maps to an unknown machine")

        def target_machine(b: str):
            j = m.hierarchy.get(b)
            return r.machines[j] if j is not None and 0 <= j < n else None

        for t in m.delta:
            tw = f"{where}, transition {t}"
            if t.a not in r.inputs:
                out.append(f"{tw}: input symbol {t.a} is not declared")
            for end, is_src in ((t.u, True), (t.v, False)):
                if isinstance(end, tuple):
                    b, q = end
                    if b not in m.boxes:
                        out.append(f"{tw}: {b} is not a box of this machine")
                    elif q not in all_nodes:
                        out.append(f"{tw}: {q} is not a node")
                    else:
                        tm = target_machine(b)
                        if tm is not None and is_src and q not in tm.exits:
                            out.append(f"{tw}: a (box, node) source requires an exit node of the called machine")
                        if tm is not None and not is_src and q not in tm.initial:
                            out.append(f"{tw}: a (box, node) target requires an initial node of the called machine")
                elif end not in m.nodes:
                    out.append(f"{tw}: {end} is not a node of this machine")
                elif is_src and end in m.exits:
                    out.append(f"{tw}: exit nodes have no outgoing transitions")
            in_q = lambda e: not isinstance(e, tuple) and e in m.nodes  # noqa: E731
            if not isinstance(t.sy, (Nil, Halt)) and not (in_q(t.u) and in_q(t.v)):
                out.append(f"{tw}: an action other than NIL or HALT requires u,v in the machine's nodes")
            if isinstance(t.sy, Halt) and t.v not in m.exits:
                out.append(f"{tw}: HALT requires an exit node as target")
            if not in_q(t.u) and not in_q(t.v):
                out.append(f"{tw}: at least one endpoint must be a node of the machine")
            if isinstance(t.sy, Chan) and t.sy.name not in r.channels:
                out.append(f"{tw}: channel {t.sy.name} is not declared")
            if isinstance(t.sy, New):
                if not 0 <= t.sy.machine < n:
                    out.append(f"{tw}: NEW names an unknown machine")
                elif t.sy.entry not in r.machines[t.sy.machine].initial:
                    out.append(f"{tw}: NEW entry must be an initial node of the activated machine")
    for i in range(n):
        for j in range(i + 1, n):
            a, b = r.machines[i], r.machines[j]
            if a.nodes & b.nodes:
                out.append(f"machines {a.name} and {b.name}: node sets must be disjoint")
            if a.boxes & b.boxes:
                out.append(f"machines {a.name} and {b.name}: box sets must be disjoint")
    if r.all_nodes & r.all_boxes:
        out.append("node and box names must be distinct across machines")
    return out


# -- configuration semantics ------------------------------------------------------


def _node_steps(q: str, r: Rdha) -> list[tuple[str, Term]]:
    """Axioms for a single node: basic step, call, HALT, NEW."""
    out = []
    for t in r.transitions():
        if t.u != q:
            continue
        if isinstance(t.sy, Nil):
            out.append((t.a, seq(t.v[0], atom(t.v[1])) if isinstance(t.v, tuple) else atom(t.v)))
        elif isinstance(t.sy, Halt):
            out.append((t.a, EPS))
        elif isinstance(t.sy, New):
            out.append((t.a, par(atom(t.v), atom(t.sy.entry))))
    return out


def _sync_pairs(q1: str, q2: str, r: Rdha) -> list[tuple[str, Term]]:
    out = []
    ts = [t for t in r.transitions() if isinstance(t.sy, Chan)]
    for t1 in ts:
        if t1.u != q1:
            continue
        for t2 in ts:
            if t2.u == q2 and t2.a == t1.a and t2.sy == t1.sy:
                out.append((t1.a, par(atom(t1.v), atom(t2.v))))
    return out


def conf_successors(c: Term, r: Rdha) -> list[tuple[str, Term]]:
    """One-step moves of a configuration, sorted and without duplicates."""
    return sorted(_conf_moves(c, r), key=lambda p: (p[0], p[1].key))


def _conf_moves(c: Term, r: Rdha) -> set[tuple[str, Term]]:
    nodes = r.all_nodes
    out: set[tuple[str, Term]] = set()
    if isinstance(c, Atom):
        if c.name in nodes:
            out.update(_node_steps(c.name, r))
    elif isinstance(c, Seq):
        if isinstance(c.tail, Atom):
            for t in r.transitions():
                if t.u == (c.head, c.tail.name) and isinstance(t.sy, Nil) and not isinstance(t.v, tuple):
                    out.add((t.a, atom(t.v)))
        for a, t2 in _conf_moves(c.tail, r):
            out.add((a, seq(c.head, t2)))
    elif isinstance(c, Par):
        fs = c.factors
        for i, f in enumerate(fs):
            if i > 0 and fs[i - 1] == f:
                continue
            rest = fs[:i] + fs[i + 1:]
            for a, f2 in _conf_moves(f, r):
                out.add((a, par(f2, *rest)))
        for i in range(len(fs)):
            for j in range(len(fs)):
                if i == j or not (isinstance(fs[i], Atom) and isinstance(fs[j], Atom)):
                    continue
                if fs[i].name not in nodes or fs[j].name not in nodes:
                    continue
                rest = tuple(f for k, f in enumerate(fs) if k not in (i, j))
                for a, pair in _sync_pairs(fs[i].name, fs[j].name, r):
                    out.add((a, par(pair, *rest)))
    return out


# -- translation --------------------------------------------------------------------------


def var_of(name: str) -> str:
    return f"X_{name}"


def rename_config(c: Term) -> Term:
    """Map node and box symbols to their PRS variables."""
    if isinstance(c, Atom):
        return atom(var_of(c.name))
    if isinstance(c, Seq):
        return seq(var_of(c.head), rename_config(c.tail))
    if isinstance(c, Par):
        return par(*(rename_config(f) for f in c.factors))
    return EPS


def to_prs(r: Rdha) -> Brs:
    """Normal-form PRS whose labelled transition system mirrors the configuration semantics.

    Besides the basic, HALT, call, return and synchronization rules, each
    ``NEW(j, p)`` transition from ``q`` to ``q'`` yields ``X_q -a-> X_q' || X_p``.
    """
    X = var_of
    rules: list[Rule] = []
    seen: set = set()

    def add(kind: str, lhs: Term, a: str, rhs: Term) -> None:
        key = (lhs, a, rhs)
        if key in seen:
            return
        seen.add(key)
        rules.append(Rule(f"{kind}{len(rules) + 1}", lhs, a, rhs, False))

    for t in r.transitions():
        if isinstance(t.sy, Nil):
            if isinstance(t.u, tuple):
                add("ret", seq(X(t.u[0]), atom(X(t.u[1]))), t.a, atom(X(t.v)))
            elif isinstance(t.v, tuple):
                add("call", atom(X(t.u)), t.a, seq(X(t.v[0]), atom(X(t.v[1]))))
            else:
                add("step", atom(X(t.u)), t.a, atom(X(t.v)))
        elif isinstance(t.sy, Halt) and not isinstance(t.u, tuple):
            add("halt", atom(X(t.u)), t.a, EPS)
        elif isinstance(t.sy, New):
            add("new", atom(X(t.u)), t.a, par(atom(X(t.v)), atom(X(t.sy.entry))))
    chans = [t for t in r.transitions() if isinstance(t.sy, Chan)]
    for t1 in chans:
        for t2 in chans:
            if t1.a == t2.a and t1.sy == t2.sy:
                add("sync", par(atom(X(t1.u)), atom(X(t2.u))), t1.a, par(atom(X(t1.v)), atom(X(t2.v))))
    vs = {X(q) for q in r.all_nodes} | {X(b) for b in r.all_boxes}
    return Brs(vs, r.inputs, rules)


def bounded_iso_check(r: Rdha, depth: int, prs: Brs | None = None) -> bool:
    """Compare both transition systems on every configuration within ``depth`` steps of an initial node."""
    if prs is None:
        prs = to_prs(r)
    for q in r.initial_nodes:
        seen = {atom(q)}
        queue = deque([(atom(q), 0)])
        while queue:
            c, d = queue.popleft()
            mine = {(a, rename_config(c2)) for a, c2 in conf_successors(c, r)}
            theirs = {(prs.rule(rid).label, t2) for rid, _, t2 in successors(rename_config(c), prs)}
            if mine != theirs:
                return False
            if d >= depth:
                continue
            for _, c2 in conf_successors(c, r):
                if c2 not in seen:
                    seen.add(c2)
                    queue.append((c2, d + 1))
    return True
