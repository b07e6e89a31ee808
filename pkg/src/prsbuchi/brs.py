"""Büchi rewrite systems: rules, normal-form classification and the one-step LTS."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .terms import (
    EPS,
    Atom,
    Epsilon,
    Par,
    Seq,
    Term,
    is_par_term,
    par,
    par_of,
    seq,
    variables,
)

RESERVED_LABELS = frozenset({"#", "$", "@acc", "@nacc"})

# -- positions ----------------------------------------------------------------
# A position is a tuple of moves:
#   ("seq",)          descend into the tail of X.(t)
#   ("par", i)        descend into factor i (canonical order) of a Par node
#   ("sub", (i, j..)) the lhs matches the listed factors of a Par node (terminal)

SEQ_TAIL = ("seq",)
Move = tuple
Position = tuple


def par_move(i: int) -> Move:
    return ("par", i)


def sub_move(idx: Sequence[int]) -> Move:
    return ("sub", tuple(idx))


def _move_key(m: Move) -> tuple:
    if m[0] == "seq":
        return (0,)
    if m[0] == "par":
        return (1, m[1])
    return (2, m[1])


def position_key(pos: Position) -> tuple:
    return tuple(_move_key(m) for m in pos)


def format_position(pos: Position) -> list[str]:
    out = []
    for m in pos:
        if m[0] == "seq":
            out.append("seq")
        elif m[0] == "par":
            out.append(f"par:{m[1]}")
        else:
            out.append("sub:" + ",".join(str(i) for i in m[1]))
    return out


def parse_position(items: Iterable[str]) -> Position:
    out = []
    for s in items:
        if s == "seq":
            out.append(SEQ_TAIL)
        elif s.startswith("par:"):
            out.append(par_move(int(s[4:])))
        elif s.startswith("sub:"):
            out.append(sub_move(int(x) for x in s[4:].split(",")))
        else:
            raise ValueError(f"bad position move {s!r}")
    return tuple(out)


# -- rules and systems ----------------------------------------------------------


class RuleKind(enum.Enum):
    PAR = "Par"
    SEQ_PUSH = "SeqPush"
    SEQ_POP = "SeqPop"
    SEQ_RENAME = "SeqRename"
    SEQ_ERASE = "SeqErase"
    OTHER = "Other"


@dataclass(frozen=True)
class Rule:
    id: str
    lhs: Term
    label: str
    rhs: Term
    accepting: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.lhs, Epsilon):
            raise ValueError(f"rule {self.id}: lhs must not be eps")

    def __str__(self) -> str:
        prefix = "accepting rule" if self.accepting else "rule"
        return f"{prefix} {self.id}: {self.lhs} -{self.label}-> {self.rhs};"

    def variables(self) -> set[str]:
        return variables(self.lhs) | variables(self.rhs)


def seq_shape(r: Rule) -> RuleKind | None:
    """The SEQ normal-form shape of ``r`` if it has one (renames/erases included)."""
    lhs, rhs = r.lhs, r.rhs
    if isinstance(lhs, Atom):
        if isinstance(rhs, Seq) and isinstance(rhs.tail, Atom):
            return RuleKind.SEQ_PUSH
        if isinstance(rhs, Atom):
            return RuleKind.SEQ_RENAME
        if isinstance(rhs, Epsilon):
            return RuleKind.SEQ_ERASE
        return None
    if isinstance(lhs, Seq) and isinstance(lhs.tail, Atom) and isinstance(rhs, Atom):
        return RuleKind.SEQ_POP
    return None


def classify_rule(r: Rule) -> RuleKind:
    # rules without sequential composition are Par even when they also fit a SEQ shape
    if is_par_term(r.lhs) and is_par_term(r.rhs):
        return RuleKind.PAR
    return seq_shape(r) or RuleKind.OTHER


@dataclass(frozen=True)
class Brs:
    vars: frozenset
    alphabet: frozenset
    rules: tuple
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __init__(self, vars: Iterable[str], alphabet: Iterable[str], rules: Iterable[Rule]):
        object.__setattr__(self, "vars", frozenset(vars))
        object.__setattr__(self, "alphabet", frozenset(alphabet))
        object.__setattr__(self, "rules", tuple(rules))
        object.__setattr__(self, "_cache", {})
        self._validate()

    def _validate(self) -> None:
        seen: set[str] = set()
        for r in self.rules:
            if r.id in seen:
                raise ValueError(f"duplicate rule id {r.id}")
            seen.add(r.id)
            undeclared = r.variables() - self.vars
            if undeclared:
                raise ValueError(f"rule {r.id}: undeclared variables {sorted(undeclared)}")
            if r.label not in self.alphabet:
                raise ValueError(f"rule {r.id}: undeclared action {r.label}")

    def __hash__(self) -> int:
        return hash((self.vars, self.alphabet, self.rules))

    # lookups

    @property
    def rule_index(self) -> dict[str, int]:
        idx = self._cache.get("rule_index")
        if idx is None:
            idx = {r.id: i for i, r in enumerate(self.rules)}
            self._cache["rule_index"] = idx
        return idx

    def rule(self, rid: str) -> Rule:
        return self.rules[self.rule_index[rid]]

    def has_rule(self, rid: str) -> bool:
        return rid in self.rule_index

    @property
    def accepting_ids(self) -> frozenset:
        return frozenset(r.id for r in self.rules if r.accepting)

    def rules_of_kind(self, *kinds: RuleKind) -> list[Rule]:
        return [r for r in self.rules if classify_rule(r) in kinds]

    def push_rules(self) -> list[Rule]:
        return self.rules_of_kind(RuleKind.SEQ_PUSH)

    def pop_rules(self) -> list[Rule]:
        return self.rules_of_kind(RuleKind.SEQ_POP)

    def par_rules(self) -> list[Rule]:
        return self.rules_of_kind(RuleKind.PAR)

    # derived systems

    def with_rules(self, rules: Iterable[Rule], vars: Iterable[str] | None = None,
                   alphabet: Iterable[str] | None = None) -> Brs:
        rules = tuple(rules)
        vs = set(self.vars if vars is None else vars)
        al = set(self.alphabet if alphabet is None else alphabet)
        for r in rules:
            vs |= r.variables()
            al.add(r.label)
        return Brs(vs, al, rules)

    def with_accepting(self, ids: Iterable[str]) -> Brs:
        ids = frozenset(ids)
        return Brs(self.vars, self.alphabet,
                   [Rule(r.id, r.lhs, r.label, r.rhs, r.id in ids) for r in self.rules])

    def __str__(self) -> str:
        from .syntax import print_brs

        return print_brs(self)


def is_normal_form(b: Brs) -> bool:
    return all(classify_rule(r) is not RuleKind.OTHER for r in b.rules)


def is_parallel(b: Brs) -> bool:
    return all(classify_rule(r) is RuleKind.PAR for r in b.rules)


def is_sequential(b: Brs) -> bool:
    return all(seq_shape(r) is not None for r in b.rules)


# -- one-step derivations --------------------------------------------------------


def _first_indices(lhs_factors: tuple[Term, ...], fs: tuple[Term, ...]) -> tuple[int, ...] | None:
    used = [False] * len(fs)
    out = []
    for f in lhs_factors:
        for i, g in enumerate(fs):
            if not used[i] and g == f:
                used[i] = True
                out.append(i)
                break
        else:
            return None
    return tuple(sorted(out))


def _raw_successors(t: Term, rules: tuple[Rule, ...]) -> Iterator[tuple[int, Position, Term]]:
    for ri, r in enumerate(rules):
        if r.lhs == t:
            yield ri, (), r.rhs
    if isinstance(t, Seq):
        for ri, pos, res in _raw_successors(t.tail, rules):
            yield ri, (SEQ_TAIL,) + pos, seq(t.head, res)
    elif isinstance(t, Par):
        fs = t.factors
        n = len(fs)
        for ri, r in enumerate(rules):
            lf = r.lhs.factors
            if 2 <= len(lf) < n:
                idx = _first_indices(lf, fs)
                if idx is not None:
                    rest = [f for i, f in enumerate(fs) if i not in idx]
                    yield ri, (sub_move(idx),), par(r.rhs, *rest)
        for i, f in enumerate(fs):
            if i and fs[i - 1] == f:
                continue
            rest = fs[:i] + fs[i + 1:]
            for ri, pos, res in _raw_successors(f, rules):
                yield ri, (par_move(i),) + pos, par(res, *rest)


def successors(t: Term, b: Brs) -> list[tuple[str, Position, Term]]:
    """All one-step derivations from ``t``: ``(rule id, position, result)``.

    Ordered by rule declaration order, then position; one entry per
    distinct ``(rule, result)``.
    """
    cache = b._cache.setdefault("succ", {})
    hit = cache.get(t)
    if hit is not None:
        return hit
    raw = sorted(_raw_successors(t, b.rules), key=lambda e: (e[0], position_key(e[1])))
    seen: set = set()
    out = []
    for ri, pos, res in raw:
        k = (ri, res)
        if k not in seen:
            seen.add(k)
            out.append((b.rules[ri].id, pos, res))
    if len(cache) < 200_000:
        cache[t] = out
    return out


def apply_at(t: Term, r: Rule, pos: Position) -> Term | None:
    """Apply ``r`` at ``pos`` by direct navigation; ``None`` if it does not match."""
    if not pos:
        return r.rhs if t == r.lhs else None
    m = pos[0]
    if m[0] == "seq":
        if not isinstance(t, Seq):
            return None
        inner = apply_at(t.tail, r, pos[1:])
        return None if inner is None else seq(t.head, inner)
    if not isinstance(t, Par):
        return None
    fs = t.factors
    if m[0] == "par":
        i = m[1]
        if not 0 <= i < len(fs):
            return None
        inner = apply_at(fs[i], r, pos[1:])
        return None if inner is None else par(inner, *(fs[:i] + fs[i + 1:]))
    idx = m[1]
    if len(pos) != 1 or len(set(idx)) != len(idx) or any(not 0 <= i < len(fs) for i in idx):
        return None
    if par_of(fs[i] for i in idx) != r.lhs:
        return None
    return par(r.rhs, *(f for i, f in enumerate(fs) if i not in idx))


def locate(t: Term, b: Brs, rid: str, result: Term) -> Position | None:
    for r, pos, res in successors(t, b):
        if r == rid and res == result:
            return pos
    return None


def enabled(t: Term, a: str, b: Brs) -> bool:
    return any(b.rule(rid).label == a for rid, _, _ in successors(t, b))


# -- state formulas -------------------------------------------------------------


@dataclass(frozen=True)
class EN:
    action: str


@dataclass(frozen=True)
class SNot:
    arg: object


@dataclass(frozen=True)
class SAnd:
    left: object
    right: object


@dataclass(frozen=True)
class SOr:
    left: object
    right: object


def eval_state_formula(t: Term, f, b: Brs) -> bool:
    if isinstance(f, EN):
        if f.action not in b.alphabet:
            raise ValueError(f"undeclared action {f.action}")
        return enabled(t, f.action, b)
    if isinstance(f, SNot):
        return not eval_state_formula(t, f.arg, b)
    if isinstance(f, SAnd):
        return eval_state_formula(t, f.left, b) and eval_state_formula(t, f.right, b)
    if isinstance(f, SOr):
        return eval_state_formula(t, f.left, b) or eval_state_formula(t, f.right, b)
    raise TypeError(f"not a state formula: {f!r}")


def relabel_fnf(b: Brs, extra: Iterable[Rule] = ()) -> Brs:
    """Accepting rules relabeled ``f``, the others ``nf``; ``extra`` appended as-is."""
    extra = list(extra)
    rules = [Rule(r.id, r.lhs, "f" if r.accepting else "nf", r.rhs, r.accepting) for r in b.rules]
    rules.extend(extra)
    vs = set(b.vars)
    for r in extra:
        vs |= r.variables()
    return Brs(vs, {"f", "nf"} | {r.label for r in extra}, rules)


# -- derivations ----------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    rule: str
    position: Position
    result: Term


@dataclass(frozen=True)
class Derivation:
    start: Term
    steps: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def end(self) -> Term:
        return self.steps[-1].result if self.steps else self.start

    @property
    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]

    def terms(self) -> list[Term]:
        return [self.start] + [s.result for s in self.steps]

    def accepting_count(self, b: Brs) -> int:
        acc = b.accepting_ids
        return sum(1 for s in self.steps if s.rule in acc)

    def is_accepting(self, b: Brs) -> bool:
        return self.accepting_count(b) > 0

    def replay(self, b: Brs) -> bool:
        """Every step applies its rule at its position and yields its result."""
        t = self.start
        for s in self.steps:
            if not b.has_rule(s.rule) or apply_at(t, b.rule(s.rule), s.position) != s.result:
                return False
            t = s.result
        return True

    def then(self, other: Derivation) -> Derivation:
        if other.start != self.end:
            raise ValueError("derivations do not chain")
        return Derivation(self.start, self.steps + other.steps)


def derivation_from_rules(b: Brs, start: Term, rule_results: Iterable[tuple[str, Term]]) -> Derivation | None:
    """Attach positions to a ``(rule, result)`` sequence; ``None`` if some step is invalid."""
    t = start
    steps = []
    for rid, res in rule_results:
        pos = locate(t, b, rid, res)
        if pos is None:
            return None
        steps.append(Step(rid, pos, res))
        t = res
    return Derivation(start, tuple(steps))


def application_level(d: Derivation, step_index: int) -> int:
    if not 0 <= step_index < len(d.steps):
        raise IndexError(f"step {step_index} out of range")
    return sum(1 for m in d.steps[step_index].position if m[0] == "seq")


def subderivation(d: Derivation, step_index: int, anchor: Position, b: Brs) -> Derivation:
    """The subderivation from ``s`` of the ``X.(s)`` occurrence at ``anchor``.

    ``anchor`` addresses a node of the term reached after ``step_index``
    steps (``0`` is the start term). Sibling steps are skipped, steps inside
    ``s`` are kept with positions relative to ``s``, and the projection ends
    when the occurrence itself is rewritten or ``s`` becomes ``eps``.
    """
    from .occurrence import OccTree

    terms = d.terms()
    if not 0 <= step_index < len(terms):
        raise IndexError(f"step {step_index} out of range")
    tree = OccTree(terms[step_index])
    node = tree.resolve(anchor)
    if isinstance(node, list) or node.kind != "seq":
        raise ValueError("anchor does not address an X.(s) occurrence")
    aid = node.id
    start = tree.to_term(node.children[0])
    steps: list[Step] = []
    for s in d.steps[step_index:]:
        rel = tree.relative(aid, s.position)
        if rel is None:
            break
        tree.apply(s.position, b.rule(s.rule).rhs)
        if tree.term() != s.result:
            raise ValueError(f"step {s.rule} does not replay")
        if rel == "outside":
            continue
        anchor_node = tree.nodes[aid]
        inner = tree.to_term(anchor_node.children[0]) if anchor_node.kind == "seq" else EPS
        steps.append(Step(s.rule, rel, inner))
        if inner is EPS:
            break
    return Derivation(start, tuple(steps))
