"""Process terms modulo commutativity/associativity of ``||`` and the unit ``eps``.

Every term built through :func:`atom`, :func:`seq`, :func:`par` (or
:func:`normalize`) is canonical, so structural equality coincides with
equivalence of the underlying raw terms.

Raw syntax trees are plain tuples::

    ("eps",) | ("var", name) | ("seq", name, raw) | ("par", raw, raw)
"""
from __future__ import annotations

import re
import sys
from collections import Counter
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

Z_ACC = "Z_ACC"
Z_NOT_ACC = "Z_NOT_ACC"
RESERVED_VARIABLES = frozenset({Z_ACC, Z_NOT_ACC})


def check_name(name: str) -> str:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise ValueError(f"invalid variable name {name!r}")
    return sys.intern(name)


class Term:
    """Base class of canonical process terms.

    Terms are immutable and totally ordered: ``eps < atoms < seq < par``,
    atoms by name, ``seq`` lexicographically, ``par`` by sorted factors.
    """

    __slots__ = ("key", "_hash", "nesting")

    key: tuple
    nesting: int  # sequential nesting depth; atoms and eps are 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Term) and self.key == other.key

    def __ne__(self, other: object) -> bool:
        return not self == other

    def __lt__(self, other: Term) -> bool:
        return self.key < other.key

    def __le__(self, other: Term) -> bool:
        return self.key <= other.key

    def __gt__(self, other: Term) -> bool:
        return self.key > other.key

    def __ge__(self, other: Term) -> bool:
        return self.key >= other.key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Term({self})"

    @property
    def factors(self) -> tuple[Term, ...]:
        """Top-level parallel factors (``()`` for eps, ``(self,)`` otherwise)."""
        return (self,)


class Epsilon(Term):
    __slots__ = ()

    def __init__(self) -> None:
        self.key = (0,)
        self._hash = hash(self.key)
        self.nesting = 0

    def __str__(self) -> str:
        return "eps"

    @property
    def factors(self) -> tuple[Term, ...]:
        return ()


class Atom(Term):
    __slots__ = ("name",)

    def __init__(self, name: str) -> None:
        self.name = sys.intern(name)
        self.key = (1, self.name)
        self._hash = hash(self.key)
        self.nesting = 0

    def __str__(self) -> str:
        return self.name


class Seq(Term):
    """``head.(tail)`` with ``tail != eps``; build it through :func:`seq`."""

    __slots__ = ("head", "tail")

    def __init__(self, head: str, tail: Term) -> None:
        self.head = sys.intern(head)
        self.tail = tail
        self.key = (2, self.head, tail.key)
        self._hash = hash(self.key)
        self.nesting = tail.nesting + 1

    def __str__(self) -> str:
        return f"{self.head}.({self.tail})"


class Par(Term):
    """Flattened, sorted multiset of at least two non-eps, non-par factors."""

    __slots__ = ("_factors",)

    def __init__(self, factors: tuple[Term, ...]) -> None:
        self._factors = factors
        self.key = (3, tuple(f.key for f in factors))
        self._hash = hash(self.key)
        self.nesting = max(f.nesting for f in factors)

    @property
    def factors(self) -> tuple[Term, ...]:
        return self._factors

    def __str__(self) -> str:
        return " || ".join(str(f) for f in self._factors)


EPS = Epsilon()


@lru_cache(maxsize=None)
def atom(name: str) -> Atom:
    return Atom(name)


def seq(head: str, tail: Term) -> Term:
    if tail is EPS or isinstance(tail, Epsilon):
        return atom(head)
    return Seq(head, tail)


def par(*terms: Term) -> Term:
    flat: list[Term] = []
    for t in terms:
        flat.extend(t.factors)
    if not flat:
        return EPS
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=_sort_key)
    return Par(tuple(flat))


def par_of(factors: Iterable[Term]) -> Term:
    return par(*factors)


def _sort_key(t: Term) -> tuple:
    return t.key


# -- raw syntax ---------------------------------------------------------------


def normalize(raw) -> Term:
    """Canonical representative of a raw syntax tree (idempotent on terms)."""
    if isinstance(raw, Term):
        return raw
    tag = raw[0]
    if tag == "eps":
        return EPS
    if tag == "var":
        return atom(check_name(raw[1]))
    if tag == "seq":
        return seq(check_name(raw[1]), normalize(raw[2]))
    if tag == "par":
        return par(*(normalize(r) for r in raw[1:]))
    raise ValueError(f"malformed raw term {raw!r}")


def to_raw(t: Term):
    """A raw syntax tree for ``t`` (parallel composition nested to the left)."""
    if isinstance(t, Epsilon):
        return ("eps",)
    if isinstance(t, Atom):
        return ("var", t.name)
    if isinstance(t, Seq):
        return ("seq", t.head, to_raw(t.tail))
    fs = [to_raw(f) for f in t.factors]
    out = fs[0]
    for f in fs[1:]:
        out = ("par", out, f)
    return out


def equivalent(t1, t2) -> bool:
    return normalize(t1) == normalize(t2)


# -- structural predicates ----------------------------------------------------


def is_par_term(t: Term) -> bool:
    """True iff ``t`` contains no sequential composition."""
    return all(isinstance(f, Atom) for f in t.factors)


def is_seq_term(t: Term) -> bool:
    """True iff ``t`` contains no parallel composition."""
    while isinstance(t, Seq):
        t = t.tail
    return not isinstance(t, Par)


def variables(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Atom):
            out.add(u.name)
        elif isinstance(u, Seq):
            out.add(u.head)
            stack.append(u.tail)
        else:
            stack.extend(u.factors if isinstance(u, Par) else ())
    return out


def leaves(t: Term) -> int:
    if isinstance(t, Epsilon):
        return 0
    if isinstance(t, Atom):
        return 1
    if isinstance(t, Seq):
        return 1 + leaves(t.tail)
    return sum(leaves(f) for f in t.factors)


def size(t: Term) -> int:
    if isinstance(t, (Epsilon, Atom)):
        return 1
    if isinstance(t, Seq):
        return 1 + size(t.tail)
    return 1 + sum(size(f) for f in t.factors)


def submultisets(factors: tuple[Term, ...]) -> Iterator[tuple[Term, ...]]:
    """All distinct sub-multisets of a sorted factor tuple, empty and full included."""
    groups = sorted(Counter(factors).items(), key=lambda kv: kv[0].key)
    for counts in product(*(range(n + 1) for _, n in groups)):
        chosen: list[Term] = []
        for (f, _), k in zip(groups, counts):
            chosen.extend([f] * k)
        yield tuple(chosen)


def multiset_minus(factors: tuple[Term, ...], removed: Iterable[Term]) -> tuple[Term, ...]:
    rest = Counter(factors)
    rest.subtract(removed)
    if any(v < 0 for v in rest.values()):
        raise ValueError("not a sub-multiset")
    out: list[Term] = []
    for f in factors:
        if rest[f] > 0:
            out.append(f)
            rest[f] -= 1
    return tuple(out)


def is_submultiset(small: Iterable[Term], big: Iterable[Term]) -> bool:
    need = Counter(small)
    have = Counter(big)
    return all(have[k] >= v for k, v in need.items())


# -- subterms / substitution ----------------------------------------------------


def _proper_splits(t: Par) -> Iterator[tuple[Term, Term]]:
    fs = t.factors
    for sub in submultisets(fs):
        if 0 < len(sub) < len(fs):
            yield par_of(sub), par_of(multiset_minus(fs, sub))


@lru_cache(maxsize=100_000)
def subterms(t: Term) -> frozenset[Term]:
    if isinstance(t, (Epsilon, Atom)):
        return frozenset({t})
    if isinstance(t, Seq):
        return subterms(t.tail) | {t}
    out = {t}
    for left, _ in _proper_splits(t):
        out |= subterms(left)
    return frozenset(out)


def is_subterm(s: Term, t: Term) -> bool:
    """``s in subterms(t)`` without materializing the (exponential) set."""
    if s == t:
        return True
    if isinstance(t, Seq):
        return is_subterm(s, t.tail)
    if isinstance(t, Par):
        if isinstance(s, Epsilon):
            return False
        sf = s.factors
        if len(sf) < len(t.factors) and is_submultiset(sf, t.factors):
            return True
        return any(is_subterm(s, f) for f in set(t.factors))
    return False


def substitute(t: Term, st: Term, replacement: Term) -> frozenset[Term]:
    """All terms obtained by replacing one occurrence of ``st`` in ``t``."""
    if st not in subterms(t):
        raise ValueError(f"{st} is not a subterm of {t}")
    return frozenset(_subst(t, st, replacement))


def _subst(t: Term, st: Term, rep: Term) -> set[Term]:
    if t == st:
        return {rep}
    if isinstance(t, Seq):
        return {seq(t.head, s) for s in _subst(t.tail, st, rep)}
    out: set[Term] = set()
    if isinstance(t, Par):
        for left, right in _proper_splits(t):
            if st in subterms(left):
                for u in _subst(left, st, rep):
                    out.add(par(u, right))
    return out


def seq_projections(t: Term) -> frozenset[Term]:
    if isinstance(t, Epsilon):
        return frozenset()
    if isinstance(t, Atom):
        return frozenset({t})
    if isinstance(t, Seq):
        return frozenset(seq(t.head, u) for u in seq_projections(t.tail))
    out: set[Term] = set()
    for f in t.factors:
        out |= seq_projections(f)
    return frozenset(out)


# -- sequences of rules ---------------------------------------------------------

INTERLEAVING_BOUND = 16


def interleavings(s1, s2, bound: int = INTERLEAVING_BOUND) -> set[tuple]:
    s1, s2 = tuple(s1), tuple(s2)
    if len(s1) + len(s2) > bound:
        raise ValueError(f"combined length {len(s1) + len(s2)} exceeds bound {bound}")
    return set(_interleave(s1, s2))


@lru_cache(maxsize=4096)
def _interleave(s1: tuple, s2: tuple) -> frozenset[tuple]:
    if not s1:
        return frozenset({s2})
    if not s2:
        return frozenset({s1})
    left = {(s1[0],) + s for s in _interleave(s1[1:], s2)}
    right = {(s2[0],) + s for s in _interleave(s1, s2[1:])}
    return frozenset(left | right)


# -- sequential terms -----------------------------------------------------------


def _require_seq(t: Term) -> None:
    if isinstance(t, Epsilon) or not is_seq_term(t):
        raise ValueError(f"{t} is not a non-empty sequential term")


def last(t: Term) -> str:
    _require_seq(t)
    while isinstance(t, Seq):
        t = t.tail
    return t.name


def compose(t: Term, t2: Term) -> Term:
    """Replace the innermost variable of ``t`` by ``t2``."""
    _require_seq(t)
    _require_seq(t2)
    out = t2
    for h in reversed(seq_heads(t)[:-1]):
        out = seq(h, out)
    return out


def seq_from_heads(heads: list[str]) -> Term:
    """``[X1, ..., Xn, Y]`` -> ``X1.(...Xn.(Y)...)``."""
    out: Term = atom(heads[-1])
    for h in reversed(heads[:-1]):
        out = seq(h, out)
    return out


def seq_heads(t: Term) -> list[str]:
    _require_seq(t)
    out = []
    while isinstance(t, Seq):
        out.append(t.head)
        t = t.tail
    out.append(t.name)
    return out
