"""Petri-net image of parallel rewrite systems and the flag-product nets."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..brs import Brs, Rule, is_parallel
from ..terms import Term, atom, is_par_term, par_of

SEEN, NOT_SEEN = "__seen", "__notseen"
MOVED_OFF, MOVED_ON = "__off", "__on"


@dataclass(frozen=True)
class Transition:
    pre: tuple
    post: tuple
    label: str
    accepting: bool
    origin: str


@dataclass(frozen=True)
class Net:
    places: tuple
    transitions: tuple
    flag_places: frozenset = frozenset()
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.places)})
        for t in self.transitions:
            if len(t.pre) != len(self.places) or len(t.post) != len(self.places):
                raise ValueError("transition arity does not match the place count")
            if not any(t.pre):
                raise ValueError(f"transition {t.origin} has an empty preset")

    def index(self, place: str) -> int:
        return self._index[place]

    @property
    def pres(self) -> tuple:
        return tuple(t.pre for t in self.transitions)

    @property
    def posts(self) -> tuple:
        return tuple(t.post for t in self.transitions)

    def marking(self, counts: dict[str, int] | None = None) -> tuple:
        m = [0] * len(self.places)
        for p, n in (counts or {}).items():
            m[self._index[p]] += n
        return tuple(m)

    def unit(self, place: str) -> tuple:
        return self.marking({place: 1})

    def as_dict(self, m: tuple) -> dict[str, int]:
        return {p: v for p, v in zip(self.places, m) if v}


def _vector(places_index: dict[str, int], n: int, t: Term) -> tuple:
    v = [0] * n
    for f in t.factors:
        v[places_index[f.name]] += 1
    return tuple(v)


def rule_to_transition(idx: dict[str, int], n: int, r: Rule) -> Transition:
    return Transition(_vector(idx, n, r.lhs), _vector(idx, n, r.rhs), r.label, r.accepting, r.id)


def par_brs_to_net(b: Brs, extra_places=()) -> Net:
    if not is_parallel(b):
        raise ValueError("the system is not parallel")
    places = tuple(sorted(set(b.vars) | set(extra_places)))
    idx = {p: i for i, p in enumerate(places)}
    return Net(places, tuple(rule_to_transition(idx, len(places), r) for r in b.rules))


def term_to_marking(net: Net, t: Term) -> tuple:
    if not is_par_term(t):
        raise ValueError(f"{t} is not a parallel term")
    return net.marking(Counter(f.name for f in t.factors))


def marking_to_term(net: Net, m: tuple) -> Term:
    fs = []
    for p, v in zip(net.places, m):
        if p not in net.flag_places:
            fs.extend([atom(p)] * v)
    return par_of(fs)


def _extend(vec: tuple, extra: tuple) -> tuple:
    return tuple(vec) + tuple(extra)


def accepting_seen_product(net: Net) -> tuple[Net, list[int]]:
    """Two flag places; accepting transitions are duplicated to set the flag.

    Returns the product and, per product transition, the index of the
    originating transition.
    """
    places = net.places + (NOT_SEEN, SEEN)
    trans, origin = [], []
    for i, t in enumerate(net.transitions):
        if t.accepting:
            trans.append(Transition(_extend(t.pre, (1, 0)), _extend(t.post, (0, 1)), t.label, True, t.origin))
            trans.append(Transition(_extend(t.pre, (0, 1)), _extend(t.post, (0, 1)), t.label, True, t.origin))
            origin += [i, i]
        else:
            trans.append(Transition(_extend(t.pre, (0, 0)), _extend(t.post, (0, 0)), t.label, False, t.origin))
            origin.append(i)
    return Net(places, tuple(trans), net.flag_places | {SEEN, NOT_SEEN}), origin


def non_null_non_accepting_product(net: Net) -> tuple[Net, list[int]]:
    """Accepting transitions removed; the flag moves from off to on on the first firing."""
    places = net.places + (MOVED_OFF, MOVED_ON)
    trans, origin = [], []
    for i, t in enumerate(net.transitions):
        if t.accepting:
            continue
        trans.append(Transition(_extend(t.pre, (1, 0)), _extend(t.post, (0, 1)), t.label, False, t.origin))
        trans.append(Transition(_extend(t.pre, (0, 1)), _extend(t.post, (0, 1)), t.label, False, t.origin))
        origin += [i, i]
    return Net(places, tuple(trans), net.flag_places | {MOVED_OFF, MOVED_ON}), origin


def non_accepting_subnet(net: Net) -> tuple[Net, list[int]]:
    keep = [i for i, t in enumerate(net.transitions) if not t.accepting]
    return Net(net.places, tuple(net.transitions[i] for i in keep), net.flag_places), keep


def lift_marking(m: tuple, flags: tuple) -> tuple:
    return tuple(m) + tuple(flags)


