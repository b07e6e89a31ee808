"""Lasso witnesses for infinite derivations.

A witness is a prefix derivation reaching ``context[u]`` and a pump
derivation from ``u`` to ``growth[u]``. Repeating the pump inside the
growing context is valid by context closure, so ``k`` copies of the pump
run through ``context[growth^j[s]]`` for the pump's intermediate terms
``s``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .brs import Brs, Derivation, derivation_from_rules
from .terms import EPS, Term, par, seq


@dataclass(frozen=True)
class ParFrame:
    """The hole sits in parallel with ``others``."""

    others: Term


@dataclass(frozen=True)
class SeqFrame:
    """The hole is the tail of ``head.(_)``."""

    head: str


def plug(frames: Iterable, t: Term) -> Term:
    """Fill a one-hole context given as frames from outermost to innermost."""
    for f in reversed(tuple(frames)):
        t = par(f.others, t) if isinstance(f, ParFrame) else seq(f.head, t)
    return t


def frames_to_json(frames) -> list:
    return [{"par": str(f.others)} if isinstance(f, ParFrame) else {"seq": f.head} for f in frames]


class PumpKind(enum.Enum):
    EXACT_REPEAT = "ExactRepeat"
    PAR_PUMP = "ParPump"
    SEQ_PUMP = "SeqPump"
    NESTED = "Nested"


def pump_kind(growth) -> PumpKind:
    growth = tuple(growth)
    if not growth:
        return PumpKind.EXACT_REPEAT
    if len(growth) == 1 and isinstance(growth[0], ParFrame):
        return PumpKind.PAR_PUMP
    if all(isinstance(f, SeqFrame) for f in growth):
        return PumpKind.SEQ_PUMP
    return PumpKind.NESTED


@dataclass(frozen=True)
class LassoWitness:
    prefix: Derivation
    context: tuple
    pump: Derivation
    growth: tuple

    @property
    def start(self) -> Term:
        return self.prefix.start

    @property
    def kind(self) -> PumpKind:
        return pump_kind(self.growth)

    def accepting_in_prefix(self, b: Brs) -> int:
        return self.prefix.accepting_count(b)

    def accepting_in_pump(self, b: Brs) -> int:
        return self.pump.accepting_count(b)

    def shape_ok(self) -> bool:
        return (len(self.pump) > 0 and self.pump.start is not EPS
                and self.prefix.end == plug(self.context, self.pump.start)
                and self.pump.end == plug(self.growth, self.pump.start))

    def unroll(self, b: Brs, pumps: int = 3) -> Derivation | None:
        """Concrete derivation ``prefix pump^pumps``; ``None`` if any step fails to apply."""
        if not self.shape_ok() or not self.prefix.replay(b):
            return None
        steps = [(s.rule, s.result) for s in self.prefix.steps]
        for j in range(pumps):
            ctx = tuple(self.context) + tuple(self.growth) * j
            steps += [(s.rule, plug(ctx, s.result)) for s in self.pump.steps]
        return derivation_from_rules(b, self.prefix.start, steps)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "prefix": derivation_to_json(self.prefix),
            "context": frames_to_json(self.context),
            "pump": derivation_to_json(self.pump),
            "growth": frames_to_json(self.growth),
        }


def derivation_to_json(d: Derivation) -> list[dict]:
    from .brs import format_position

    return [{"rule": s.rule, "position": format_position(s.position), "term": str(s.result)} for s in d.steps]


def replay(b: Brs, w: LassoWitness, pumps: int = 3) -> bool:
    return w.unroll(b, pumps) is not None
