"""Three-valued verdicts shared by every decision procedure."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    witness: Any = None
    reason: str = ""

    @property
    def is_yes(self) -> bool:
        return self.verdict is Verdict.YES

    @property
    def is_no(self) -> bool:
        return self.verdict is Verdict.NO

    @property
    def is_unknown(self) -> bool:
        return self.verdict is Verdict.UNKNOWN

    @property
    def definite(self) -> bool:
        return self.verdict is not Verdict.UNKNOWN

    def __str__(self) -> str:
        return self.verdict.value if not self.reason else f"{self.verdict.value} ({self.reason})"


def yes(witness: Any = None, reason: str = "") -> Decision:
    return Decision(Verdict.YES, witness, reason)


def no(reason: str = "") -> Decision:
    return Decision(Verdict.NO, None, reason)


def unknown(reason: str) -> Decision:
    return Decision(Verdict.UNKNOWN, None, reason)


def k_not(v: Verdict) -> Verdict:
    if v is Verdict.YES:
        return Verdict.NO
    if v is Verdict.NO:
        return Verdict.YES
    return Verdict.UNKNOWN


def k_or(values: Iterable[Verdict]) -> Verdict:
    out = Verdict.NO
    for v in values:
        if v is Verdict.YES:
            return Verdict.YES
        if v is Verdict.UNKNOWN:
            out = Verdict.UNKNOWN
    return out


def k_and(values: Iterable[Verdict]) -> Verdict:
    return k_not(k_or(k_not(v) for v in values))
