"""Problems 1-3 on a decomposed system, and the F / GF fragment on top of them."""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field

from .brs import Brs, Derivation, RuleKind, derivation_from_rules, is_normal_form, seq_shape
from .decision import Decision, Verdict, k_and, k_not, k_or, unknown
from .graphs import RunMode
from .petri.engine import infinite_run
from .petri.net import par_brs_to_net
from .saturate import DecompositionBundle, decompose, finite_accepting_derivation
from .seqeng import Constraint, head_path, head_reachable, infinite_run_seq
from .terms import EPS, Term, atom, multiset_minus, par, par_of, seq
from .witness import LassoWitness, ParFrame, SeqFrame, plug

log = logging.getLogger(__name__)

PROBLEM_MODES = {
    1: (Constraint.ANY, RunMode.ACCEPTING_INFINITELY_OFTEN),
    2: (Constraint.NON_ACCEPTING, RunMode.NO_ACCEPTING),
    3: (Constraint.ANY, RunMode.FINITELY_MANY_NON_NULL_ACCEPTING),
}


# -- propositional and fragment formulas ----------------------------------------------------


@dataclass(frozen=True)
class Act:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    sub: object

    def __str__(self) -> str:
        return f"!{_wrap(self.sub)}"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{_wrap(self.left)} && {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{_wrap(self.left)} || {_wrap(self.right)}"


@dataclass(frozen=True)
class F:
    prop: object

    def __str__(self) -> str:
        return f"F {_wrap(self.prop)}"


@dataclass(frozen=True)
class GF:
    prop: object

    def __str__(self) -> str:
        return f"GF {_wrap(self.prop)}"


def _wrap(f) -> str:
    return str(f) if isinstance(f, (Act, Not)) else f"({f})"


_TOKEN = re.compile(r"\s*(?:(&&|&|∧)|(\|\||\||∨)|(!|~|¬)|(\()|(\))|([A-Za-z][A-Za-z0-9_]*))")


def _tokens(src: str) -> list[str]:
    out, pos = [], 0
    src = src.rstrip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ValueError(f"unexpected character at {pos + 1}: {src[pos:]!r}")
        kinds = ("&&", "||", "!", "(", ")")
        for i, k in enumerate(kinds):
            if m.group(i + 1):
                out.append(k)
                break
        else:
            word = m.group(6)
            out.append({"and": "&&", "or": "||", "not": "!"}.get(word, word))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, src: str) -> None:
        self.toks = _tokens(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want=None):
        t = self.peek()
        if t is None or (want is not None and t != want):
            raise ValueError(f"expected {want or 'a token'}, found {t or 'end of input'}")
        self.i += 1
        return t

    def done(self) -> None:
        if self.peek() is not None:
            raise ValueError(f"unexpected {self.peek()!r}")

    def prop(self):
        left = self.conj()
        while self.peek() == "||":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek() == "&&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        t = self.peek()
        if t == "!":
            self.take()
            return Not(self.unary())
        if t == "(":
            self.take()
            f = self.prop()
            self.take(")")
            return f
        if t is None or t in ("&&", "||", ")"):
            raise ValueError(f"expected an action, found {t or 'end of input'}")
        return Act(self.take())

    def fragment(self):
        t = self.peek()
        if t == "!":
            self.take()
            return Not(self.fragment())
        if t == "(" and self._paren_fragment():
            self.take()
            f = self.fragment()
            self.take(")")
            return f
        if t == "F":
            self.take()
            return F(self.unary_or_group())
        if t == "GF":
            self.take()
            return GF(self.unary_or_group())
        if t == "G" and self.i + 1 < len(self.toks) and self.toks[self.i + 1] == "F":
            self.take()
            self.take()
            return GF(self.unary_or_group())
        raise ValueError("expected F, GF or a negation")

    def _paren_fragment(self) -> bool:
        nxt = self.toks[self.i + 1] if self.i + 1 < len(self.toks) else None
        return nxt in ("F", "GF", "G", "!", "(")

    def unary_or_group(self):
        return self.unary()


def parse_prop(src: str):
    p = _Parser(src)
    f = p.prop()
    p.done()
    return f


def parse_fragment(src: str):
    """``F psi``, ``GF psi`` (also ``G F psi``) and negations ``!phi``; ``psi`` binds tightly, so write ``F (a || b)``."""
    p = _Parser(src)
    f = p.fragment()
    p.done()
    return f


def prop_action_set(psi, sigma) -> frozenset:
    sigma = frozenset(sigma)
    if isinstance(psi, Act):
        if psi.name not in sigma:
            raise ValueError(f"undeclared action {psi.name}")
        return frozenset({psi.name})
    if isinstance(psi, Not):
        return sigma - prop_action_set(psi.sub, sigma)
    if isinstance(psi, And):
        return prop_action_set(psi.left, sigma) & prop_action_set(psi.right, sigma)
    if isinstance(psi, Or):
        return prop_action_set(psi.left, sigma) | prop_action_set(psi.right, sigma)
    raise TypeError(f"not a propositional formula: {psi!r}")


def ac_set(b: Brs, psi) -> frozenset:
    acts = prop_action_set(psi, b.alphabet)
    return frozenset(r.id for r in b.rules if r.label in acts)


# -- witness expansion --------------------------------------------------------------------


class _Expander:
    """Rewrites steps of the synthesized systems into steps of the source system.

    Each ``run_*`` method takes a context (frames, outermost first) and a
    focus term, appends ``(rule, full term)`` steps of the source system and
    returns the new context and focus.
    """

    def __init__(self, bundle: DecompositionBundle) -> None:
        self.bundle = bundle
        self.src = bundle.source
        self.rpar = bundle.rpar
        self.steps: list[tuple[str, Term]] = []

    def emit(self, rid: str, ctx, focus: Term) -> None:
        self.steps.append((rid, plug(ctx, focus)))

    def _is_source_par(self, rid: str) -> bool:
        if not self.src.has_rule(rid) or rid in self.bundle.provenance:
            return False
        return seq_shape(self.src.rule(rid)) not in (RuleKind.SEQ_PUSH, RuleKind.SEQ_POP)

    def fire_par(self, rid: str, ctx, focus: Term) -> Term:
        """Apply a rule of the parallel system to the focus multiset."""
        r = self.rpar.rule(rid)
        rest = par_of(multiset_minus(focus.factors, r.lhs.factors))
        if self._is_source_par(rid):
            new = par(rest, r.rhs)
            self.emit(rid, ctx, new)
            return new
        x = r.lhs.name
        image = self.expand_summary(rid, ctx + (ParFrame(rest),), atom(x))
        return par(rest, image)

    def expand_summary(self, rid: str, ctx, focus: Term) -> Term:
        """Expand a ``#``/``$``/flag rule applied to the atom ``focus``; returns the image of its rhs."""
        prov = self.bundle.provenance[rid]
        push = self.src.rule(prov["push"])
        y, z = push.rhs.head, push.rhs.tail.name
        self.emit(push.id, ctx, push.rhs)
        inner = ctx + (SeqFrame(y),)
        kind = prov["query"]
        if kind in ("reach_eps_accepting", "reach_eps_non_accepting"):
            end = self.fire_sequence(prov["witness"], inner, atom(z))
            assert end is EPS
            return atom(y)
        if kind in ("reach_var_accepting", "reach_var_non_accepting"):
            pop = self.src.rule(prov["pop"])
            self.fire_sequence(prov["witness"], inner, atom(z))
            self.emit(pop.id, ctx, pop.rhs)
            return pop.rhs
        if kind == "finite_accepting_derivation":
            d = finite_accepting_derivation(self.src, z)
            cur: Term = atom(z)
            for sid, t in d.witness:
                self.emit(sid, inner, t)
                cur = t
            return seq(y, cur)
        return push.rhs

    def fire_sequence(self, rids, ctx, focus: Term) -> Term:
        for rid in rids:
            focus = self.fire_par(rid, ctx, focus)
        return focus

    def seq_step(self, rid: str, ctx: tuple, focus: Term) -> tuple[tuple, Term]:
        """One step of the sequential system at the innermost atom ``focus``."""
        rseq = self.bundle.rseq
        r = rseq.rule(rid)
        if rid not in self.bundle.provenance:
            self.emit(rid, ctx, r.rhs)
            return ctx + (SeqFrame(r.rhs.head),), r.rhs.tail
        end = self.fire_sequence(self.bundle.provenance[rid]["witness"], ctx, focus)
        y = r.rhs.name
        rest = par_of(multiset_minus(end.factors, (atom(y),)))
        return ctx + (ParFrame(rest),), atom(y)

    def seq_run(self, rids, ctx: tuple, focus: Term) -> tuple[tuple, Term]:
        for rid in rids:
            ctx, focus = self.seq_step(rid, ctx, focus)
        return ctx, focus

    def take(self) -> list[tuple[str, Term]]:
        out, self.steps = self.steps, []
        return out


def _derivation(b: Brs, start: Term, steps) -> Derivation:
    d = derivation_from_rules(b, start, steps)
    if d is None:
        raise RuntimeError("expanded witness does not replay in the source system")
    return d


def _cond1_witness(bundle: DecompositionBundle, x: str, y: str, constraint: Constraint, net, run) -> LassoWitness:
    ex = _Expander(bundle)
    ctx, focus = ex.seq_run(head_path(bundle.rseq, x, y, constraint), (), atom(x))
    pre_ids, pump_ids = run.origins(net)
    focus = ex.fire_sequence(pre_ids, ctx, focus)
    prefix = _derivation(bundle.source, atom(x), ex.take())
    u = focus
    end = ex.fire_sequence(pump_ids, (), u)
    extra = par_of(multiset_minus(end.factors, u.factors))
    pump = _derivation(bundle.source, u, ex.take())
    growth = (ParFrame(extra),) if extra is not EPS else ()
    return LassoWitness(prefix, ctx, pump, growth)


def _cond2_witness(bundle: DecompositionBundle, x: str, w) -> LassoWitness:
    ex = _Expander(bundle)
    ctx, focus = ex.seq_run(w.prefix, (), atom(x))
    prefix = _derivation(bundle.source, atom(x), ex.take())
    gctx, gfocus = ex.seq_run(w.pump, (), focus)
    assert gfocus == focus
    pump = _derivation(bundle.source, focus, ex.take())
    return LassoWitness(prefix, ctx, pump, gctx)


# -- problems ------------------------------------------------------------------------------


class Condition(enum.Enum):
    COND1 = "Cond1"
    COND2 = "Cond2"
    NONE = "None"


@dataclass
class ProblemVerdict:
    problem: int
    from_: str
    decision: Decision
    condition: Condition = Condition.NONE
    via: str | None = None
    witness: LassoWitness | None = None
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return self.decision.verdict


def decide_problem(bundle: DecompositionBundle, x: str, problem: int, budget: int | None = None) -> ProblemVerdict:
    if problem not in PROBLEM_MODES:
        raise ValueError(f"unknown problem {problem}")
    if x not in bundle.source.vars:
        raise ValueError(f"unknown variable {x}")
    constraint, mode = PROBLEM_MODES[problem]
    kwargs = {} if budget is None else {"budget": budget}
    net = par_brs_to_net(bundle.rpar)
    verdicts = []
    notes = []
    for y in sorted(head_reachable(bundle.rseq, x, constraint)):
        d = infinite_run(net, net.unit(y), mode, **kwargs)
        verdicts.append(d.verdict)
        if d.is_yes:
            w = _cond1_witness(bundle, x, y, constraint, net, d.witness)
            return ProblemVerdict(problem, x, Decision(Verdict.YES, w, f"parallel run from {y}"),
                                  Condition.COND1, y, w)
        if d.is_unknown:
            notes.append(f"parallel run from {y}: {d.reason}")
    d = infinite_run_seq(bundle.rseq, x, mode)
    verdicts.append(d.verdict)
    if d.is_yes:
        w = _cond2_witness(bundle, x, d.witness)
        return ProblemVerdict(problem, x, Decision(Verdict.YES, w, "sequential run"), Condition.COND2, None, w)
    if d.is_unknown:
        notes.append(f"sequential run: {d.reason}")
    if bundle.any_unknown:
        notes.append("decomposition used an inconclusive query")
        return ProblemVerdict(problem, x, unknown("; ".join(notes)), notes=notes)
    if k_or(verdicts) is Verdict.UNKNOWN:
        return ProblemVerdict(problem, x, unknown("; ".join(notes)), notes=notes)
    return ProblemVerdict(problem, x, Decision(Verdict.NO, None, "neither condition holds"))


def check_problem(b: Brs, x: str, problem: int, budget: int | None = None) -> ProblemVerdict:
    if not is_normal_form(b):
        raise ValueError("the system is not in normal form")
    return decide_problem(decompose(b), x, problem, budget)


# -- fragment ------------------------------------------------------------------------------


@dataclass
class FragmentVerdict:
    formula: object
    decision: Decision
    problems: dict
    vacuous: bool

    @property
    def verdict(self) -> Verdict:
        return self.decision.verdict


def _strip(phi) -> tuple[object, bool]:
    neg = False
    while isinstance(phi, Not):
        phi, neg = phi.sub, not neg
    if not isinstance(phi, (F, GF)):
        raise TypeError(f"not a fragment formula: {phi!r}")
    return phi, neg


_CASES = {
    (F, False): (2,),
    (F, True): (1, 3),
    (GF, False): (2, 3),
    (GF, True): (1,),
}


def fragment_verdict(b: Brs, x: str, phi, budget: int | None = None) -> FragmentVerdict:
    """Evaluate ``phi`` over the infinite runs from ``x``; it holds iff every listed problem is No."""
    if not is_normal_form(b):
        raise ValueError("the system is not in normal form")
    base, neg = _strip(phi)
    marked = b.with_accepting(ac_set(b, base.prop))
    bundle = decompose(marked)
    problems = {p: decide_problem(bundle, x, p, budget) for p in (1, 2, 3)}
    needed = _CASES[(type(base), neg)]
    v = k_and(k_not(problems[p].verdict) for p in needed)
    vacuous = all(pv.verdict is Verdict.NO for pv in problems.values())
    if v is Verdict.YES:
        reason = "no infinite run from the variable (vacuous)" if vacuous else "holds on every infinite run"
        d = Decision(Verdict.YES, None, reason)
    elif v is Verdict.NO:
        cex = next(problems[p] for p in needed if problems[p].verdict is Verdict.YES)
        d = Decision(Verdict.NO, cex.witness, f"counterexample from problem {cex.problem}")
    else:
        d = unknown("an underlying problem is undecided")
    return FragmentVerdict(phi, d, problems, vacuous)


def model_check_fragment(b: Brs, x: str, phi, budget: int | None = None) -> Decision:
    return fragment_verdict(b, x, phi, budget).decision
