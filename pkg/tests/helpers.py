"""Shared builders, corpora and brute-force oracles for the test suite."""
from __future__ import annotations

import random
from collections import deque
from pathlib import Path

from hypothesis import strategies as st

from prsbuchi.syntax import parse_brs, parse_rdha

HERE = Path(__file__).parent
CORPUS = HERE / "corpus"
VARS = ("X", "Y", "Z")


def B(rules: str, vars: str = "X, Y, Z, W", alphabet: str = "a, b, c") -> object:
    return parse_brs(f"brs {{ vars: {vars}; alphabet: {alphabet}; {rules} }}")


def brs_corpus() -> list[tuple[str, object]]:
    return [(p.stem, parse_brs(p.read_text())) for p in sorted((CORPUS / "brs").glob("*.brs"))]


def rdha_corpus() -> list[tuple[str, object]]:
    return [(p.stem, parse_rdha(p.read_text())) for p in sorted((CORPUS / "rdha").glob("*.rdha"))]


# -- raw syntax trees ---------------------------------------------------------------
# ("eps",) | ("var", X) | ("seq", X, t) | ("par", t1, t2)


def raw_nodes(r) -> int:
    if r[0] in ("eps", "var"):
        return 1
    if r[0] == "seq":
        return 1 + raw_nodes(r[2])
    return 1 + raw_nodes(r[1]) + raw_nodes(r[2])


def raw_leaves(r) -> int:
    if r[0] == "eps":
        return 0
    if r[0] == "var":
        return 1
    if r[0] == "seq":
        return 1 + raw_leaves(r[2])
    return raw_leaves(r[1]) + raw_leaves(r[2])


def random_raw(rng: random.Random, max_nodes: int, vars=VARS, eps_weight: float = 0.15):
    """A random binary raw tree with at most ``max_nodes`` nodes."""
    if max_nodes <= 1 or rng.random() < 0.3:
        return ("eps",) if rng.random() < eps_weight else ("var", rng.choice(vars))
    if max_nodes == 2 or rng.random() < 0.4:
        return ("seq", rng.choice(vars), random_raw(rng, max_nodes - 1, vars, eps_weight))
    left = rng.randint(1, max_nodes - 2)
    return ("par", random_raw(rng, left, vars, eps_weight), random_raw(rng, max_nodes - 1 - left, vars, eps_weight))


def raw_terms(max_depth: int = 4, vars=VARS):
    leaf = st.one_of(st.just(("eps",)), st.sampled_from(vars).map(lambda v: ("var", v)))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.tuples(st.just("seq"), st.sampled_from(vars), sub),
            st.tuples(st.just("par"), sub, sub),
        ),
        max_leaves=max_depth * 2,
    )


def shuffle_raw(rng: random.Random, r, eps: bool = True):
    """An equivalent raw tree: random commutations and regroupings, plus at most one inserted eps."""
    out = _shuffle(rng, r)
    if eps and rng.random() < 0.5:
        out = ("par", out, ("eps",)) if rng.random() < 0.5 else ("par", ("eps",), out)
    return out


def _shuffle(rng: random.Random, r):
    if r[0] in ("eps", "var"):
        return r
    if r[0] == "seq":
        return ("seq", r[1], _shuffle(rng, r[2]))
    parts: list = []

    def flat(u):
        if u[0] == "par":
            flat(u[1])
            flat(u[2])
        else:
            parts.append(_shuffle(rng, u))

    flat(r)
    rng.shuffle(parts)
    while len(parts) > 1:
        i = rng.randrange(len(parts) - 1)
        parts[i:i + 2] = [("par", parts[i], parts[i + 1])]
    return parts[0]


# -- exhaustive closure under the five term axioms -------------------------------------


def _axiom_moves(r):
    """Single applications of the axioms at the root, in the non-growing direction."""
    if r[0] == "par":
        a, b = r[1], r[2]
        yield ("par", b, a)
        if b == ("eps",):
            yield a
        if a[0] == "par":
            yield ("par", a[1], ("par", a[2], b))
        if b[0] == "par":
            yield ("par", ("par", a, b[1]), b[2])
    if r[0] == "seq" and r[2] == ("eps",):
        yield ("var", r[1])


def _moves(r):
    yield from _axiom_moves(r)
    if r[0] == "seq":
        for u in _moves(r[2]):
            yield ("seq", r[1], u)
    elif r[0] == "par":
        for u in _moves(r[1]):
            yield ("par", u, r[2])
        for u in _moves(r[2]):
            yield ("par", r[1], u)


def closure(r, limit: int = 400_000) -> set:
    """Every raw tree reachable from ``r`` by commutation, regrouping and eps elimination."""
    seen = {r}
    queue = deque([r])
    while queue:
        u = queue.popleft()
        for v in _moves(u):
            if v not in seen:
                seen.add(v)
                if len(seen) > limit:
                    raise RuntimeError("closure limit exceeded")
                queue.append(v)
    return seen


def closure_equivalent(r1, r2) -> bool:
    """Both closures contain the eps-free class of their start, so they meet iff equivalent."""
    c1 = closure(r1)
    if r2 in c1:
        return True
    return not c1.isdisjoint(closure(r2))


# -- brute-force term utilities written from the definitions -------------------------
# terms here are canonical prsbuchi terms; splits are enumerated over ordered factor lists


def bf_splits(t):
    """All ``(t1, t2)`` with both non-eps and ``t1 || t2 = t``."""
    from itertools import product

    from prsbuchi.terms import par_of

    fs = list(t.factors)
    out = set()
    for mask in product((0, 1), repeat=len(fs)):
        left = [f for f, m in zip(fs, mask) if m]
        right = [f for f, m in zip(fs, mask) if not m]
        if left and right:
            out.add((par_of(left), par_of(right)))
    return out


def bf_subterms(t):
    from prsbuchi.terms import Atom, Epsilon, Par, Seq

    if isinstance(t, (Epsilon, Atom)):
        return {t}
    if isinstance(t, Seq):
        return bf_subterms(t.tail) | {t}
    assert isinstance(t, Par)
    out = {t}
    for a, b in bf_splits(t):
        out |= bf_subterms(a) | bf_subterms(b)
    return out


def bf_substitute(t, s, rep):
    from prsbuchi.terms import Par, Seq, par, seq

    if t == s:
        return {rep}
    out = set()
    if isinstance(t, Seq) and s in bf_subterms(t.tail):
        out |= {seq(t.head, u) for u in bf_substitute(t.tail, s, rep)}
    if isinstance(t, Par):
        for a, b in bf_splits(t):
            if s in bf_subterms(a):
                out |= {par(u, b) for u in bf_substitute(a, s, rep)}
    return out


def bf_seq(t):
    from prsbuchi.terms import Atom, Epsilon, Seq, seq

    if isinstance(t, Epsilon):
        return set()
    if isinstance(t, Atom):
        return {t}
    if isinstance(t, Seq):
        return {seq(t.head, u) for u in bf_seq(t.tail)}
    out = set()
    for f in t.factors:
        out |= bf_seq(f)
    return out


def bf_interleavings(s1, s2):
    """Sequences of length |s1|+|s2| containing s1 and s2 as complementary subsequences."""
    from itertools import combinations

    n = len(s1) + len(s2)
    out = set()
    for pos in combinations(range(n), len(s1)):
        i1 = iter(s1)
        i2 = iter(s2)
        out.add(tuple(next(i1) if k in pos else next(i2) for k in range(n)))
    return out


def all_terms(max_leaves: int, vars=("X", "Y")):
    """Every canonical term with at most ``max_leaves`` variable occurrences (eps included)."""
    from prsbuchi.terms import EPS, atom, par_of, seq

    by_size: dict[int, set] = {0: {EPS}}
    nonpar: dict[int, set] = {0: set()}
    for n in range(1, max_leaves + 1):
        np_ = {atom(v) for v in vars} if n == 1 else set()
        for t in by_size[n - 1] | nonpar.get(n - 1, set()):
            if t is EPS or n - 1 == 0:
                continue
            for v in vars:
                np_.add(seq(v, t))
        nonpar[n] = np_
        terms = set(np_)
        # parallel compositions from smaller non-parallel pieces
        for k in range(1, n):
            for a in nonpar[k]:
                for b in by_size[n - k]:
                    if b is not EPS:
                        terms.add(par_of([a, *b.factors]))
        by_size[n] = terms
    out = set()
    for s in by_size.values():
        out |= s
    return out


# -- Petri nets -------------------------------------------------------------------------


def mk_net(places: str, transitions: list[tuple[dict, dict, bool]]):
    """Net from ``"X,Y"`` and ``[(pre, post, accepting), ...]`` with dict multisets."""
    from prsbuchi.petri import Net, Transition

    ps = tuple(p.strip() for p in places.split(","))

    def vec(d):
        return tuple(d.get(p, 0) for p in ps)

    return Net(ps, tuple(Transition(vec(pre), vec(post), "a", acc, f"t{i + 1}")
                         for i, (pre, post, acc) in enumerate(transitions)))


def bf_net_states(net, init, cap: int = 5000):
    """Forward enumeration of ``(marking, accepting seen, moved)`` triples; ``None`` past ``cap``.

    Written independently of the engine: plain firing on Python tuples.
    """
    start = (tuple(init), False, False)
    seen = {start}
    queue = deque([start])
    while queue:
        m, acc, moved = queue.popleft()
        for t in net.transitions:
            if all(a >= b for a, b in zip(m, t.pre)):
                m2 = tuple(a - b + c for a, b, c in zip(m, t.pre, t.post))
                s = (m2, acc or t.accepting, moved or not t.accepting)
                if s not in seen:
                    seen.add(s)
                    if len(seen) > cap:
                        return None
                    queue.append(s)
    return seen


def random_net(rng: random.Random, max_places: int = 4, max_transitions: int = 5):
    from prsbuchi.petri import Net, Transition

    n = rng.randint(1, max_places)
    ps = tuple(f"P{i}" for i in range(n))
    trans = []
    for i in range(rng.randint(1, max_transitions)):
        pre = [rng.choice((0, 0, 1, 1, 2)) for _ in range(n)]
        if not any(pre):
            pre[rng.randrange(n)] = 1
        post = [rng.choice((0, 0, 0, 1, 1, 2)) for _ in range(n)]
        trans.append(Transition(tuple(pre), tuple(post), "a", rng.random() < 0.4, f"t{i + 1}"))
    init = tuple(rng.randint(0, 2) for _ in range(n))
    if not any(init):
        init = (1,) + init[1:]
    return Net(ps, tuple(trans)), init


def random_bounded_net(rng: random.Random, cap: int = 3000):
    """A random net whose reachable space from its initial marking is finite and at most ``cap`` states."""
    while True:
        net, init = random_net(rng)
        states = bf_net_states(net, init, cap)
        if states is not None:
            return net, init, states


# -- decomposition re-certification -----------------------------------------------------


def recertify(bundle) -> list[str]:
    """Re-run every constitutive query against the final systems; list rules whose presence disagrees."""
    from prsbuchi.brs import RuleKind, seq_shape
    from prsbuchi.petri import CoverMode, ReachMode, exact_reachability, flagged_coverability, par_brs_to_net
    from prsbuchi.saturate import DOLLAR, SHARP

    b, rbar, rseq, rpar = bundle.source, bundle.rbar, bundle.rseq, bundle.rpar
    net = par_brs_to_net(rbar)
    want: set = set()

    def reach(z, w, mode):
        goal = net.marking() if w is None else net.unit(w)
        d = exact_reachability(net, net.unit(z), goal, mode)
        if d.is_unknown:
            raise AssertionError(f"query from {z} undecided")
        return d.is_yes

    pushes = [r for r in b.rules if seq_shape(r) is RuleKind.SEQ_PUSH]
    pops = [r for r in b.rules if seq_shape(r) is RuleKind.SEQ_POP]
    for p in pushes:
        x, y, z = p.lhs.name, p.rhs.head, p.rhs.tail.name
        if reach(z, None, ReachMode.ANY if p.accepting else ReachMode.ACCEPTING_SEEN):
            want.add((x, DOLLAR, y))
        if not p.accepting and reach(z, None, ReachMode.NONE_ACCEPTING):
            want.add((x, SHARP, y))
        for q in pops:
            if q.lhs.head != y:
                continue
            w, w2 = q.lhs.tail.name, q.rhs.name
            either = p.accepting or q.accepting
            if reach(z, w, ReachMode.ANY if either else ReachMode.ACCEPTING_SEEN):
                want.add((x, DOLLAR, w2))
            if not either and reach(z, w, ReachMode.NONE_ACCEPTING):
                want.add((x, SHARP, w2))
    source_ids = {r.id for r in b.rules}
    have = {(r.lhs.name, r.label, r.rhs.name) for r in rbar.rules if r.id not in source_ids}
    bad = [f"rbar {t} present={t in have} query={t in want}" for t in sorted(want ^ have)]
    for r in rbar.rules:
        if r.id not in source_ids and r.accepting != (r.label == DOLLAR):
            bad.append(f"rbar {r.id} has the wrong accepting flag")
    pnet = par_brs_to_net(rpar)
    have_seq = {(r.lhs.name, r.label, r.rhs.name) for r in rseq.rules if r.id not in source_ids}
    want_seq = set()
    for x in sorted(b.vars):
        for y in sorted(b.vars):
            if flagged_coverability(pnet, pnet.unit(x), pnet.unit(y), CoverMode.NONE_ACCEPTING_NON_NULL).is_yes:
                want_seq.add((x, SHARP, y))
            if flagged_coverability(pnet, pnet.unit(x), pnet.unit(y), CoverMode.ACCEPTING_SEEN).is_yes:
                want_seq.add((x, DOLLAR, y))
    bad += [f"rseq {t} present={t in have_seq} query={t in want_seq}" for t in sorted(want_seq ^ have_seq)]
    return bad


def synthesized_counts(bundle) -> tuple[int, int]:
    """``(#/$ rules in the parallel part, flag rules)``."""
    from prsbuchi.saturate import DOLLAR, FLAG_ACC, FLAG_NACC, SHARP

    src = {r.id for r in bundle.source.rules}
    new = [r for r in bundle.rpar.rules if r.id not in src]
    return (sum(r.label in (SHARP, DOLLAR) for r in new), sum(r.label in (FLAG_ACC, FLAG_NACC) for r in new))


def random_normal_form(rng: random.Random):
    """A small random system in normal form over X, Y, Z, W with one action."""
    vs = ["X", "Y", "Z", "W"]
    rules = []
    for i in range(rng.randint(1, 6)):
        acc = "accepting " if rng.random() < 0.3 else ""
        x, y, z = (rng.choice(vs) for _ in range(3))
        form = rng.choice(["push", "pop", "rename", "erase", "spawn", "join"])
        lhs, rhs = {
            "push": (x, f"{y}.({z})"), "pop": (f"{x}.({y})", z), "rename": (x, y), "erase": (x, "eps"),
            "spawn": (x, f"{y} || {z}"), "join": (f"{x} || {y}", z),
        }[form]
        rules.append(f"{acc}rule r{i + 1}: {lhs} -a-> {rhs};")
    return B(" ".join(rules))


# -- engine versus oracle ------------------------------------------------------------------


def pattern_ok(b, w, problem: int) -> bool:
    pre, pump = w.accepting_in_prefix(b), w.accepting_in_pump(b)
    if problem == 1:
        return pump >= 1
    if problem == 2:
        return pre == 0 and pump == 0
    return pre >= 1 and pump == 0


def compare_with_oracle(b, x: str, depth: int = 12, budget: int = 20_000) -> list[dict]:
    """One row per problem: engine verdict, oracle outcome and the consistency checks."""
    from prsbuchi.checker import decide_problem
    from prsbuchi.decision import Verdict
    from prsbuchi.oracle import explore, find_witness, replay
    from prsbuchi.saturate import decompose

    bundle = decompose(b)
    frag = explore(b, x, depth, budget)
    rows = []
    for p in (1, 2, 3):
        pv = decide_problem(bundle, x, p)
        lw = find_witness(b, x, p, frag=frag)
        problems = []
        if lw is not None and pv.verdict is Verdict.NO:
            problems.append("oracle witness but engine No")
        if lw is None and frag.saturated and pv.verdict is Verdict.YES:
            problems.append("finite LTS without witness but engine Yes")
        if pv.verdict is Verdict.YES:
            w = pv.witness
            if w is None:
                problems.append("Yes without witness")
            elif not replay(b, w, 3) or not pattern_ok(b, w, p):
                problems.append("engine witness does not replay with the right pattern")
        if lw is not None and (not replay(b, lw, 3) or not pattern_ok(b, lw, p)):
            problems.append("oracle witness does not replay with the right pattern")
        rows.append({"problem": p, "engine": pv.verdict, "oracle": lw is not None,
                     "saturated": frag.saturated, "problems": problems})
    return rows


# -- context closure and sequential pumping replays -----------------------------------------


def _replay_system(rng: random.Random):
    vs = ["X", "Y", "Z"]
    rules = []
    for i in range(rng.randint(1, 4)):
        lhs = rng.choice(vs + ["X || Y"])
        rhs = rng.choice(vs + ["eps", "X || Z", f"{rng.choice(vs)}.({rng.choice(vs)})"])
        rules.append(f"rule r{i}: {lhs} -a-> {rhs};")
    return B(" ".join(rules), vars="X, Y, Z", alphabet="a")


def _random_derivation(rng, b, t, n):
    from prsbuchi.brs import successors

    steps = []
    for _ in range(n):
        succ = successors(t, b)
        if not succ:
            break
        rid, _, t = rng.choice(succ)
        steps.append((rid, t))
    return steps, t


def _reaches(b, start, rules, goal) -> bool:
    from prsbuchi.brs import successors

    layer = {start}
    for rid in rules:
        layer = {u for t in layer for r, _, u in successors(t, b) if r == rid}
    return goal in layer


def context_closure_replays(n: int, seed: int) -> int:
    """Lift ``n`` random derivations into enclosing terms; returns how many replayed."""
    from prsbuchi.brs import successors
    from prsbuchi.terms import substitute, subterms

    small = sorted(all_terms(4), key=lambda t: t.key)
    rng = random.Random(seed)
    done = passed = 0
    while done < n:
        b = _replay_system(rng)
        t = rng.choice(small[1:60])
        steps, end = _random_derivation(rng, b, t, rng.randint(1, 4))
        if not steps:
            continue
        s = rng.choice([u for u in small if t in subterms(u)] or [t])
        ok = True
        for s2 in substitute(s, t, end):
            cur, inner = s, t
            for rid, res in steps:
                nxt = [u for r, _, u in successors(cur, b) if r == rid and u in substitute(cur, inner, res)]
                if not nxt:
                    ok = False
                    break
                cur, inner = nxt[0], res
            ok = ok and _reaches(b, s, [r for r, _ in steps], s2)
        passed += ok
        done += 1
    return passed


def sequential_pumping_replays(n: int, seed: int) -> int:
    """Lift ``n`` derivations from ``last(t)`` to ``t`` by composition; returns how many replayed."""
    from prsbuchi.brs import derivation_from_rules
    from prsbuchi.terms import EPS, atom, compose, is_seq_term, last

    seqs = [u for u in sorted(all_terms(4), key=lambda t: t.key) if u != EPS and is_seq_term(u)]
    rng = random.Random(seed)
    done = passed = 0
    while done < n:
        b = _replay_system(rng)
        t = rng.choice(seqs)
        steps, end = _random_derivation(rng, b, atom(last(t)), rng.randint(1, 4))
        if not steps or not all(r != EPS and is_seq_term(r) for _, r in steps):
            continue
        d = derivation_from_rules(b, t, [(rid, compose(t, res)) for rid, res in steps])
        passed += d is not None and d.end == compose(t, end)
        done += 1
    return passed
