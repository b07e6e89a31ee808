"""Decision procedures on nets: coverability, exact reachability, Karp-Miller, infinite runs.

Every procedure returns a three-valued :class:`Decision`. ``No`` is only
produced from a complete argument: exhaustive exploration of a bounded
state space, a backward coverability fixpoint, state-equation
infeasibility, or a Karp-Miller coverability graph without a suitable cycle.
"""
from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from ..decision import Decision, no, unknown, yes
from ..graphs import RunMode, lasso, non_acc_subgraph
from . import kernel as K
from .net import (
    Net,
    accepting_seen_product,
    non_accepting_subnet,
    non_null_non_accepting_product,
)

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 200_000


class ReachMode(enum.Enum):
    ANY = "Any"
    ACCEPTING_SEEN = "AcceptingSeen"
    NONE_ACCEPTING = "NoneAccepting"


class CoverMode(enum.Enum):
    ACCEPTING_SEEN = "AcceptingSeen"
    NONE_ACCEPTING_NON_NULL = "NoneAcceptingAndNonNull"


@dataclass(frozen=True)
class FiringSequence:
    """Transition indices of the queried net, fired from ``start`` to ``end``."""

    start: tuple
    transitions: tuple
    end: tuple

    def origins(self, net: Net) -> list[str]:
        return [net.transitions[i].origin for i in self.transitions]


@dataclass(frozen=True)
class RunWitness:
    """``prefix`` from ``start`` to ``m``, then ``pump`` from ``m`` to some ``m' >= m``."""

    start: tuple
    prefix: tuple
    pump: tuple

    def origins(self, net: Net) -> tuple[list[str], list[str]]:
        return ([net.transitions[i].origin for i in self.prefix],
                [net.transitions[i].origin for i in self.pump])


def fire_sequence(net: Net, m: tuple, seq) -> tuple | None:
    for ti in seq:
        t = net.transitions[ti]
        m = K.fire(m, t.pre, t.post)
        if m is None:
            return None
    return m


def replay_run(net: Net, w: RunWitness, pumps: int = 3) -> bool:
    """Fire the prefix, then the pump ``pumps`` times, each copy covering its start."""
    m = fire_sequence(net, w.start, w.prefix)
    if m is None:
        return False
    for _ in range(pumps):
        nxt = fire_sequence(net, m, w.pump)
        if nxt is None or not K.leq(m, nxt):
            return False
        m = nxt
    return True


# -- forward exploration --------------------------------------------------------


@dataclass
class Exploration:
    bounded: bool | None  # None: budget exhausted before a conclusion
    parent: dict  # marking -> (predecessor, transition) or None for the root
    edges: list  # (src, transition, dst) for every expanded node
    found: tuple | None = None

    def path_to(self, m: tuple) -> list[int]:
        out = []
        while self.parent[m] is not None:
            prev, ti = self.parent[m]
            out.append(ti)
            m = prev
        out.reverse()
        return out


def explore(net: Net, init: tuple, budget: int = DEFAULT_NODE_BUDGET, target: tuple | None = None,
            stop_on_unbounded: bool = True) -> Exploration:
    """Breadth-first reachability with an ancestor strict-cover test.

    A strictly covered ancestor on a tree path proves unboundedness; a
    finished exploration proves boundedness.
    """
    pres, posts = net.pres, net.posts
    parent: dict = {init: None}
    edges: list = []
    queue = deque([init])
    unbounded = False
    if target is not None and init == target:
        return Exploration(None, parent, edges, init)
    while queue:
        m = queue.popleft()
        for ti, m2 in K.successors(m, pres, posts):
            edges.append((m, ti, m2))
            if m2 in parent:
                continue
            parent[m2] = (m, ti)
            if target is not None and m2 == target:
                return Exploration(None, parent, edges, m2)
            if not unbounded:
                a = m
                while a is not None:
                    if a != m2 and K.leq(a, m2):
                        unbounded = True
                        break
                    p = parent[a]
                    a = p[0] if p else None
                if unbounded and stop_on_unbounded:
                    return Exploration(False, parent, edges)
            if len(parent) >= budget:
                return Exploration(False if unbounded else None, parent, edges)
            queue.append(m2)
    return Exploration(True, parent, edges)


def is_bounded(net: Net, init: tuple) -> bool:
    exp = explore(net, init, budget=10**9)
    return bool(exp.bounded)


def reachable_markings(net: Net, init: tuple, budget: int = DEFAULT_NODE_BUDGET) -> set | None:
    exp = explore(net, init, budget=budget)
    return set(exp.parent) if exp.bounded else None


# -- coverability -----------------------------------------------------------------


def coverability(net: Net, init: tuple, target: tuple) -> Decision:
    """Backward fixpoint over upward-closed sets; always definite."""
    if K.leq(target, init):
        return yes(FiringSequence(init, (), init))
    pres, posts = net.pres, net.posts
    basis = [target]
    parent: dict = {target: None}
    frontier = [target]
    while frontier:
        new = []
        alive = set(basis)
        for m in frontier:
            if m not in alive:
                continue
            for ti in range(len(pres)):
                p = K.pre_image(m, pres[ti], posts[ti])
                if p in parent:
                    continue
                if K.insert_minimal(basis, p):
                    parent[p] = (ti, m)
                    new.append(p)
                    if K.leq(p, init):
                        return yes(_rebuild_cover(net, init, p, parent))
        frontier = new
    return no("backward coverability fixpoint")


def _rebuild_cover(net: Net, init: tuple, b: tuple, parent: dict) -> FiringSequence:
    cur, seq = init, []
    while parent[b] is not None:
        ti, b = parent[b]
        t = net.transitions[ti]
        cur = K.fire(cur, t.pre, t.post)
        seq.append(ti)
    return FiringSequence(init, tuple(seq), cur)


def _lift_sequence(fs: FiringSequence, origin: list[int], net: Net, init: tuple) -> FiringSequence:
    seq = tuple(origin[i] for i in fs.transitions)
    return FiringSequence(init, seq, fire_sequence(net, init, seq))


def flagged_coverability(net: Net, init: tuple, target: tuple, mode: CoverMode) -> Decision:
    if mode is CoverMode.ACCEPTING_SEEN:
        prod, origin = accepting_seen_product(net)
        flags_init, flags_target = (1, 0), (0, 1)
    else:
        prod, origin = non_null_non_accepting_product(net)
        flags_init, flags_target = (1, 0), (0, 1)
    d = coverability(prod, tuple(init) + flags_init, tuple(target) + flags_target)
    if d.is_yes:
        return yes(_lift_sequence(d.witness, origin, net, init))
    return d


# -- exact reachability -------------------------------------------------------------


def state_equation_infeasible(net: Net, init: tuple, target: tuple) -> bool:
    """True iff ``init + C x = target`` has no non-negative integer solution."""
    n_t = len(net.transitions)
    delta = np.array(target, dtype=float) - np.array(init, dtype=float)
    if n_t == 0:
        return bool(np.any(delta != 0))
    c_mat = np.array([[t.post[p] - t.pre[p] for t in net.transitions] for p in range(len(net.places))],
                     dtype=float)
    res = milp(np.zeros(n_t), constraints=LinearConstraint(c_mat, delta, delta),
               integrality=np.ones(n_t), bounds=Bounds(0, np.inf))
    return res.status == 2


def exact_reachability(net: Net, init: tuple, target: tuple, mode: ReachMode = ReachMode.ANY,
                       budget: int = DEFAULT_NODE_BUDGET) -> Decision:
    init, target = tuple(init), tuple(target)
    if mode is ReachMode.ANY:
        pnet, origin, pi, pt = net, list(range(len(net.transitions))), init, target
    elif mode is ReachMode.ACCEPTING_SEEN:
        pnet, origin = accepting_seen_product(net)
        pi, pt = init + (1, 0), target + (0, 1)
    else:
        pnet, origin = non_accepting_subnet(net)
        pi, pt = init, target

    def found(exp: Exploration) -> Decision:
        fs = FiringSequence(pi, tuple(exp.path_to(exp.found)), exp.found)
        return yes(_lift_sequence(fs, origin, net, init))

    if pi == pt:
        return yes(FiringSequence(init, (), init))
    exp = explore(pnet, pi, budget=budget, target=pt)
    if exp.found is not None:
        return found(exp)
    if exp.bounded:
        return no("bounded state space exhausted")
    if state_equation_infeasible(pnet, pi, pt):
        return no("state equation infeasible")
    if coverability(pnet, pi, pt).is_no:
        return no("target not coverable")
    if exp.bounded is False:
        exp = explore(pnet, pi, budget=budget, target=pt, stop_on_unbounded=False)
        if exp.found is not None:
            return found(exp)
    return unknown(f"unbounded net, target not found within {budget} markings")


# -- Karp-Miller ----------------------------------------------------------------------


@dataclass(frozen=True)
class KMNode:
    marking: tuple
    parent: int | None
    transition: int | None


def karp_miller(net: Net, init: tuple, budget: int | None = None) -> list[KMNode]:
    """Karp-Miller coverability tree as a parent-linked node list (root first)."""
    pres, posts = net.pres, net.posts
    nodes = [KMNode(tuple(init), None, None)]
    stack = [0]
    while stack:
        i = stack.pop()
        m = nodes[i].marking
        ancestors = []
        j = nodes[i].parent
        while j is not None:
            ancestors.append(nodes[j].marking)
            j = nodes[j].parent
        if m in ancestors:
            continue
        chain = ancestors[::-1] + [m]
        for ti in range(len(pres)):
            m2 = K.omega_fire(m, pres[ti], posts[ti])
            if m2 is None:
                continue
            m2 = K.accelerate(m2, chain)
            nodes.append(KMNode(m2, i, ti))
            stack.append(len(nodes) - 1)
            if budget is not None and len(nodes) > budget:
                raise RuntimeError("Karp-Miller budget exhausted")
    return nodes


def km_is_bounded(net: Net, init: tuple) -> bool:
    return all(K.OMEGA not in n.marking for n in karp_miller(net, init))


def km_graph(net: Net, init: tuple, budget: int = DEFAULT_NODE_BUDGET) -> nx.MultiDiGraph | None:
    """Coverability graph over distinct omega-markings; every run of the net is a path in it."""
    pres, posts = net.pres, net.posts
    g = nx.MultiDiGraph()
    root = tuple(init)
    g.add_node(root)
    chains = {root: (root,)}
    queue = deque([root])
    while queue:
        m = queue.popleft()
        for ti in range(len(pres)):
            m2 = K.omega_fire(m, pres[ti], posts[ti])
            if m2 is None:
                continue
            m2 = K.accelerate(m2, chains[m])
            if m2 not in chains:
                chains[m2] = chains[m] + (m2,)
                g.add_node(m2)
                queue.append(m2)
                if len(chains) > budget:
                    return None
            g.add_edge(m, m2, key=ti, t=ti, acc=net.transitions[ti].accepting)
    return g


# -- infinite runs ------------------------------------------------------------------------


def _graph(net: Net, edges) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for s, ti, d in edges:
        g.add_edge(s, d, key=ti, t=ti, acc=net.transitions[ti].accepting)
    return g


def _repetitive_vector(net: Net, tis: set, need_accepting: bool) -> bool:
    """Is there ``x >= 0`` over ``tis``, ``x != 0``, with ``C x >= 0`` (and accepting mass if asked)?"""
    tis = sorted(tis)
    if not tis:
        return False
    acc = np.array([1.0 if net.transitions[t].accepting else 0.0 for t in tis])
    if need_accepting and not acc.any():
        return False
    c_mat = np.array([[net.transitions[t].post[p] - net.transitions[t].pre[p] for t in tis]
                      for p in range(len(net.places))], dtype=float)
    rows = [-c_mat, -np.ones((1, len(tis)))]
    rhs = [np.zeros(len(net.places)), -np.ones(1)]
    if need_accepting:
        rows.append(-acc[None, :])
        rhs.append(-np.ones(1))
    res = linprog(np.zeros(len(tis)), A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                  bounds=[(0, None)] * len(tis), method="highs")
    return res.status == 0


def _km_candidates(net: Net, kg: nx.MultiDiGraph, root, mode: RunMode) -> list:
    """Strongly connected parts of the coverability graph that may host the run's tail.

    An infinite run eventually stays inside one component and repeats a
    segment whose Parikh vector is a repetitive vector over the component's
    internal transitions; components without one are discarded.
    """
    if mode is RunMode.ACCEPTING_INFINITELY_OFTEN:
        g, starts = kg, {root}
    else:
        g = non_acc_subgraph(kg)
        if mode is RunMode.NO_ACCEPTING:
            starts = {root}
        else:
            reach = nx.descendants(kg, root) | {root}
            starts = {v for u, v, d in kg.edges(reach, data=True) if d["acc"]}
    reach_g = set()
    for s0 in starts:
        reach_g |= nx.descendants(g, s0) | {s0}
    out = []
    for comp in nx.strongly_connected_components(g.subgraph(reach_g)):
        tis = {d["t"] for u, v, d in g.subgraph(comp).edges(data=True)}
        if _repetitive_vector(net, tis, mode is RunMode.ACCEPTING_INFINITELY_OFTEN):
            out.append(comp)
    return out


def _self_covering(net: Net, init: tuple, mode: RunMode, budget: int):
    """Forward search for ``a ->* m -t-> m'`` with ``a <= m'`` on a BFS tree path.

    Search states pair a marking with an accepting-seen bit, so a marking
    reached both before and after an accepting step is explored twice.
    """
    if mode is RunMode.FINITELY_MANY_NON_NULL_ACCEPTING:
        return _after_accepting(net, init, budget)
    pres, posts = net.pres, net.posts
    acc = [t.accepting for t in net.transitions]
    skip_acc = mode is RunMode.NO_ACCEPTING
    start = (init, False)
    # state -> (parent state, transition, depth, depth reached by the last accepting step or -1)
    info: dict = {start: (None, None, 0, -1)}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        m, seen = node
        _, _, depth, last_acc = info[node]
        for ti, m2 in K.successors(m, pres, posts):
            if skip_acc and acc[ti]:
                continue
            a = node
            while a is not None:
                pa, _, da, la = info[a]
                if K.leq(a[0], m2):
                    seg_has_acc = acc[ti] or last_acc > da
                    if mode is RunMode.ACCEPTING_INFINITELY_OFTEN:
                        ok = seg_has_acc
                    elif mode is RunMode.NO_ACCEPTING:
                        ok = True
                    else:
                        ok = not seg_has_acc and la != -1
                    if ok:
                        return _tree_path(info, a), _tree_path(info, node, stop=a) + [ti]
                a = pa
            nxt = (m2, seen or acc[ti])
            if nxt not in info and len(info) < budget:
                info[nxt] = (node, ti, depth + 1, depth + 1 if acc[ti] else last_acc)
                queue.append(nxt)
    return None


def _after_accepting(net: Net, init: tuple, budget: int):
    """Reach a marking right after an accepting firing, then search a silent self-covering run from it.

    The continuation depends only on the marking, so each post-accepting
    marking is tried once, in breadth-first order.
    """
    pres, posts = net.pres, net.posts
    parent: dict = {init: None}
    queue = deque([init])
    tried: set = set()
    spent = 0
    sub_budget = max(1_000, budget // 20)
    while queue and spent < budget:
        m = queue.popleft()
        for ti, m2 in K.successors(m, pres, posts):
            if net.transitions[ti].accepting and m2 not in tried:
                tried.add(m2)
                res = _self_covering(net, m2, RunMode.NO_ACCEPTING, sub_budget)
                spent += sub_budget if res is None else 0
                if res is not None:
                    prefix = _plain_path(parent, m) + [ti]
                    return prefix + list(res[0]), list(res[1])
            if m2 not in parent and len(parent) < budget:
                parent[m2] = (m, ti)
                queue.append(m2)
    return None


def _plain_path(parent: dict, m) -> list[int]:
    out = []
    while parent[m] is not None:
        m, ti = parent[m]
        out.append(ti)
    return out[::-1]


def _tree_path(info: dict, node, stop=None) -> list[int]:
    out = []
    while node != stop and info[node][0] is not None:
        parent, ti = info[node][0], info[node][1]
        out.append(ti)
        node = parent
    return out[::-1]


def infinite_run(net: Net, init: tuple, mode: RunMode, budget: int = DEFAULT_NODE_BUDGET) -> Decision:
    init = tuple(init)
    exp = explore(net, init, budget=budget)
    if exp.bounded:
        g = _graph(net, exp.edges)
        g.add_node(init)
        res = lasso(g, init, mode)
        if res is None:
            return no("bounded state space: no suitable cycle")
        return yes(RunWitness(init, tuple(res[0]), tuple(res[1])))
    kg = km_graph(net, init, budget=budget)
    if kg is not None and not _km_candidates(net, kg, init, mode):
        return no("no coverability-graph cycle admits a repetitive vector")
    res = _self_covering(net, init, mode, budget)
    if res is not None:
        return yes(RunWitness(init, tuple(res[0]), tuple(res[1])))
    return unknown(f"unbounded net, no self-covering sequence within {budget} markings")
