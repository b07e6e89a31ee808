"""Lasso search on finite edge-labelled graphs.

Edges carry ``t`` (a transition index or rule id) and ``acc`` (accepting).
"""
from __future__ import annotations

import enum
from collections import deque

import networkx as nx


class RunMode(enum.Enum):
    ACCEPTING_INFINITELY_OFTEN = "AcceptingInfinitelyOften"
    NO_ACCEPTING = "NoAccepting"
    FINITELY_MANY_NON_NULL_ACCEPTING = "FinitelyManyNonNullAccepting"


def path(g: nx.MultiDiGraph, src, dst, allowed=None) -> list | None:
    """Edge labels along a shortest path, optionally restricted by edge predicate."""
    if src == dst:
        return []
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for _, v, data in g.out_edges(u, data=True):
            if v in prev or (allowed is not None and not allowed(data)):
                continue
            prev[v] = (u, data["t"])
            if v == dst:
                out = []
                while prev[v] is not None:
                    u2, ti = prev[v]
                    out.append(ti)
                    v = u2
                return out[::-1]
            queue.append(v)
    return None


def cycle_edge(g: nx.MultiDiGraph, nodes, want) -> tuple | None:
    """An edge lying on a cycle within ``nodes`` that satisfies ``want``."""
    sub = g.subgraph(nodes)
    for comp in nx.strongly_connected_components(sub):
        for u, v, data in sub.edges(comp, data=True):
            if v in comp and want(data):
                return u, v, data
    return None


def non_acc_subgraph(g: nx.MultiDiGraph) -> nx.MultiDiGraph:
    h = nx.MultiDiGraph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from((u, v, k, d) for u, v, k, d in g.edges(keys=True, data=True) if not d["acc"])
    return h


def lasso(g: nx.MultiDiGraph, root, mode: RunMode):
    """Labels ``(prefix, pump)`` of a lasso from ``root`` fitting ``mode``, or ``None``.

    The pump is a cycle, so on an exact state graph this decides the mode.
    """
    if root not in g:
        return None
    reach = nx.descendants(g, root) | {root}
    if mode is RunMode.ACCEPTING_INFINITELY_OFTEN:
        hit = cycle_edge(g, reach, lambda d: d["acc"])
        if hit is None:
            return None
        u, v, data = hit
        return path(g, root, u), [data["t"]] + path(g, v, u)
    h = non_acc_subgraph(g)
    if mode is RunMode.NO_ACCEPTING:
        reach_h = nx.descendants(h, root) | {root}
        hit = cycle_edge(h, reach_h, lambda d: True)
        if hit is None:
            return None
        u, v, data = hit
        return path(h, root, u), [data["t"]] + path(h, v, u)
    comps = [c for c in nx.strongly_connected_components(h) if h.subgraph(c).number_of_edges() > 0]
    if not comps:
        return None
    comp_of = {n: c for c in comps for n in c}
    can_reach = set(comp_of)
    queue = deque(can_reach)
    while queue:
        v = queue.popleft()
        for u, _ in h.in_edges(v):
            if u not in can_reach:
                can_reach.add(u)
                queue.append(u)
    for u, v, data in g.edges(reach, data=True):
        if not data["acc"] or v not in can_reach:
            continue
        c = next(n for n in bfs_order(h, v) if n in comp_of)
        u2, v2, d2 = cycle_edge(h, comp_of[c], lambda d: True)
        head = path(g, root, u) + [data["t"]] + path(h, v, c) + path(h, c, u2)
        return head, [d2["t"]] + path(h, v2, u2)
    return None


def bfs_order(g: nx.MultiDiGraph, src):
    yield src
    for _, v in nx.bfs_edges(g, src):
        yield v
