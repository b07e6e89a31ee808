"""Terms with node identities, so an occurrence can be followed across rewrite steps."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count

from .terms import EPS, Atom, Epsilon, Seq, Term, atom, par, seq


@dataclass(eq=False)
class Node:
    id: int
    kind: str  # "eps" | "atom" | "seq" | "par"
    name: str | None = None
    children: list = field(default_factory=list)
    parent: Node | None = None


class OccTree:
    """Mutable tree mirroring a canonical term.

    Factors of a Par node are ordered by ``(canonical key, node id)``, which
    agrees with the canonical factor order used by positions.
    """

    def __init__(self, t: Term) -> None:
        self._ids = count()
        self.root = self._build(t, None)
        self.nodes: dict[int, Node] = {}
        self._reindex()

    def _build(self, t: Term, parent: Node | None) -> Node:
        nid = next(self._ids)
        if isinstance(t, Epsilon):
            return Node(nid, "eps", parent=parent)
        if isinstance(t, Atom):
            return Node(nid, "atom", t.name, parent=parent)
        if isinstance(t, Seq):
            n = Node(nid, "seq", t.head, parent=parent)
            n.children = [self._build(t.tail, n)]
            return n
        n = Node(nid, "par", parent=parent)
        n.children = [self._build(f, n) for f in t.factors]
        return n

    def _reindex(self) -> None:
        self.nodes = {}
        stack = [self.root]
        while stack:
            n = stack.pop()
            self.nodes[n.id] = n
            for c in n.children:
                c.parent = n
                stack.append(c)

    def to_term(self, n: Node) -> Term:
        if n.kind == "eps":
            return EPS
        if n.kind == "atom":
            return atom(n.name)
        if n.kind == "seq":
            return seq(n.name, self.to_term(n.children[0]))
        return par(*(self.to_term(c) for c in n.children))

    def term(self) -> Term:
        return self.to_term(self.root)

    def ordered(self, n: Node) -> list[Node]:
        return sorted(n.children, key=lambda c: (self.to_term(c).key, c.id))

    def resolve(self, pos) -> Node | list[Node]:
        n = self.root
        for m in pos:
            if m[0] == "seq":
                if n.kind != "seq":
                    raise ValueError("position descends into a non-sequential node")
                n = n.children[0]
            elif m[0] == "par":
                if n.kind != "par":
                    raise ValueError("position descends into a non-parallel node")
                n = self.ordered(n)[m[1]]
            else:
                if n.kind != "par":
                    raise ValueError("factor selection on a non-parallel node")
                kids = self.ordered(n)
                return [kids[i] for i in m[1]]
        return n

    def _within(self, n: Node, target_id: int) -> bool:
        while n is not None:
            if n.id == target_id:
                return True
            n = n.parent
        return False

    def relative(self, aid: int, pos):
        """Locate a step at ``pos`` with respect to the ``X.(s)`` node ``aid``.

        Returns ``"outside"`` for a step not touching the node, ``None`` for a
        step that rewrites the node (or a region containing it), otherwise the
        position of the step relative to ``s``.
        """
        anchor = self.nodes[aid]
        n = self.root
        for k, m in enumerate(pos):
            if n.id == aid:
                return tuple(pos[k + 1:]) if m[0] == "seq" else None
            if m[0] == "seq":
                n = n.children[0]
            elif m[0] == "par":
                n = self.ordered(n)[m[1]]
            else:
                kids = self.ordered(n)
                hit = any(self._within(anchor, kids[i].id) for i in m[1])
                return None if hit else "outside"
            if not self._within(anchor, n.id) and not self._within(n, aid):
                return "outside"
        return None if self._within(anchor, n.id) else "outside"

    def apply(self, pos, rhs: Term) -> None:
        """Replace the region addressed by ``pos`` with a fresh copy of ``rhs``."""
        target = self.resolve(pos)
        if isinstance(target, list):
            host = target[0].parent
            gone = {c.id for c in target}
            host.children = [c for c in host.children if c.id not in gone]
            host.children.append(self._build(rhs, host))
        else:
            new = self._build(rhs, target.parent)
            if target.parent is None:
                self.root = new
            else:
                kids = target.parent.children
                kids[[c.id for c in kids].index(target.id)] = new
        self.root = self._canon(self.root)
        self.root.parent = None
        self._reindex()

    def _canon(self, n: Node) -> Node:
        if n.kind == "seq":
            c = self._canon(n.children[0])
            if c.kind == "eps":
                n.kind, n.children = "atom", []
            else:
                n.children = [c]
            return n
        if n.kind != "par":
            return n
        flat: list[Node] = []
        for c in n.children:
            c = self._canon(c)
            if c.kind == "eps":
                continue
            if c.kind == "par":
                flat.extend(c.children)
            else:
                flat.append(c)
        if not flat:
            return Node(n.id, "eps")
        if len(flat) == 1:
            return flat[0]
        n.children = flat
        return n
