"""Digraph of pairs and the column-primitivity decision.

Nodes are unordered pairs of states with repetition, written ``(lo, hi)``
with ``lo <= hi``; ``lo == hi`` stands for a single state.  There is an edge
from ``{i1, i2}`` to ``{j1, j2}`` labelled ``k`` when ``A_k`` has positive
entries at ``(i1, j1)`` and ``(i2, j2)`` (either pairing).  A set is
column-primitive iff every strict pair can reach a singleton.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import NamedTuple

from .matset import MatrixSet, mask_indices


class PairNode(NamedTuple):
    lo: int
    hi: int

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def label(self) -> str:
        return str(self.lo) if self.is_singleton else f"{self.lo},{self.hi}"


class Edge(NamedTuple):
    src: PairNode
    dst: PairNode
    letter: int


def pair(i: int, j: int) -> PairNode:
    return PairNode(i, j) if i <= j else PairNode(j, i)


@dataclass(frozen=True)
class PairDigraph:
    n: int
    nodes: tuple[PairNode, ...]
    edges: tuple[Edge, ...]

    def successors(self) -> dict[PairNode, list[tuple[int, PairNode]]]:
        out = defaultdict(list)
        for e in self.edges:
            out[e.src].append((e.letter, e.dst))
        return out

    def predecessors(self) -> dict[PairNode, list[PairNode]]:
        out = defaultdict(list)
        for e in self.edges:
            out[e.dst].append(e.src)
        return out

    def to_dot(self, name: str = "pairs") -> str:
        """Graphviz source; nodes in lexicographic order, edges sorted."""
        lines = [f"digraph {name} {{"]
        for v in self.nodes:
            shape = "doublecircle" if v.is_singleton else "circle"
            lines.append(f'  "{v.label()}" [shape={shape}];')
        for e in self.edges:
            lines.append(
                f'  "{e.src.label()}" -> "{e.dst.label()}" [label="{e.letter}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_pair_digraph(mset: MatrixSet) -> PairDigraph:
    """All edges of the digraph of pairs, O(m n^4) edge tests."""
    n = mset.n
    nodes = tuple(PairNode(i, j) for i in range(1, n + 1) for j in range(i, n + 1))
    edges = set()
    for k in range(1, mset.m + 1):
        succ = [[j + 1 for j in mask_indices(r)] for r in mset.pattern(k).rows]
        for v in nodes:
            for j1 in succ[v.lo - 1]:
                for j2 in succ[v.hi - 1]:
                    edges.add(Edge(v, pair(j1, j2), k))
    return PairDigraph(n, nodes, tuple(sorted(edges)))


@dataclass(frozen=True)
class Decision:
    """Outcome of the reachability test.

    ``next_hop`` maps every pair that can merge to the first step of one
    shortest merging path: ``(letter, next pair)``.  Ties go to the smallest
    letter, then the smallest next pair.  ``blocking`` holds the strict
    pairs that never reach a singleton.
    """

    primitive: bool
    distance: dict[PairNode, int]
    next_hop: dict[PairNode, tuple[int, PairNode]]
    blocking: tuple[PairNode, ...]

    def path(self, v: PairNode) -> list[tuple[int, PairNode]]:
        """Shortest letter path from ``v`` down to a singleton."""
        if v not in self.distance:
            raise KeyError(f"{v} cannot reach a singleton")
        hops = []
        while not v.is_singleton:
            letter, v = self.next_hop[v]
            hops.append((letter, v))
        return hops

    def merging_word(self, v: PairNode) -> tuple[int, ...]:
        return tuple(letter for letter, _ in self.path(v))


def decide_column_primitive(g: PairDigraph) -> Decision:
    """Multi-source BFS on reversed edges from every singleton."""
    preds = g.predecessors()
    distance = {v: 0 for v in g.nodes if v.is_singleton}
    queue = deque(sorted(distance))
    while queue:
        v = queue.popleft()
        for u in preds.get(v, ()):
            if u not in distance:
                distance[u] = distance[v] + 1
                queue.append(u)

    next_hop = {}
    for src, hops in g.successors().items():
        d = distance.get(src)
        if not d:
            continue
        next_hop[src] = min((k, dst) for k, dst in hops if distance.get(dst) == d - 1)

    blocking = tuple(v for v in g.nodes if v not in distance)
    return Decision(not blocking, distance, next_hop, blocking)
