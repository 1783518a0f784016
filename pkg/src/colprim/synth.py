"""Positive-column words: greedy synthesis, exhaustive search, in-tree shortcut."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Optional

import numpy as np

from .matset import (MatrixSet, Word, dominates, mask_indices, pattern_product,
                     positive_column)
from .pairgraph import Decision, build_pair_digraph, decide_column_primitive, pair

DEFAULT_MAX_N = 6
DEFAULT_BUDGET = 2_000_000


class NotColumnPrimitive(ValueError):
    def __init__(self, blocking=()):
        self.blocking = tuple(blocking)
        labels = ", ".join("{" + v.label() + "}" for v in self.blocking[:5])
        super().__init__(f"set is not column-primitive (blocking pairs: {labels})")


class NotPositiveDiagonal(ValueError):
    pass


class StateSpaceExceeded(RuntimeError):
    def __init__(self, budget: int, detail: str = ""):
        self.budget = budget
        super().__init__(detail or f"more than {budget} distinct zero patterns")


def length_bounds(n: int) -> dict[str, int]:
    """Word-length bounds for an n-state set.

    ``pin_frankl`` is the proven bound (n^3 - n)/6, ``cerny_conjecture`` the
    conjectured (n - 1)^2, and ``greedy_guarantee`` what :func:`synthesize_word`
    can promise: at most n - 1 merges, each along a shortest path in the
    pair digraph, which visits at most n(n+1)/2 - 1 edges.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return {
        "pin_frankl": (n ** 3 - n) // 6,
        "cerny_conjecture": (n - 1) ** 2,
        "greedy_guarantee": (n - 1) * (n * (n + 1) // 2 - 1),
    }


# -- selections (binary stochastic matrices dominated by the letters) --------

def selection_matrix(selection: tuple[int, ...]) -> np.ndarray:
    n = len(selection)
    out = np.zeros((n, n))
    out[np.arange(n), np.asarray(selection) - 1] = 1.0
    return out


def compose_selections(selections) -> tuple[int, ...]:
    """Where each state ends up after following the selections left to right."""
    n = len(selections[0])
    return tuple(
        reduce(lambda i, s: s[i - 1], selections, start)
        for start in range(1, n + 1))


def extract_selections(word: Word, mset: MatrixSet, column: int) -> tuple[tuple[int, ...], ...]:
    """Binary stochastic factors dominated by ``word`` whose product has
    ``column`` positive.

    Works backwards: ``alive[t]`` is the set of states that, read from
    position ``t`` onward, can still reach ``column``.  Each state picks its
    smallest successor that stays alive (or its smallest successor at all).
    Raises ``ValueError`` if ``column`` is not positive for ``word``.
    """
    rows = [mset.pattern(k).rows for k in word]
    alive = [0] * (len(rows) + 1)
    alive[-1] = 1 << (column - 1)
    for t in range(len(rows) - 1, -1, -1):
        alive[t] = sum(1 << i for i, r in enumerate(rows[t]) if r & alive[t + 1])
    if alive[0] != (1 << mset.n) - 1:
        raise ValueError(f"column {column} is not positive for word {word}")
    out = []
    for t, layer in enumerate(rows):
        sel = []
        for r in layer:
            good = r & alive[t + 1]
            choice = good if good else r
            sel.append((choice & -choice).bit_length())
        out.append(tuple(sel))
    return tuple(out)


def check_selections(word: Word, mset: MatrixSet, selections, column: int) -> bool:
    """Each factor is dominated by its letter and the product syncs on ``column``."""
    if len(selections) != len(word):
        return False
    for k, s in zip(word, selections):
        if not dominates(mset.matrix(k), selection_matrix(s)):
            return False
    return set(compose_selections(selections)) == {column}


# -- greedy synthesis --------------------------------------------------------

@dataclass(frozen=True)
class SynthesisResult:
    word: Word
    column: int
    selections: tuple[tuple[int, ...], ...]
    length_bound_used: int

    @property
    def length(self) -> int:
        return len(self.word)


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length()


def synthesize_word(mset: MatrixSet, decision: Optional[Decision] = None) -> SynthesisResult:
    """Build a positive-column word by merging pairs of active states.

    The active set starts as all states.  Each round takes the two smallest
    active states and follows a stored shortest merging path for that pair;
    other states follow their smallest positive successor.  The active set
    shrinks by at least one per round, so the word has length at most
    ``length_bounds(n)["greedy_guarantee"]``.
    """
    if decision is None:
        decision = decide_column_primitive(build_pair_digraph(mset))
    if not decision.primitive:
        raise NotColumnPrimitive(decision.blocking)

    n = mset.n
    active = set(range(1, n + 1))
    letters: list[int] = []
    selections: list[tuple[int, ...]] = []
    while len(active) > 1:
        a, b = sorted(active)[:2]
        before = len(active)
        for letter, nxt in decision.path(pair(a, b)):
            rows = mset.pattern(letter).rows
            if rows[a - 1] >> (nxt.lo - 1) & 1 and rows[b - 1] >> (nxt.hi - 1) & 1:
                a2, b2 = nxt.lo, nxt.hi
            else:
                a2, b2 = nxt.hi, nxt.lo
            sel = tuple(a2 if i == a else b2 if i == b else _lowest(rows[i - 1])
                        for i in range(1, n + 1))
            letters.append(letter)
            selections.append(sel)
            active = {sel[i - 1] for i in active}
            a, b = a2, b2
        assert len(active) < before
    if not letters:
        # n == 1: every 1x1 member is positive
        letters, selections = [1], [(1,)]

    word = Word(tuple(letters))
    final = next(iter(active))
    column = positive_column(pattern_product(word, mset))
    if column != final:
        # report the smallest positive column; re-derive a witness for it
        selections = list(extract_selections(word, mset, column))
    return SynthesisResult(word, column, tuple(selections),
                           length_bounds(n)["greedy_guarantee"])


# -- exhaustive shortest word ------------------------------------------------

def _image_fn(rows: tuple[int, ...], n: int) -> Callable[[int], int]:
    if n <= 12:
        table = [0] * (1 << n)
        for mask in range(1, 1 << n):
            low = mask & -mask
            table[mask] = table[mask ^ low] | rows[low.bit_length() - 1]
        return table.__getitem__
    cache: dict[int, int] = {}

    def image(mask: int) -> int:
        out = cache.get(mask)
        if out is None:
            out = 0
            for j in mask_indices(mask):
                out |= rows[j]
            cache[mask] = out
        return out
    return image


def shortest_word_bruteforce(mset: MatrixSet, max_len: Optional[int] = None,
                             max_n: int = DEFAULT_MAX_N,
                             budget: int = DEFAULT_BUDGET) -> Optional[tuple[Word, int]]:
    """Breadth-first search over reachable zero patterns.

    Products are extended one letter at a time and deduplicated by pattern,
    so the first positive-column pattern found belongs to a shortest word.
    Returns ``(word, smallest positive column)`` or None once the pattern
    semigroup (or ``max_len``) is exhausted.
    """
    n = mset.n
    if n > max_n:
        raise StateSpaceExceeded(budget, f"dimension {n} exceeds max_n={max_n}")
    images = [_image_fn(p.rows, n) for p in mset.patterns]
    seen = set()
    frontier = deque()
    for k, p in enumerate(mset.patterns, start=1):
        if p.rows in seen:
            continue
        seen.add(p.rows)
        col = reduce(int.__and__, p.rows)
        if col:
            return Word((k,)), _lowest(col)
        frontier.append((p.rows, (k,)))

    length = 1
    while frontier and (max_len is None or length < max_len):
        nxt = deque()
        for rows, w in frontier:
            for k, image in enumerate(images, start=1):
                q = tuple(image(r) for r in rows)
                if q in seen:
                    continue
                seen.add(q)
                if len(seen) > budget:
                    raise StateSpaceExceeded(budget)
                col = reduce(int.__and__, q)
                if col:
                    return Word(w + (k,)), _lowest(col)
                nxt.append((q, w + (k,)))
        frontier = nxt
        length += 1
    return None


# -- positive-diagonal shortcut ----------------------------------------------

@dataclass(frozen=True)
class InTreeResult:
    primitive: bool
    root: Optional[int] = None
    word: Optional[Word] = None
    parent: Optional[dict[int, tuple[int, int]]] = None


def intree_decide(mset: MatrixSet) -> InTreeResult:
    """Column-primitivity test for sets whose members have positive diagonals.

    Such a set is column-primitive iff the union digraph (edge i -> j when
    some member has a positive (i, j) entry) has a root reachable from every
    vertex.  The word is built from a BFS tree towards that root: letters
    for the deepest tree edges are read first, one letter per distinct
    (depth, letter) group, so its length is at most n - 1.  The diagonal lets
    each state wait until its own tree edge comes up.
    """
    if not mset.positive_diagonal:
        raise NotPositiveDiagonal("intree_decide needs every diagonal entry positive")
    n = mset.n
    if n == 1:
        return InTreeResult(True, 1, Word((1,)), {})

    into: dict[int, list[tuple[int, int]]] = {j: [] for j in range(1, n + 1)}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            letters = [k for k in range(1, mset.m + 1)
                       if mset.pattern(k).rows[i - 1] >> (j - 1) & 1]
            if letters:
                into[j].append((i, letters[0]))

    for root in range(1, n + 1):
        depth = {root: 0}
        parent: dict[int, tuple[int, int]] = {}
        queue = deque([root])
        while queue:
            j = queue.popleft()
            for i, letter in into[j]:
                if i not in depth:
                    depth[i] = depth[j] + 1
                    parent[i] = (j, letter)
                    queue.append(i)
        if len(depth) == n:
            break
    else:
        return InTreeResult(False)

    letters = []
    for d in range(max(depth.values()), 0, -1):
        letters.extend(sorted({parent[i][1] for i in parent if depth[i] == d}))
    word = Word(tuple(letters))
    if not pattern_product(word, mset).is_positive_column(root):
        raise AssertionError(f"in-tree word {word} failed to make column {root} positive")
    return InTreeResult(True, root, word, parent)
