"""3-SAT to short positive-column words for positive-diagonal sets.

For a formula with v variables and c clauses the reduction builds 2v
matrices of size 1 + v + c, one per literal, in the order
X_1, not X_1, X_2, not X_2, ...  Each is the identity plus ones in the
first column at the literal's variable row and at the rows of the clauses
that the literal satisfies.  The formula is satisfiable iff the set has a
positive-column word of length at most v.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .matset import MatrixSet, Word, product, validate_set
from .synth import DEFAULT_BUDGET, StateSpaceExceeded, shortest_word_bruteforce

MAX_EXHAUSTIVE_VARS = 12


class MalformedDimacs(ValueError):
    def __init__(self, line: int, detail: str):
        self.line = line
        super().__init__(f"line {line}: {detail}")


class ClauseTooWide(ValueError):
    def __init__(self, clause: int, width: int):
        self.clause = clause
        super().__init__(f"clause {clause} has {width} literals; at most 3 allowed")


class BudgetExceeded(RuntimeError):
    pass


class Literal(NamedTuple):
    var: int
    positive: bool

    def satisfied_by(self, assignment) -> bool:
        return assignment[self.var - 1] == self.positive

    def __str__(self):
        return f"X{self.var}" if self.positive else f"~X{self.var}"


@dataclass(frozen=True)
class CnfFormula:
    v: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __post_init__(self):
        if self.v < 1:
            raise ValueError("formula needs at least one variable")
        for j, clause in enumerate(self.clauses, start=1):
            if len(clause) != 3:
                raise ValueError(f"clause {j} must have exactly 3 literals")
            for lit in clause:
                if not 1 <= lit.var <= self.v:
                    raise ValueError(f"clause {j}: variable {lit.var} out of range")

    @property
    def c(self) -> int:
        return len(self.clauses)

    @classmethod
    def from_ints(cls, v: int, clauses) -> "CnfFormula":
        """Build from DIMACS-style signed integers, padding short clauses."""
        out = []
        for j, clause in enumerate(clauses, start=1):
            clause = list(clause)
            if len(clause) > 3:
                raise ClauseTooWide(j, len(clause))
            if not clause:
                raise ValueError(f"clause {j} is empty")
            while len(clause) < 3:
                clause.append(clause[-1])
            out.append(tuple(Literal(abs(x), x > 0) for x in clause))
        return cls(v, tuple(out))

    def is_satisfied(self, assignment) -> bool:
        return all(any(lit.satisfied_by(assignment) for lit in clause)
                   for clause in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.v} {self.c}"]
        for clause in self.clauses:
            lines.append(" ".join(str(l.var if l.positive else -l.var) for l in clause) + " 0")
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    header = None
    clauses: list[list[int]] = []
    current: list[int] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise MalformedDimacs(lineno, f"bad problem line {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise MalformedDimacs(lineno, f"bad problem line {line!r}") from None
            continue
        if header is None:
            raise MalformedDimacs(lineno, "clause before problem line")
        for tok in line.split():
            try:
                x = int(tok)
            except ValueError:
                raise MalformedDimacs(lineno, f"bad literal {tok!r}") from None
            if abs(x) > header[0]:
                raise MalformedDimacs(lineno, f"variable {abs(x)} exceeds declared {header[0]}")
            if x == 0:
                if not current:
                    raise MalformedDimacs(lineno, "empty clause")
                if len(current) > 3:
                    raise ClauseTooWide(len(clauses) + 1, len(current))
                clauses.append(current)
                current = []
            else:
                current.append(x)
    if header is None:
        raise MalformedDimacs(last_line, "missing problem line")
    if current:
        raise MalformedDimacs(last_line, "last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise MalformedDimacs(last_line, f"declared {header[1]} clauses, found {len(clauses)}")
    return CnfFormula.from_ints(header[0], clauses)


@dataclass(frozen=True)
class ReductionSet:
    formula: CnfFormula
    mset: MatrixSet
    letter_map: tuple[Literal, ...]

    def letter(self, lit: Literal) -> int:
        return 2 * lit.var - (1 if lit.positive else 0)

    def word_for(self, assignment) -> Word:
        """One letter per variable, X_1's letter leftmost."""
        return Word(tuple(self.letter(Literal(i, bool(val)))
                          for i, val in enumerate(assignment, start=1)))

    def assignment_from(self, word: Word) -> Optional[tuple[bool, ...]]:
        """Read an assignment off a word that uses each variable exactly once."""
        chosen: dict[int, bool] = {}
        for k in word:
            lit = self.letter_map[k - 1]
            if chosen.get(lit.var, lit.positive) != lit.positive:
                return None
            chosen[lit.var] = lit.positive
        if len(chosen) != self.formula.v:
            return None
        return tuple(chosen[i] for i in range(1, self.formula.v + 1))

    def first_column_tail(self, letter: int) -> np.ndarray:
        return self.mset.matrix(letter)[1:, 0]

    def letter_map_document(self) -> dict:
        return {str(k): {"var": lit.var, "polarity": lit.positive}
                for k, lit in enumerate(self.letter_map, start=1)}


def reduce(formula: CnfFormula) -> ReductionSet:
    v, c = formula.v, formula.c
    n = 1 + v + c
    mats, names, letter_map = [], [], []
    for i in range(1, v + 1):
        for positive in (True, False):
            lit = Literal(i, positive)
            a = np.eye(n)
            a[i, 0] = 1.0
            for j, clause in enumerate(formula.clauses, start=1):
                if lit in clause:
                    a[v + j, 0] = 1.0
            mats.append(a)
            names.append(str(lit))
            letter_map.append(lit)
    return ReductionSet(formula, validate_set(mats, "general", names), tuple(letter_map))


def first_column_union_check(rset: ReductionSet, word: Word) -> bool:
    """Column 1 of the product is positive exactly where some factor's is."""
    col = product(word, rset.mset)[:, 0] > 0
    union = np.zeros(rset.mset.n, dtype=bool)
    for k in word:
        union |= rset.mset.matrix(k)[:, 0] > 0
    return bool(np.array_equal(col, union))


@dataclass(frozen=True)
class ReductionCheck:
    sat: bool
    assignment: Optional[tuple[bool, ...]]
    short_word_exists: bool
    word: Optional[Word]

    @property
    def agree(self) -> bool:
        return self.sat == self.short_word_exists

    def to_dict(self) -> dict:
        return {
            "sat": self.sat,
            "assignment": list(self.assignment) if self.assignment else None,
            "short_word_exists": self.short_word_exists,
            "word": str(self.word) if self.word else None,
            "word_length": len(self.word) if self.word else None,
            "agree": self.agree,
        }


def find_assignment(formula: CnfFormula) -> Optional[tuple[bool, ...]]:
    """Exhaustive search, False before True for each variable."""
    if formula.v > MAX_EXHAUSTIVE_VARS:
        raise BudgetExceeded(f"{formula.v} variables exceed the exhaustive limit "
                             f"of {MAX_EXHAUSTIVE_VARS}")
    for bits in itertools.product((False, True), repeat=formula.v):
        if formula.is_satisfied(bits):
            return bits
    return None


def verify_reduction(formula: CnfFormula, rset: Optional[ReductionSet] = None,
                     budget: int = DEFAULT_BUDGET) -> ReductionCheck:
    """Compare satisfiability with the existence of a length-<=v word.

    The two sides are computed independently: exhaustive assignment search
    on the formula, breadth-first pattern search on the matrices.
    """
    rset = rset or reduce(formula)
    assignment = find_assignment(formula)
    try:
        found = shortest_word_bruteforce(rset.mset, max_len=formula.v,
                                         max_n=rset.mset.n, budget=budget)
    except StateSpaceExceeded as exc:
        raise BudgetExceeded(str(exc)) from None
    word = found[0] if found else None
    return ReductionCheck(assignment is not None, assignment, found is not None, word)


def random_formula(rng: np.random.Generator, v: int, c: int) -> CnfFormula:
    clauses = []
    for _ in range(c):
        vars_ = rng.integers(1, v + 1, size=3)
        signs = rng.random(3) < 0.5
        clauses.append(tuple(Literal(int(x), bool(s)) for x, s in zip(vars_, signs)))
    return CnfFormula(v, tuple(clauses))


def dumps_letter_map(rset: ReductionSet) -> str:
    return json.dumps(rset.letter_map_document(), indent=2) + "\n"

