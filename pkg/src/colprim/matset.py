"""Matrix sets, words, and exact zero-pattern algebra.

States, letters and columns are 1-based everywhere in the public API so that
words read the same way they are written by hand (``Word.parse("11221")``).
A word is stored in written order ``(w_l, ..., w_1)``; its product is
``A[w_l] @ ... @ A[w_1]``, so the rightmost letter acts first on a state
vector while the leftmost letter is the first step when following a row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np

MODES = ("general", "stochastic", "binary", "positive_diagonal")
STOCHASTIC_TOL = 1e-9


class ValidationError(ValueError):
    """Raised when raw matrices do not describe a valid matrix set."""


class ShapeError(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class NegativeEntry(ValidationError):
    def __init__(self, matrix: int, row: int, col: int, value: float):
        self.matrix, self.row, self.col, self.value = matrix, row, col, value
        super().__init__(
            f"matrix {matrix}: negative entry {value!r} at ({row}, {col})")


class ZeroRow(ValidationError):
    def __init__(self, matrix: int, row: int):
        self.matrix, self.row = matrix, row
        super().__init__(f"matrix {matrix}: row {row} has no positive entry")


class RowSumViolation(ValidationError):
    def __init__(self, matrix: int, row: int, total: float):
        self.matrix, self.row, self.total = matrix, row, total
        super().__init__(f"matrix {matrix}: row {row} sums to {total!r}, not 1")


class NonBinaryEntry(ValidationError):
    def __init__(self, matrix: int, row: int, detail: str):
        self.matrix, self.row = matrix, row
        super().__init__(f"matrix {matrix}: row {row} {detail}")


class ZeroDiagonal(ValidationError):
    def __init__(self, matrix: int, index: int):
        self.matrix, self.index = matrix, index
        super().__init__(f"matrix {matrix}: diagonal entry {index} is zero")


def mask_indices(mask: int) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


@dataclass(frozen=True)
class ZeroPattern:
    """Boolean shadow of a nonnegative matrix.

    ``rows[i]`` is a bitmask whose bit ``j`` is set iff entry ``(i, j)``
    (0-based) is strictly positive.
    """

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ShapeError(f"expected {self.n} rows, got {len(self.rows)}")
        full = (1 << self.n) - 1
        for i, r in enumerate(self.rows):
            if r <= 0 or r & ~full:
                raise ValidationError(f"pattern row {i + 1} is empty or out of range")

    @classmethod
    def from_matrix(cls, a) -> "ZeroPattern":
        a = np.asarray(a)
        rows = tuple(
            sum(1 << int(j) for j in np.flatnonzero(row > 0)) for row in a)
        return cls(a.shape[0], rows)

    @classmethod
    def identity(cls, n: int) -> "ZeroPattern":
        return cls(n, tuple(1 << i for i in range(n)))

    @property
    def bits(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=bool)
        for i, r in enumerate(self.rows):
            out[i, mask_indices(r)] = True
        return out

    def image(self, mask: int) -> int:
        """Union of the rows selected by ``mask`` (successors of a state set)."""
        acc = 0
        for j in mask_indices(mask):
            acc |= self.rows[j]
        return acc

    def __matmul__(self, other: "ZeroPattern") -> "ZeroPattern":
        if other.n != self.n:
            raise ShapeError("dimension mismatch")
        return ZeroPattern(self.n, tuple(other.image(r) for r in self.rows))

    def column_mask(self) -> int:
        """Bitmask of the columns that are positive in every row."""
        return reduce(lambda x, y: x & y, self.rows)

    def is_positive_column(self, j: int) -> bool:
        return 1 <= j <= self.n and bool(self.column_mask() >> (j - 1) & 1)

    def __str__(self):
        return "\n".join(
            "".join("1" if r >> j & 1 else "0" for j in range(self.n))
            for r in self.rows)


@dataclass(frozen=True)
class Word:
    """Letters in written order; ``letters[-1]`` is applied to x first."""

    letters: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(k) for k in self.letters))
        if any(k < 1 for k in self.letters):
            raise ValueError(f"letters are 1-based, got {self.letters}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Accept ``"11221"`` (single-digit letters) or ``"1,1,2,2,1"``."""
        text = text.strip()
        if any(sep in text for sep in ", "):
            parts = [p for p in text.replace(",", " ").split() if p]
            return cls(tuple(int(p) for p in parts))
        if not text.isdigit():
            raise ValueError(f"cannot parse word {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @property
    def application_order(self) -> tuple[int, ...]:
        return self.letters[::-1]

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __str__(self):
        if all(k < 10 for k in self.letters):
            return "".join(map(str, self.letters))
        return ",".join(map(str, self.letters))


@dataclass(frozen=True, eq=False)
class MatrixSet:
    matrices: tuple[np.ndarray, ...]
    names: tuple[str, ...]
    mode: str
    stochastic: bool
    binary_stochastic: bool
    positive_diagonal: bool
    patterns: tuple[ZeroPattern, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.matrices)

    def __len__(self):
        return self.m

    def matrix(self, letter: int) -> np.ndarray:
        return self.matrices[letter - 1]

    def pattern(self, letter: int) -> ZeroPattern:
        return self.patterns[letter - 1]

    def check_word(self, word: Word) -> None:
        bad = [k for k in word if k > self.m]
        if bad:
            raise ValueError(f"letters {bad} out of range for a set of {self.m}")

    @property
    def flags(self) -> dict[str, bool]:
        return {
            "stochastic": self.stochastic,
            "binary_stochastic": self.binary_stochastic,
            "positive_diagonal": self.positive_diagonal,
        }


def _row_sums_ok(a: np.ndarray) -> bool:
    return bool(np.all(np.abs(a.sum(axis=1) - 1.0) <= STOCHASTIC_TOL))


def _is_binary_stochastic(a: np.ndarray) -> bool:
    return bool(np.all((a == 0) | (a == 1)) and np.all(a.sum(axis=1) == 1))


def validate_set(raw: Sequence, mode: str = "general",
                 names: Optional[Sequence[str]] = None) -> MatrixSet:
    """Check raw matrices against ``mode`` and return an immutable set.

    Every set must consist of square nonnegative matrices of a common size
    with no zero row. ``stochastic`` additionally requires unit row sums
    (within ``STOCHASTIC_TOL``), ``binary`` requires 0/1 entries with exactly
    one 1 per row, and ``positive_diagonal`` requires a positive diagonal.
    The returned flags are computed for every class regardless of mode.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if len(raw) == 0:
        raise ShapeError("matrix set is empty")
    mats = []
    n = None
    for k, r in enumerate(raw, start=1):
        try:
            a = np.array(r, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ShapeError(f"matrix {k}: not a numeric array ({exc})") from None
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ShapeError(f"matrix {k}: expected a nonempty square array, got shape {a.shape}")
        if n is None:
            n = a.shape[0]
        elif a.shape[0] != n:
            raise ShapeError(f"matrix {k}: dimension {a.shape[0]} != {n}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteEntry(f"matrix {k}: NaN or infinite entry")
        neg = np.argwhere(a < 0)
        if len(neg):
            i, j = neg[0]
            raise NegativeEntry(k, int(i) + 1, int(j) + 1, float(a[i, j]))
        zero = np.flatnonzero(~np.any(a > 0, axis=1))
        if len(zero):
            raise ZeroRow(k, int(zero[0]) + 1)
        if mode == "stochastic":
            sums = a.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > STOCHASTIC_TOL)
            if len(bad):
                raise RowSumViolation(k, int(bad[0]) + 1, float(sums[bad[0]]))
        if mode == "binary":
            for i, row in enumerate(a, start=1):
                if not np.all((row == 0) | (row == 1)):
                    raise NonBinaryEntry(k, i, "has an entry outside {0, 1}")
                if row.sum() != 1:
                    raise NonBinaryEntry(k, i, "does not contain exactly one 1")
        if mode == "positive_diagonal":
            diag = np.flatnonzero(np.diag(a) <= 0)
            if len(diag):
                raise ZeroDiagonal(k, int(diag[0]) + 1)
        a.setflags(write=False)
        mats.append(a)

    if names is None:
        names = [f"A{k}" for k in range(1, len(mats) + 1)]
    elif len(names) != len(mats):
        raise ValidationError("number of names does not match number of matrices")
    return MatrixSet(
        matrices=tuple(mats),
        names=tuple(str(s) for s in names),
        mode=mode,
        stochastic=all(_row_sums_ok(a) for a in mats),
        binary_stochastic=all(_is_binary_stochastic(a) for a in mats),
        positive_diagonal=all(bool(np.all(np.diag(a) > 0)) for a in mats),
        patterns=tuple(ZeroPattern.from_matrix(a) for a in mats),
    )


def product(word: Word, mset: MatrixSet) -> np.ndarray:
    """Numeric product ``A[w_l] @ ... @ A[w_1]``."""
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    mset.check_word(word)
    return reduce(np.matmul, (mset.matrix(k) for k in word))


def pattern_product(word: Word, mset: MatrixSet) -> ZeroPattern:
    """Exact zero pattern of ``product(word, mset)``.

    Nonnegative entries cannot cancel, so boolean multiplication is exact.
    """
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    mset.check_word(word)
    return reduce(lambda p, k: p @ mset.pattern(k), word.letters[1:],
                  mset.pattern(word.letters[0]))


def dominates(a, b) -> bool:
    """True iff every zero of ``a`` is also a zero of ``b``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError("dimension mismatch")
    return bool(np.all((a > 0) | (b <= 0)))


def positive_column(p: ZeroPattern) -> Optional[int]:
    """Smallest 1-based index of an all-positive column, or None."""
    mask = p.column_mask()
    if not mask:
        return None
    return (mask & -mask).bit_length()


def positive_columns(p: ZeroPattern) -> list[int]:
    return [j + 1 for j in mask_indices(p.column_mask())]


# -- JSON file format --------------------------------------------------------

def _reject_constant(token):
    raise ValidationError(f"non-finite number {token} is not permitted")


def loads(text: str) -> MatrixSet:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object")
    for key in ("n", "matrices"):
        if key not in doc:
            raise ValidationError(f"missing key {key!r}")
    mode = doc.get("mode", "general")
    entries = doc["matrices"]
    if not isinstance(entries, list) or not entries:
        raise ValidationError("'matrices' must be a nonempty list")
    raw, names = [], []
    for k, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict) or "rows" not in entry:
            raise ValidationError(f"matrix {k}: expected an object with 'rows'")
        raw.append(entry["rows"])
        names.append(entry.get("name", f"A{k}"))
    mset = validate_set(raw, mode=mode, names=names)
    if mset.n != doc["n"]:
        raise ShapeError(f"declared n={doc['n']} but matrices are {mset.n}x{mset.n}")
    return mset


def load(path) -> MatrixSet:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def to_document(mset: MatrixSet) -> dict:
    return {
        "n": mset.n,
        "mode": mset.mode,
        "matrices": [
            {"name": name, "rows": [[_plain(x) for x in row] for row in a]}
            for name, a in zip(mset.names, mset.matrices)
        ],
    }


def _plain(x: float):
    # integral values are written as ints to keep 0/1 files readable
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else float(x)


def dumps(mset: MatrixSet) -> str:
    return json.dumps(to_document(mset), indent=2) + "\n"


def random_set(rng: np.random.Generator, n: int, m: int,
               density: float = 0.4, stochastic: bool = True,
               positive_diagonal: bool = False) -> MatrixSet:
    """Random set with a random zero pattern and no zero row."""
    mats = []
    for _ in range(m):
        mask = rng.random((n, n)) < density
        if positive_diagonal:
            mask |= np.eye(n, dtype=bool)
        for i in range(n):
            if not mask[i].any():
                mask[i, rng.integers(n)] = True
        a = np.where(mask, rng.uniform(0.1, 1.0, (n, n)), 0.0)
        if stochastic:
            a = a / a.sum(axis=1, keepdims=True)
        mats.append(a)
    return validate_set(mats, "stochastic" if stochastic else "general")

