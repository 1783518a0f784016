"""Switched consensus simulation and push-sum averaging.

Random schedules draw letters with numpy's PCG64 generator.  A trial's
stream is seeded from ``SeedSequence([seed, trial])`` so per-trial results do
not depend on how trials are distributed over workers.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .matset import MatrixSet, Word, pattern_product, positive_column, product

DEFAULT_EPS = 1e-6
WEIGHT_FLOOR = 1e-12


class NotStochastic(ValueError):
    pass


class NotColumnStochastic(ValueError):
    pass


class NotPositiveColumn(ValueError):
    pass


def make_rng(seed: int, trial: Optional[int] = None) -> np.random.Generator:
    entropy = [seed] if trial is None else [seed, trial]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class Schedule:
    """Switching signal.

    ``periodic`` repeats a word with its rightmost letter first,
    ``scripted`` gives the letters in the order they are applied, and
    ``random`` draws i.i.d. letters with the given (strictly positive)
    probabilities, uniform by default.
    """

    kind: str
    word: Optional[Word] = None
    sequence: tuple[int, ...] = ()
    seed: int = 0
    probabilities: Optional[tuple[float, ...]] = None

    @classmethod
    def periodic(cls, word: Word) -> "Schedule":
        if len(word) == 0:
            raise ValueError("periodic schedule needs a nonempty word")
        return cls("periodic", word=word)

    @classmethod
    def scripted(cls, sequence: Sequence[int]) -> "Schedule":
        return cls("scripted", sequence=tuple(int(k) for k in sequence))

    @classmethod
    def random(cls, seed: int = 0, probabilities: Optional[Sequence[float]] = None) -> "Schedule":
        if probabilities is not None:
            p = tuple(float(x) for x in probabilities)
            if any(x <= 0 for x in p):
                raise ValueError("every letter needs a strictly positive probability")
            if abs(sum(p) - 1.0) > 1e-9:
                raise ValueError(f"probabilities sum to {sum(p)}, not 1")
            probabilities = p
        return cls("random", seed=seed, probabilities=probabilities)

    def letters(self, steps: int, m: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """The first ``steps`` letters in application order."""
        if self.kind == "periodic":
            app = np.array(self.word.application_order)
            return app[np.arange(steps) % len(app)]
        if self.kind == "scripted":
            if steps > len(self.sequence):
                raise ValueError(f"scripted schedule has only {len(self.sequence)} letters")
            return np.array(self.sequence[:steps], dtype=int)
        if self.kind == "random":
            if self.probabilities is not None and len(self.probabilities) != m:
                raise ValueError("need one probability per letter")
            rng = rng if rng is not None else make_rng(self.seed)
            return rng.choice(m, size=steps, p=self.probabilities) + 1
        raise ValueError(f"unknown schedule kind {self.kind!r}")

    def describe(self) -> dict:
        if self.kind == "periodic":
            return {"kind": "periodic", "word": str(self.word)}
        if self.kind == "scripted":
            return {"kind": "scripted", "length": len(self.sequence)}
        return {"kind": "random", "seed": self.seed, "generator": "PCG64",
                "probabilities": list(self.probabilities) if self.probabilities else "uniform"}


def diameter(x) -> float:
    x = np.asarray(x)
    return float(x.max() - x.min())


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    diameters: np.ndarray
    schedule: Schedule
    letters_used: tuple[int, ...]

    def hitting_time(self, eps: float = DEFAULT_EPS) -> Optional[int]:
        hits = np.flatnonzero(self.diameters < eps)
        return int(hits[0]) if len(hits) else None

    def to_csv(self) -> str:
        n = self.states.shape[1]
        buf = io.StringIO()
        buf.write("t," + ",".join(f"x_{i}" for i in range(1, n + 1)) + ",diameter\n")
        for t, (x, d) in enumerate(zip(self.states, self.diameters)):
            buf.write(f"{t}," + ",".join(format(v, ".17g") for v in x)
                      + f",{format(d, '.17g')}\n")
        return buf.getvalue()


def _require_stochastic(mset: MatrixSet):
    if not mset.stochastic:
        raise NotStochastic("consensus simulation needs row-stochastic matrices")


def _iterate(mats, letters: np.ndarray, x0: np.ndarray) -> np.ndarray:
    states = np.empty((len(letters) + 1, len(x0)))
    states[0] = x0
    for t, k in enumerate(letters):
        states[t + 1] = mats[k - 1] @ states[t]
    return states


def run(mset: MatrixSet, schedule: Schedule, x0, steps: int) -> Trajectory:
    """Iterate x(t+1) = A[sigma(t)] x(t) for ``steps`` steps."""
    _require_stochastic(mset)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (mset.n,):
        raise ValueError(f"x0 must have length {mset.n}")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    letters = schedule.letters(steps, mset.m)
    if np.any((letters < 1) | (letters > mset.m)):
        raise ValueError("schedule uses a letter outside the set")
    states = _iterate(mset.matrices, letters, x0)
    diam = states.max(axis=1) - states.min(axis=1)
    return Trajectory(states, diam, schedule, tuple(int(k) for k in letters))


@dataclass(frozen=True)
class ContractionResult:
    column: int
    a: float
    before: float
    after: float
    holds: bool


def contraction_check(mset: MatrixSet, word: Word, x0, slack: float = 1e-12) -> ContractionResult:
    """One application of a positive-column product shrinks the diameter
    by at least the factor 1 - a, where a is the smallest entry of the
    positive column."""
    column = positive_column(pattern_product(word, mset))
    if column is None:
        raise NotPositiveColumn(f"word {word} has no positive column")
    aw = product(word, mset)
    a = float(aw[:, column - 1].min())
    x0 = np.asarray(x0, dtype=float)
    before, after = diameter(x0), diameter(aw @ x0)
    return ContractionResult(column, a, before, after, after <= (1 - a) * before + slack)


@dataclass
class ExperimentResult:
    seed: int
    eps: float
    t_max: int
    trials: int
    hitting_times: list = field(default_factory=list)

    @property
    def success_fraction(self) -> float:
        hits = sum(t is not None for t in self.hitting_times)
        return hits / self.trials if self.trials else 0.0

    def summary(self) -> dict:
        hits = np.array([t for t in self.hitting_times if t is not None], dtype=float)
        quantiles = ({q: float(np.quantile(hits, float(q))) for q in ("0.0", "0.5", "0.9", "1.0")}
                     if len(hits) else {})
        return {
            "seed": self.seed,
            "generator": "PCG64",
            "eps": self.eps,
            "T_max": self.t_max,
            "trials": self.trials,
            "success_fraction": self.success_fraction,
            "hitting_time_quantiles": quantiles,
        }


def _trial(mset, trial, seed, eps, t_max, probabilities, x0):
    rng = make_rng(seed, trial)
    x = rng.random(mset.n) if x0 is None else np.asarray(x0, dtype=float)
    letters = rng.choice(mset.m, size=t_max, p=probabilities) + 1
    mats = mset.matrices
    if x.max() - x.min() < eps:
        return 0
    for t, k in enumerate(letters, start=1):
        x = mats[k - 1] @ x
        if x.max() - x.min() < eps:
            return t
    return None


def random_switching_experiment(mset: MatrixSet, trials: int = 100, seed: int = 0,
                                eps: float = DEFAULT_EPS, t_max: Optional[int] = None,
                                probabilities=None, x0=None, jobs: int = 1) -> ExperimentResult:
    """Run independent i.i.d. switching trials until the diameter drops below eps.

    Each trial draws its own x0 uniformly from [0, 1)^n unless ``x0`` is
    given.  ``t_max`` defaults to 100 n^3.
    """
    _require_stochastic(mset)
    if t_max is None:
        t_max = 100 * mset.n ** 3
    if probabilities is not None:
        Schedule.random(seed, probabilities)  # validation only
        probabilities = list(probabilities)
        if len(probabilities) != mset.m:
            raise ValueError("need one probability per letter")
    args = (seed, eps, t_max, probabilities, x0)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            times = list(pool.map(lambda i: _trial(mset, i, *args), range(trials)))
    else:
        times = [_trial(mset, i, *args) for i in range(trials)]
    return ExperimentResult(seed, eps, t_max, trials, times)


# -- push-sum ----------------------------------------------------------------

@dataclass(frozen=True)
class PushSumTrace:
    s: np.ndarray
    w: np.ndarray
    letters_used: tuple[int, ...]

    @property
    def estimates(self) -> np.ndarray:
        """s / w, with NaN where the weight has fallen below ``WEIGHT_FLOOR``."""
        out = np.full_like(self.s, np.nan)
        ok = self.w > WEIGHT_FLOOR
        out[ok] = self.s[ok] / self.w[ok]
        return out


def column_stochastic(raw) -> tuple[np.ndarray, ...]:
    """Check nonnegative square matrices with unit column sums.

    Rows may be zero here (an agent that only sends), so these are not
    validated as a :class:`MatrixSet`.
    """
    mats = raw.matrices if isinstance(raw, MatrixSet) else tuple(np.asarray(a, dtype=float) for a in raw)
    if not mats:
        raise NotColumnStochastic("empty set")
    n = mats[0].shape[0]
    for k, c in enumerate(mats, start=1):
        if c.shape != (n, n):
            raise NotColumnStochastic(f"matrix {k}: shape {c.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise NotColumnStochastic(f"matrix {k}: entries must be finite and nonnegative")
        sums = c.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise NotColumnStochastic(f"matrix {k}: column sums {sums.tolist()}")
    return mats


def push_sum_run(cset, schedule: Schedule, x0, steps: int) -> PushSumTrace:
    """Push-sum with column-stochastic mixing matrices.

    ``cset`` is a sequence of arrays or a MatrixSet.  Starts from s(0) = x0
    and w(0) = 1 and applies the same matrix to both vectors each step,
    which conserves their sums.
    """
    mats = column_stochastic(cset)
    n = mats[0].shape[0]
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"x0 must have length {n}")
    letters = schedule.letters(steps, len(mats))
    s = _iterate(mats, letters, x0)
    w = _iterate(mats, letters, np.ones(n))
    return PushSumTrace(s, w, tuple(int(k) for k in letters))
