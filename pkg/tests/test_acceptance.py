"""Acceptance criteria, one test per criterion.

Each check prints a ``[PASS]`` or ``[FAIL]`` line.  The lines are also
collected and repeated at the end of the pytest run, and the module can be
run directly with ``python tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from colprim.consensus import (Schedule, contraction_check, diameter, push_sum_run,
                               random_switching_experiment, run)
from colprim.matset import (Word, pattern_product, positive_column, product, random_set,
                            validate_set)
from colprim.pairgraph import build_pair_digraph, decide_column_primitive
from colprim.satreduce import parse_dimacs, random_formula, reduce, verify_reduction
from colprim.synth import intree_decide, length_bounds, shortest_word_bruteforce, synthesize_word

from conftest import AGENTS, LIMIT_V, SAMPLE_CNF, PERMUTATIONS

RESULTS = {}

W = Word.parse("11221")
GOLDEN = np.array([[0, 0.2, 0, 0.8], [0, 0.36, 0, 0.64], [0, 1, 0, 0], [0, 0.8, 0.2, 0]])
V_VECTORS = [
    (1, 0, 0, 0, 1, 0), (1, 0, 0, 1, 0, 1), (0, 1, 0, 0, 1, 1),
    (0, 1, 0, 1, 0, 0), (0, 0, 1, 0, 1, 0), (0, 0, 1, 1, 0, 1),
]


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def best_time(fn, repeats=20):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def instances():
    """The 500 seeded random sets shared by criteria 3 to 5."""
    rng = np.random.default_rng(3)
    out = []
    for _ in range(500):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 4))
        out.append(random_set(rng, n, m, density=rng.uniform(0.05, 0.6)))
    return out


@pytest.fixture(scope="module")
def agents():
    return validate_set(AGENTS, "stochastic")


@pytest.fixture(scope="module")
def yes_instances():
    return [(s, shortest_word_bruteforce(s)) for s in instances()]


def test_criterion_1_golden_product(agents):
    p = product(W, agents)
    err = float(np.abs(p - GOLDEN).max())
    col = positive_column(pattern_product(W, agents))
    secs = best_time(lambda: (product(W, agents), pattern_product(W, agents)))
    ok = err <= 1e-12 and col == 2 and secs < 1e-3
    assert record(1, ok, f"max error {err:.1e}, column {col}, {secs * 1e3:.3f} ms")


def test_criterion_2_golden_limit(agents):
    sched = Schedule.periodic(W)
    worst, slowest = 0.0, 0.0
    for e, v in zip(np.eye(4), LIMIT_V):
        final = run(agents, sched, e, 500).states[-1]
        worst = max(worst, float(np.abs(final - v).max()))
        slowest = max(slowest, best_time(lambda: run(agents, sched, e, 500), repeats=5))
    ok = worst <= 1e-3 and slowest < 1e-2
    assert record(2, ok, f"worst deviation {worst:.1e} after 500 steps, "
                         f"slowest start {slowest * 1e3:.2f} ms")


def test_criterion_3_decision(yes_instances):
    t0 = time.perf_counter()
    agree = sum(decide_column_primitive(build_pair_digraph(s)).primitive == (found is not None)
                for s, found in yes_instances)
    # brute force runs inside the fixture; time a fresh pass of both sides
    for s in instances():
        decide_column_primitive(build_pair_digraph(s))
        shortest_word_bruteforce(s)
    secs = time.perf_counter() - t0
    yes = sum(found is not None for _, found in yes_instances)
    ok = agree == 500 and secs < 30
    assert record(3, ok, f"{agree}/500 agree ({yes} yes), {secs:.2f} s")


def test_criterion_4_cubic_bound(yes_instances):
    bad = [s for s, found in yes_instances
           if found is not None and len(found[0]) > length_bounds(s.n)["pin_frankl"]]
    longest = max(len(found[0]) for _, found in yes_instances if found is not None)
    assert record(4, not bad, f"{len(bad)} violations, longest shortest word {longest}")


def test_criterion_5_synthesis(yes_instances):
    checked = bad = 0
    for s, found in yes_instances:
        if found is None:
            continue
        res = synthesize_word(s)
        checked += 1
        if not (pattern_product(res.word, s).is_positive_column(res.column)
                and res.length <= length_bounds(s.n)["greedy_guarantee"]):
            bad += 1
    assert record(5, bad == 0 and checked > 0, f"{checked - bad}/{checked} greedy words verified")


def test_criterion_6_contraction(agents):
    rng = np.random.default_rng(6)
    first = contraction_check(agents, W, rng.normal(size=4))
    fails = 0
    for _ in range(1000):
        x = rng.normal(size=4) * rng.uniform(0.1, 100)
        after = diameter(product(W, agents) @ x)
        fails += not (after <= 0.8 * diameter(x) + 1e-12)
    ok = first.a == 0.2 and fails == 0
    assert record(6, ok, f"a = {first.a}, {fails}/1000 violations")


def test_criterion_7_random_switching(agents):
    perms = validate_set(PERMUTATIONS, "binary")
    good = random_switching_experiment(agents, trials=100, seed=7, eps=1e-6, t_max=10**4)
    none = random_switching_experiment(perms, trials=100, seed=7, eps=1e-6, t_max=10**4)
    hits = sum(t is not None for t in good.hitting_times)
    misses = sum(t is not None for t in none.hitting_times)
    ok = hits == 100 and misses == 0
    assert record(7, ok, f"four-agent set {hits}/100, permutation pair {misses}/100")


def test_criterion_8_reduction():
    rset = reduce(parse_dimacs(SAMPLE_CNF))
    vectors_ok = all(np.array_equal(rset.first_column_tail(k), vec)
                     for k, vec in enumerate(V_VECTORS, start=1))
    tail = product(Word((2, 3, 6)), rset.mset)[1:, 0]
    tail_ok = np.array_equal(tail, (1, 1, 1, 2, 1, 3))
    rng = np.random.default_rng(8)
    t0 = time.perf_counter()
    agree = sat = 0
    for _ in range(200):
        check = verify_reduction(random_formula(rng, int(rng.integers(1, 9)),
                                                int(rng.integers(0, 11))))
        agree += check.agree
        sat += check.sat
    secs = time.perf_counter() - t0
    ok = vectors_ok and tail_ok and agree == 200 and secs < 60
    assert record(8, ok, f"v-vectors {'ok' if vectors_ok else 'WRONG'}, tail {tail.tolist()}, "
                         f"{agree}/200 agree ({sat} sat), {secs:.2f} s")


def test_criterion_9_intree():
    rng = np.random.default_rng(9)
    agree = bad_words = yes = 0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        s = random_set(rng, n, int(rng.integers(1, 4)), density=rng.uniform(0.0, 0.35),
                       positive_diagonal=True)
        res = intree_decide(s)
        agree += res.primitive == decide_column_primitive(build_pair_digraph(s)).primitive
        if res.primitive:
            yes += 1
            bad_words += not (len(res.word) <= n - 1
                              and pattern_product(res.word, s).is_positive_column(res.root))
    ok = agree == 200 and bad_words == 0
    assert record(9, ok, f"{agree}/200 agree ({yes} yes), {bad_words} bad words")


def test_criterion_10_conservation():
    rng = np.random.default_rng(10)
    worst = 0.0
    for trial in range(50):
        n = int(rng.integers(2, 7))
        rows = random_set(rng, n, int(rng.integers(1, 4)), density=rng.uniform(0.1, 0.6))
        cols = [a.T for a in rows.matrices]
        x0 = rng.uniform(0.5, 10, size=n)
        tr = push_sum_run(cols, Schedule.random(seed=trial), x0, 1000)
        worst = max(worst,
                    float(np.abs(tr.s.sum(axis=1) / x0.sum() - 1).max()),
                    float(np.abs(tr.w.sum(axis=1) / n - 1).max()))
    assert record(10, worst <= 1e-9, f"worst relative drift {worst:.1e} over 50 instances")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
