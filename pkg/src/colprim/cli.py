"""Command-line entry point: ``colprim {decide,synthesize,simulate,pairgraph,reduce}``.

Every command prints a JSON report on stdout.  Exit codes: 0 success / yes,
1 not column-primitive, 2 input error, 3 search budget exceeded,
4 reduction verification disagreement.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .consensus import (DEFAULT_EPS, NotStochastic, Schedule, random_switching_experiment,
                        run)
from .matset import (MatrixSet, ValidationError, Word, dumps, loads, pattern_product,
                     positive_column)
from .pairgraph import build_pair_digraph, decide_column_primitive
from .satreduce import (BudgetExceeded, ClauseTooWide, MalformedDimacs, parse_dimacs,
                        reduce, verify_reduction)
from .synth import (DEFAULT_BUDGET, DEFAULT_MAX_N, NotColumnPrimitive, StateSpaceExceeded,
                    check_selections, length_bounds, shortest_word_bruteforce,
                    synthesize_word)

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_BUDGET, EXIT_MISMATCH = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(str(exc)) from None


def _load_set(data: bytes) -> MatrixSet:
    try:
        return loads(data.decode("utf-8"))
    except (ValidationError, UnicodeDecodeError, TypeError) as exc:
        raise InputError(str(exc)) from None


def _write(path: str, text: str):
    Path(path).write_text(text, encoding="utf-8")


def _pair_labels(pairs):
    return [v.label() for v in pairs]


def witness_payload(word: Word, column: int, n: int) -> dict:
    """Witness JSON: ``word`` lists letters rightmost (first applied) first."""
    return {
        "decision": "yes",
        "word": list(word.application_order),
        "written": str(word),
        "column": column,
        "length": len(word),
        "bounds": length_bounds(n),
    }


def cmd_decide(args, mset: MatrixSet) -> tuple[int, dict]:
    decision = decide_column_primitive(build_pair_digraph(mset))
    result = {"decision": "yes" if decision.primitive else "no", "n": mset.n, "m": mset.m}
    if not decision.primitive:
        result["unreachable_pairs"] = _pair_labels(decision.blocking)
    return (EXIT_OK if decision.primitive else EXIT_NO), result


def cmd_synthesize(args, mset: MatrixSet) -> tuple[int, dict]:
    if args.method == "greedy":
        try:
            res = synthesize_word(mset)
        except NotColumnPrimitive as exc:
            return EXIT_NO, {"decision": "no", "unreachable_pairs": _pair_labels(exc.blocking)}
        if not check_selections(res.word, mset, res.selections, res.column):
            raise AssertionError("greedy selections failed re-verification")
        word, column = res.word, res.column
    else:
        try:
            found = shortest_word_bruteforce(mset, max_len=args.max_len,
                                             max_n=args.max_n, budget=args.budget)
        except StateSpaceExceeded as exc:
            return EXIT_BUDGET, {"error": str(exc)}
        if found is None:
            return EXIT_NO, {"decision": "no", "max_len": args.max_len}
        word, column = found
    # no certificate leaves the tool unverified
    if not pattern_product(word, mset).is_positive_column(column):
        raise AssertionError(f"word {word} failed re-verification")
    payload = witness_payload(word, column, mset.n)
    payload["method"] = args.method
    if args.out:
        _write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK, payload


def _parse_vector(text: str, n: int) -> np.ndarray:
    try:
        x = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse vector {text!r}") from None
    if x.shape != (n,):
        raise InputError(f"x0 needs {n} entries, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise InputError("x0 must be finite")
    return x


def cmd_simulate(args, mset: MatrixSet) -> tuple[int, dict]:
    if not mset.stochastic:
        raise InputError("simulate needs a row-stochastic set")
    x0 = (_parse_vector(args.x0, mset.n) if args.x0
          else np.arange(1, mset.n + 1, dtype=float))
    probs = None
    if args.probs:
        probs = [float(t) for t in args.probs.split(",")]
    try:
        if args.schedule == "random":
            schedule = Schedule.random(args.seed, probs)
        else:
            word = Word.parse(args.schedule)
            mset.check_word(word)
            schedule = Schedule.periodic(word)
        traj = run(mset, schedule, x0, args.steps)
    except (ValueError, NotStochastic) as exc:
        raise InputError(str(exc)) from None
    if args.csv:
        _write(args.csv, traj.to_csv())
    result = {
        "schedule": schedule.describe(),
        "steps": args.steps,
        "eps": args.eps,
        "x0": x0.tolist(),
        "final_state": traj.states[-1].tolist(),
        "final_diameter": float(traj.diameters[-1]),
        "hitting_time": traj.hitting_time(args.eps),
    }
    if args.trials:
        exp = random_switching_experiment(mset, trials=args.trials, seed=args.seed,
                                          eps=args.eps, t_max=args.t_max,
                                          probabilities=probs, jobs=args.jobs)
        result["experiment"] = exp.summary()
    return EXIT_OK, result


def cmd_pairgraph(args, mset: MatrixSet) -> tuple[int, dict]:
    g = build_pair_digraph(mset)
    if args.dot:
        _write(args.dot, g.to_dot())
    return EXIT_OK, {"nodes": len(g.nodes), "edges": len(g.edges)}


def cmd_reduce(args, data: bytes) -> tuple[int, dict]:
    try:
        formula = parse_dimacs(data.decode("utf-8"))
    except (MalformedDimacs, ClauseTooWide, ValueError, UnicodeDecodeError) as exc:
        raise InputError(str(exc)) from None
    rset = reduce(formula)
    result = {"v": formula.v, "c": formula.c, "n": rset.mset.n, "m": rset.mset.m}
    if args.out:
        _write(args.out, dumps(rset.mset))
        letters_path = args.letter_map or args.out + ".letters.json"
        _write(letters_path, json.dumps(rset.letter_map_document(), indent=2) + "\n")
        result["letter_map_file"] = letters_path
    if args.verify:
        try:
            check = verify_reduction(formula, rset, budget=args.budget)
        except BudgetExceeded as exc:
            result["error"] = str(exc)
            return EXIT_BUDGET, result
        result["verification"] = check.to_dict()
        if check.word is not None:
            col = positive_column(pattern_product(check.word, rset.mset))
            result["verification"]["column"] = col
        if not check.agree:
            return EXIT_MISMATCH, result
    return EXIT_OK, result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="colprim",
        description="Consensus reachability for switched stochastic systems.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--no-timing", action="store_true",
                        help="omit elapsed time so reports are byte-identical")
    parser.add_argument("--jobs", type=int, default=1, help="worker cap for experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide column-primitivity")
    p.add_argument("matrix_set")

    p = sub.add_parser("synthesize", help="emit a positive-column word")
    p.add_argument("matrix_set")
    p.add_argument("--method", choices=("greedy", "bruteforce"), default="greedy")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out", help="write witness JSON here")

    p = sub.add_parser("simulate", help="simulate x(t+1) = A_sigma(t) x(t)")
    p.add_argument("matrix_set")
    p.add_argument("--schedule", default="random",
                   help="periodic word such as 11221, or 'random'")
    p.add_argument("--x0", help="comma-separated initial state (default 1..n)")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--probs", help="comma-separated letter probabilities")
    p.add_argument("--trials", type=int, default=0,
                   help="also run this many random-switching trials")
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--csv", help="write trajectory CSV here")

    p = sub.add_parser("pairgraph", help="build the digraph of pairs")
    p.add_argument("matrix_set")
    p.add_argument("--dot", help="write Graphviz source here")

    p = sub.add_parser("reduce", help="3-SAT to matrix-set reduction")
    p.add_argument("cnf")
    p.add_argument("--out", help="matrix-set JSON output")
    p.add_argument("--letter-map", help="letter map JSON (default <out>.letters.json)")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    return parser


COMMANDS = {
    "decide": cmd_decide,
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "pairgraph": cmd_pairgraph,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    path = args.cnf if args.command == "reduce" else args.matrix_set
    report = {"command": args.command, "tool_version": __version__, "input": path}
    try:
        data = _read(path)
        report["input_sha256"] = hashlib.sha256(data).hexdigest()
        if args.command == "reduce":
            code, result = cmd_reduce(args, data)
        else:
            code, result = COMMANDS[args.command](args, _load_set(data))
    except InputError as exc:
        code, result = EXIT_INPUT, {"error": str(exc)}
        print(f"colprim: {exc}", file=sys.stderr)
    report["result"] = result
    report["exit_code"] = code
    if not args.no_timing:
        report["elapsed_ms"] = round(1000 * (time.perf_counter() - start), 3)
    print(json.dumps(report, indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
