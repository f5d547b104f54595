"""Command-line interface: bound tables, strategy simulation, synthesis, verification and exact solving."""

from __future__ import annotations

import argparse
import itertools
import json
import math
import random
import sys
import time
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .core import (
    GameError,
    UsageError,
    make_order_instance,
    read_string_set,
    string_board,
    string_cap,
    string_complement,
    string_set,
)
from .engine import play
from .logic import qcount, qrank, read_sentence, separates, show, synthesize_from_trace
from .solver import solve_ef, solve_ms
from .strategies import (
    StrategyParams,
    ceil_log,
    cma_strategy,
    counting_lower_bound,
    hard_pair,
    min_m,
    order_one_vs_all_instance,
    order_one_vs_all_strategy,
    pattern_of,
    q_star,
    rank,
    realr_threshold,
    stirling_threshold,
    string_any_vs_any,
    string_many_vs_all,
    string_one_vs_all,
    string_one_vs_one,
    table_rows,
)

TABLE_HEADER = ("ell", "q_forall", "q_exists", "q_star", "rank")
STRATEGIES = ("cma", "order-one-vs-all", "one-vs-one", "one-vs-all", "many-vs-all", "any-vs-any")
SIDES = {"exists": "E", "forall": "A", "best": "best"}


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting."""

    def error(self, message: str) -> None:
        raise UsageError(message)


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def bitstring(text: str) -> str:
    if not text or any(c not in "01" for c in text):
        raise argparse.ArgumentTypeError(f"not a 0/1 string: {text!r}")
    return text


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="msgames", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    def command(name: str, help_text: str) -> ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--format", choices=("json", "tsv", "text"), default="text")
        return p

    def order_args(p: ArgumentParser, required: bool = False) -> None:
        p.add_argument("--ell", type=int, required=required, help="order length")
        p.add_argument("--max-right", type=int, help="longest right order (default 2*ell+2)")

    def string_args(p: ArgumentParser) -> None:
        p.add_argument("--n", type=int, help="string length for random instances")
        p.add_argument("--target", type=bitstring, help="target string")
        p.add_argument("--left", help="left string-set file")
        p.add_argument("--right", help="right string-set file")
        p.add_argument("--t", type=int, default=3, help="radix of the permutation rounds")
        p.add_argument("--r", type=rational, default=Fraction(5, 2), help="real base of the preprocessing rounds")
        p.add_argument("--seed", type=int, default=0)

    p = command("table", "rows of q*_forall, q*_exists, q* and rank")
    p.add_argument("--max", type=int, required=True)

    p = command("qstar", "rounds used by the closest-to-midpoint strategy")
    order_args(p, required=True)
    p.add_argument("--side", choices=tuple(SIDES), default="best")

    p = command("pattern", "declared pattern of the closest-to-midpoint strategy")
    order_args(p, required=True)
    p.add_argument("--side", choices=tuple(SIDES), default="best")

    for name, help_text in (("simulate", "play a strategy against the oblivious Duplicator"),
                            ("synthesize", "build a separating sentence from a winning play")):
        p = command(name, help_text)
        p.add_argument("strategy", choices=STRATEGIES)
        order_args(p)
        p.add_argument("--side", choices=tuple(SIDES), default="best")
        string_args(p)
        p.add_argument("--max-rounds", type=int, help="round budget (default: declared pattern length)")
        p.add_argument("--no-prune", action="store_true")

    p = command("verify", "model-check a sentence on an accept and a reject set")
    p.add_argument("--sentence", required=True)
    order_args(p)
    p.add_argument("--accept", help="string-set file that must satisfy the sentence")
    p.add_argument("--reject", help="string-set file that must falsify it (default: the complement)")

    p = command("solve", "exact game value on a small instance")
    p.add_argument("--game", choices=("ms", "ef"), default="ms")
    order_args(p)
    p.add_argument("--left", help="left string-set file")
    p.add_argument("--right", help="right string-set file (default: the complement)")
    p.add_argument("--max-rounds", type=int, default=4)
    p.add_argument("--first", choices=("exists", "forall"))
    p.add_argument("--no-prune", action="store_true")

    p = command("hardpair", "the pair of strings needing about log n quantifiers")
    p.add_argument("--k", type=int, required=True)

    p = command("bound", "counting lower bound for separating one string set from all")
    p.add_argument("--n", type=int, required=True)

    p = command("feasible", "permutation-round sizes and thresholds for the string strategies")
    p.add_argument("--n", type=int, help="string length")
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--r", type=rational, default=Fraction(5, 2))
    return parser


def _side(name: str) -> str:
    return SIDES[name]


def _order_instance(args: argparse.Namespace):
    if args.ell is None:
        raise UsageError("--ell is required for order instances")
    return make_order_instance(args.ell, args.max_right)


def _params(args: argparse.Namespace) -> StrategyParams:
    return StrategyParams(t=args.t, r_real=args.r, prune=not args.no_prune)


def _random_words(rng: random.Random, n: int, count: int) -> list[str]:
    words: set[str] = set()
    while len(words) < count:
        words.add("".join(rng.choice("01") for _ in range(n)))
    return sorted(words)


def _string_game(args: argparse.Namespace):
    """Instance and strategy for a string strategy from files, a target or a seeded draw."""
    rng = random.Random(args.seed)
    params = _params(args)
    name = args.strategy
    if name == "one-vs-one":
        if args.left and args.right:
            (w,), (v,) = read_string_set(args.left), read_string_set(args.right)
        else:
            if args.n is None:
                raise UsageError("one-vs-one needs --left/--right files or --n")
            w, v = _random_words(rng, args.n, 2)
            if rng.random() < 0.5:
                w, v = v, w
        return string_set([w]), string_set([v]), string_one_vs_one(w, v)
    if name == "one-vs-all":
        w = args.target
        if w is None:
            if args.n is None:
                raise UsageError("one-vs-all needs --target or --n")
            (w,) = _random_words(rng, args.n, 1)
        return string_set([w]), string_complement([w], len(w)), string_one_vs_all(w, params)
    if name == "many-vs-all":
        if args.left:
            A = read_string_set(args.left)
        else:
            if args.n is None:
                raise UsageError("many-vs-all needs --left or --n")
            if args.n > string_cap():
                raise UsageError(f"--n {args.n} exceeds the string cap {string_cap()}")
            A = _random_words(rng, args.n, rng.randint(1, 2 ** args.n - 1))
        if not A:
            raise UsageError("the left set is empty")
        return string_set(A), string_complement(A, len(A[0])), string_many_vs_all(A, params)
    if args.left:
        A = read_string_set(args.left)
        B = read_string_set(args.right) if args.right else None
    else:
        if args.n is None:
            raise UsageError("any-vs-any needs --left or --n")
        if args.n > string_cap():
            raise UsageError(f"--n {args.n} exceeds the string cap {string_cap()}")
        words = ["".join(w) for w in itertools.product("01", repeat=args.n)]
        A = sorted(rng.sample(words, rng.randint(1, len(words) - 1)))
        B = None
    if not A:
        raise UsageError("the left set is empty")
    if B is None:
        B = sorted(b.word() for b in string_complement(A, len(A[0])))
    return string_set(A), string_set(B), string_any_vs_any(A, B, params)


def _game(args: argparse.Namespace):
    if args.strategy == "cma":
        left, right = _order_instance(args)
        return left, right, cma_strategy(args.ell, _side(args.side))
    if args.strategy == "order-one-vs-all":
        if args.ell is None:
            raise UsageError("--ell is required for order instances")
        left, right = order_one_vs_all_instance(args.ell, args.max_right)
        return left, right, order_one_vs_all_strategy(args.ell)
    return _string_game(args)


def _simulate(args: argparse.Namespace) -> tuple[dict, dict, Any]:
    left, right, strategy = _game(args)
    budget = args.max_rounds if args.max_rounds is not None else len(strategy.pattern or "")
    result = play(left, right, strategy, budget, prune=not args.no_prune)
    params = {
        "strategy": args.strategy,
        "ell": args.ell,
        "max_right": args.max_right,
        "side": args.side,
        "n": args.n,
        "target": args.target,
        "t": args.t,
        "r": str(args.r),
        "seed": args.seed,
        "max_rounds": budget,
        "prune": not args.no_prune,
        "left_size": len(left),
        "right_size": len(right),
    }
    results = {
        "strategy_name": strategy.name,
        "won": result.won,
        "rounds": result.won_at,
        "pattern": result.pattern,
        "declared_pattern": strategy.pattern,
    }
    return params, results, (left, right, result)


def run(args: argparse.Namespace) -> dict:
    cmd = args.command
    if cmd == "table":
        if args.max < 1:
            raise UsageError("--max must be >= 1")
        rows = [dict(zip(TABLE_HEADER, row)) for row in table_rows(args.max)]
        return {"params": {"max": args.max}, "results": {"rows": rows}}
    if cmd in ("qstar", "pattern"):
        side = _side(args.side)
        results = {"q_star": q_star(args.ell, side), "pattern": pattern_of(args.ell, side), "rank": rank(args.ell)}
        return {"params": {"ell": args.ell, "side": args.side}, "results": results}
    if cmd == "simulate":
        params, results, _ = _simulate(args)
        return {"params": params, "results": results}
    if cmd == "synthesize":
        params, results, (left, right, result) = _simulate(args)
        if not result.won:
            results["sentence"] = None
        else:
            f = synthesize_from_trace(result.trace)
            results.update(
                sentence=show(f),
                qcount=qcount(f),
                qrank=qrank(f),
                separates=separates(f, left, right),
            )
        return {"params": params, "results": results}
    if cmd == "verify":
        f = read_sentence(args.sentence)
        if args.accept:
            A = read_string_set(args.accept)
            if not A:
                raise UsageError("the accept set is empty")
            left = string_set(A)
            right = string_set(read_string_set(args.reject)) if args.reject else string_complement(A, len(A[0]))
        else:
            left, right = _order_instance(args)
        ok = separates(f, left, right)
        params = {"sentence": args.sentence, "ell": args.ell, "max_right": args.max_right,
                  "accept": args.accept, "reject": args.reject}
        results = {"separates": ok, "qcount": qcount(f), "qrank": qrank(f),
                   "left_size": len(left), "right_size": len(right)}
        return {"params": params, "results": results}
    if cmd == "solve":
        if args.left:
            A = read_string_set(args.left)
            if not A:
                raise UsageError("the left set is empty")
            left = string_set(A)
            right = string_set(read_string_set(args.right)) if args.right else string_complement(A, len(A[0]))
        else:
            left, right = _order_instance(args)
        params = {"game": args.game, "ell": args.ell, "max_right": args.max_right, "left": args.left,
                  "right": args.right, "max_rounds": args.max_rounds, "first": args.first,
                  "prune": not args.no_prune}
        if args.game == "ef":
            value = solve_ef(left, right, args.max_rounds)
            results = {"rank": value, "separable_within_budget": value is not None}
        else:
            first = {"exists": "E", "forall": "A", None: None}[args.first]
            res = solve_ms(left, right, args.max_rounds, first, prune=not args.no_prune)
            results = res.to_json()
            results["note"] = (
                "minimal rounds on this truncated instance" if res.winnable
                else f"not winnable within {args.max_rounds} rounds on this truncated instance"
            )
        return {"params": params, "results": results}
    if cmd == "hardpair":
        w, v = hard_pair(args.k)
        n = len(w)
        strategy = string_one_vs_one(w, v)
        result = play(string_set([w]), string_set([v]), strategy, len(strategy.pattern))
        results = {"left": w, "right": v, "n": n, "lower_bound": int(math.floor(math.log2(n))),
                   "strategy_rounds": result.won_at, "upper_bound": ceil_log(n, 2) + 6}
        return {"params": {"k": args.k}, "results": results}
    if cmd == "bound":
        k = counting_lower_bound(args.n)
        ratio = args.n / math.log2(args.n)
        results = {"bound": k, "n_over_log_n": round(ratio, 2), "note": f"≥ n/log n = {ratio:.2f}"}
        return {"params": {"n": args.n}, "results": results}
    if cmd == "feasible":
        params_obj = StrategyParams(t=args.t, r_real=args.r)
        results: dict[str, Any] = {
            "stirling_threshold": stirling_threshold(args.t),
            "realr_threshold": realr_threshold(args.r),
            "epsilon_t": round(params_obj.epsilon_from_t, 6),
            "epsilon_r": round(params_obj.epsilon_from_r, 6),
        }
        if args.n is not None:
            results["min_m"] = min_m(args.n)
            results["ceil_log_t_n"] = ceil_log(args.n, args.t)
        return {"params": {"n": args.n, "t": args.t, "r": str(args.r)}, "results": results}
    raise UsageError(f"unknown command {cmd!r}")


def render(report: dict, fmt: str = "json") -> str:
    """Render a report as JSON, TSV (table only) or plain text."""
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2)
    results = report.get("results", {})
    if fmt == "tsv":
        if "rows" not in results:
            raise UsageError(f"tsv output is only available for table, not {report.get('command')}")
        lines = ["\t".join(TABLE_HEADER)]
        lines += ["\t".join(str(row[h]) for h in TABLE_HEADER) for row in results["rows"]]
        return "\n".join(lines)
    if fmt != "text":
        raise UsageError(f"unknown format {fmt!r}")
    if "rows" in results:
        lines = ["  ".join(f"{h:>8}" for h in TABLE_HEADER)]
        lines += ["  ".join(f"{row[h]:>8}" for h in TABLE_HEADER) for row in results["rows"]]
        return "\n".join(lines)
    lines = [f"{report.get('command')}:"]
    for key in sorted(results):
        value = results[key]
        if isinstance(value, (list, dict)):
            value = json.dumps(value, sort_keys=True)
        lines.append(f"  {key}: {value}")
    return "\n".join(lines)


def dispatch(argv: Sequence[str] | None = None, out=None, err=None) -> tuple[int, dict | None]:
    """Run one command; return the exit code and the report (None on error)."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        start = time.perf_counter()
        report = {"command": args.command}
        report.update(run(args))
        report["timing"] = {"elapsed_s": round(time.perf_counter() - start, 6)}
        text = render(report, args.format)
    except GameError as exc:
        print(f"error: {exc}", file=err)
        return exc.exit_code, None
    except SystemExit as exc:
        # --help and --version exit through argparse.
        return int(exc.code or 0), None
    print(text, file=out)
    return 0, report


def main(argv: Sequence[str] | None = None) -> int:
    return dispatch(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
