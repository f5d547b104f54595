import io
import itertools
import math
import random
import time
from fractions import Fraction

from msgames.cli import dispatch
from msgames.core import make_order_instance, order_board, string_board, string_complement, string_set
from msgames.engine import EXISTS, FORALL, play
from msgames.logic import Evaluator, build_alpha, build_epsilon, qcount, separates, synthesize_from_trace
from msgames.solver import Caps, solve_ef, solve_ms, winning_patterns
from msgames.strategies import (
    StrategyParams,
    ceil_log,
    cma_strategy,
    counting_lower_bound,
    hard_pair,
    min_m,
    q_star,
    q_star_fast,
    rank,
    realr_holds,
    realr_threshold,
    stirling_threshold,
    string_any_vs_any,
    string_one_vs_all,
    string_one_vs_one,
)

# Rows of the published table: (first ell, last ell, q_forall, q_exists, q_star, rank).
PUBLISHED_TABLE = [
    (1, 1, 1, 2, 1, 1),
    (2, 2, 2, 2, 2, 2),
    (3, 3, 3, 3, 3, 2),
    (4, 4, 3, 3, 3, 3),
    (5, 5, 3, 4, 3, 3),
    (6, 7, 4, 4, 4, 3),
    (8, 9, 4, 4, 4, 4),
    (10, 10, 5, 4, 4, 4),
    (11, 15, 5, 5, 5, 4),
    (16, 18, 5, 5, 5, 5),
    (19, 21, 5, 6, 5, 5),
    (22, 31, 6, 6, 6, 5),
    (32, 37, 6, 6, 6, 6),
    (38, 42, 7, 6, 6, 6),
    (43, 63, 7, 7, 7, 6),
    (64, 75, 7, 7, 7, 7),
    (76, 85, 7, 8, 7, 7),
    (86, 127, 8, 8, 8, 7),
]


def verdict(capsys, number, title, ok, elapsed, limit):
    """Print one PASS/FAIL line for a criterion and fail the test if it did not hold."""
    passed = ok and elapsed < limit
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({elapsed:.2f}s, limit {limit}s)")
    assert ok, f"criterion {number} does not hold"
    assert elapsed < limit, f"criterion {number} took {elapsed:.1f}s"


def test_criterion_01_table(capsys):
    start = time.perf_counter()
    out = io.StringIO()
    code, _ = dispatch(["table", "--max", "127", "--format", "tsv"], out, io.StringIO())
    rows = [tuple(map(int, line.split("\t"))) for line in out.getvalue().strip().split("\n")[1:]]
    expected = [(ell, qa, qe, qs, r) for lo, hi, qa, qe, qs, r in PUBLISHED_TABLE for ell in range(lo, hi + 1)]
    ok = code == 0 and rows == expected and len(rows) == 127
    mismatches = [(got, want) for got, want in zip(rows, expected) if got != want]
    title = "q* table for ell <= 127" + (f", computed vs published: {mismatches}" if mismatches else "")
    verdict(capsys, 1, title, ok, time.perf_counter() - start, 1)


def test_criterion_02_sandwich(capsys):
    start = time.perf_counter()
    ok = all(rank(ell) <= q_star(ell) <= rank(ell) + 1 for ell in range(1, 2**20 + 1))
    ok &= all(q_star(ell, s) == q_star_fast(ell, s) for ell in range(1, 10**5 + 1) for s in (EXISTS, FORALL))
    ok &= all(q_star(2**k) == k + 1 for k in range(21))
    verdict(capsys, 2, "rank <= q* <= rank + 1", ok, time.perf_counter() - start, 10)


def test_criterion_03_cma(capsys):
    start = time.perf_counter()
    ok = True
    for ell in range(1, 65):
        left, right = make_order_instance(ell, 2 * ell + 2)
        for side in (EXISTS, FORALL):
            strategy = cma_strategy(ell, side)
            res = play(left, right, strategy, len(strategy.pattern))
            ok &= res.won_at == q_star(ell, side) and res.pattern == strategy.pattern
    verdict(capsys, 3, "CMA wins in exactly q*(ell, side) rounds", ok, time.perf_counter() - start, 60)


def test_criterion_04_synthesis(capsys):
    start = time.perf_counter()
    ok = True
    for ell in range(1, 17):
        left, right = make_order_instance(ell, 4 * ell)
        for side in (EXISTS, FORALL):
            res = play(left, right, cma_strategy(ell, side), q_star(ell, side))
            f = synthesize_from_trace(res.trace)
            ok &= qcount(f) == len(res.pattern) == q_star(ell, side)
            ok &= separates(f, left, right)
    verdict(capsys, 4, "synthesized sentences separate with q* quantifiers", ok, time.perf_counter() - start, 120)


def test_criterion_05_alpha_epsilon(capsys):
    start = time.perf_counter()
    ev = Evaluator()
    failures = 0
    for ell in range(1, 33):
        sentences = [build_alpha(ell)] + ([build_epsilon(ell)] if ell >= 2 else [])
        for f in sentences:
            truth = [n for n in range(1, 101) if ev.value(f, order_board(n))]
            failures += truth != list(range(1, ell + 1))
    verdict(capsys, 5, "alpha/epsilon oracles for ell <= 32", failures == 0, time.perf_counter() - start, 30)


def test_criterion_06_one_vs_one(capsys):
    start = time.perf_counter()
    rng = random.Random(0)
    ok = True
    for n in (8, 32, 128, 256):
        for _ in range(200):
            w = "".join(rng.choice("01") for _ in range(n))
            v = w
            while v == w:
                v = "".join(rng.choice("01") for _ in range(n))
            left, right = {string_board(w)}, {string_board(v)}
            strategy = string_one_vs_one(w, v)
            res = play(left, right, strategy, len(strategy.pattern))
            ok &= res.won and res.won_at <= ceil_log(n, 2) + 6
            if n <= 32:
                ok &= separates(synthesize_from_trace(res.trace), left, right)
    verdict(capsys, 6, "one-vs-one within ceil(log n) + 6 rounds", ok, time.perf_counter() - start, 120)


def test_criterion_07_hard_pair(capsys):
    start = time.perf_counter()
    ok = True
    for k in (2, 3):
        w, v = hard_pair(k)
        lower = math.floor(math.log2(2**k + 2))
        ok &= not solve_ms({string_board(w)}, {string_board(v)}, lower - 1).winnable
    verdict(capsys, 7, "hard pair needs floor(log n) rounds", ok, time.perf_counter() - start, 120)


def test_criterion_08_one_vs_all(capsys):
    start = time.perf_counter()
    rng = random.Random(0)
    params = StrategyParams(t=3)
    ok = True
    for n in (6, 8, 10):
        m = max(ceil_log(n, 3), min_m(n))
        for _ in range(3):
            w = "".join(rng.choice("01") for _ in range(n))
            right = string_complement([w], n)
            ok &= len(right) == 2**n - 1
            strategy = string_one_vs_all(w, params)
            res = play({string_board(w)}, right, strategy, len(strategy.pattern))
            ok &= res.won and res.won_at <= 1 + m + ceil_log(n, 2) + 4
    verdict(capsys, 8, "one-vs-all strings within 1 + m + ceil(log n) + 4", ok, time.perf_counter() - start, 300)


def test_criterion_09_any_vs_any(capsys):
    start = time.perf_counter()
    rng = random.Random(0)
    params = StrategyParams(t=3, r_real=Fraction(5, 2))
    words = ["".join(w) for w in itertools.product("01", repeat=8)]
    ok = True
    for _ in range(20):
        A = sorted(rng.sample(words, rng.randint(1, len(words) - 1)))
        B = sorted(set(words) - set(A))
        m, m2 = max(4, min_m(len(A))), max(2, min_m(8))
        strategy = string_any_vs_any(A, B, params)
        res = play(string_set(A), string_set(B), strategy, len(strategy.pattern))
        ok &= res.won and res.won_at <= m + 1 + m2 + ceil_log(8, 2) + 4
    verdict(capsys, 9, "any-vs-any n = 8 within the structural bound", ok, time.perf_counter() - start, 600)


def test_criterion_10_numeric(capsys):
    start = time.perf_counter()
    ok = all(counting_lower_bound(n) >= n / math.log2(n) for n in range(64, 4097))
    N = stirling_threshold(3)
    ok &= math.factorial(ceil_log(N - 1, 3)) < N - 1
    ok &= all(math.factorial(ceil_log(n, 3)) >= n for n in range(N, N + 10**4 + 1))
    R = realr_threshold(Fraction(5, 2))
    ok &= all(realr_holds(n, Fraction(5, 2)) for n in range(R, R + 201))
    verdict(capsys, 10, f"numeric thresholds (stirling {N}, real base {R})", ok, time.perf_counter() - start, 30)


def test_criterion_11_ef(capsys):
    start = time.perf_counter()
    caps = Caps(boards=20, universe=40, rounds=6)
    values = [solve_ef(*make_order_instance(ell, 2 * ell + 2), 5, caps) for ell in range(1, 7)]
    ok = values == [1 + math.floor(math.log2(ell)) for ell in range(1, 7)]
    verdict(capsys, 11, f"EF rank 1 + floor(log ell) {values}", ok, time.perf_counter() - start, 300)


def micro_instance(rng):
    """Small disjoint order or string sets, at most three boards per side."""
    if rng.random() < 0.5:
        lengths = rng.sample(range(1, 6), rng.randint(2, 5))
        cut = rng.randint(1, len(lengths) - 1)
        return {order_board(i) for i in lengths[:cut][:3]}, {order_board(i) for i in lengths[cut:][:3]}
    n = rng.randint(2, 4)
    a, b = rng.choice("01"), rng.choice("01")
    words = ["".join(w) for w in itertools.product("01", repeat=n)]
    shared = [w for w in words if w[0] == a and w[-1] == b]
    pool = shared if len(shared) >= 2 else words
    chosen = rng.sample(pool, rng.randint(2, min(6, len(pool))))
    cut = rng.randint(1, len(chosen) - 1)
    return {string_board(w) for w in chosen[:cut][:3]}, {string_board(w) for w in chosen[cut:][:3]}


def test_criterion_12_prune_soundness(capsys):
    start = time.perf_counter()
    rng = random.Random(0)
    ok = True
    for _ in range(50):
        left, right = micro_instance(rng)
        pruned = solve_ms(left, right, 4, prune=True)
        full = solve_ms(left, right, 4, prune=False)
        ok &= (pruned.winnable, pruned.rounds, pruned.pattern) == (full.winnable, full.rounds, full.pattern)
        r = pruned.rounds if pruned.winnable else 4
        ok &= winning_patterns(left, right, r, prune=True) == winning_patterns(left, right, r, prune=False)
    verdict(capsys, 12, "solver values equal with and without pruning", ok, time.perf_counter() - start, 600)
