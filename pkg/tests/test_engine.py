import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgames.core import StrategyError, UsageError, make_order_instance, order_board, string_board, type_key
from msgames.engine import (
    EXISTS,
    FORALL,
    GameState,
    Strategy,
    check_pattern,
    flip,
    initial_state,
    is_subsequence,
    is_won,
    play,
    replay,
    spoiler_move,
)
from msgames.strategies import cma_strategy, hard_pair, string_one_vs_one


def state(left, right):
    return initial_state(left, right)


class FixedStrategy(Strategy):
    """Plays a fixed position per round on the pattern-designated side."""

    def __init__(self, pattern, moves):
        self.pattern = pattern
        self.moves = moves
        self.name = "fixed"

    def choose(self, board, state):
        return min(self.moves[state.round], board.size - 1)


def test_two_universal_moves_win_on_short_orders():
    s = state({order_board(2)}, {order_board(3)})
    s = spoiler_move(s, FORALL, {order_board(3): 1}, True)
    assert not is_won(s)
    s = spoiler_move(s, FORALL, lambda b: 2, True)
    assert is_won(s)
    assert s.pattern == "AA" and s.round == 2


def test_one_universal_move_wins_against_length_one():
    s = state({order_board(1)}, {order_board(2)})
    s = spoiler_move(s, FORALL, {order_board(2): 1}, True)
    assert is_won(s)


def test_oblivious_growth_bound():
    right = {order_board(4), order_board(5)}
    s = state({order_board(3)}, right)
    after = spoiler_move(s, EXISTS, lambda b: 1, False)
    assert len(after.right) <= len(right) * 6
    assert len(after.right) == 5 + 6


def test_chooser_out_of_range():
    s = state({order_board(1)}, {order_board(2)})
    with pytest.raises(UsageError):
        spoiler_move(s, EXISTS, lambda b: 5, True)
    with pytest.raises(UsageError):
        spoiler_move(s, "X", lambda b: 0, True)


def test_is_won_examples():
    assert not is_won(state({order_board(1)}, {order_board(2)}))
    b = string_board("0110")
    assert not is_won(state({b}, {b}))


def test_initial_state_rejects_pebbled_boards():
    with pytest.raises(UsageError):
        initial_state({order_board(2).extend(1)}, {order_board(3)})


def test_play_cma_five_forall():
    left, right = make_order_instance(5, 12)
    res = play(left, right, cma_strategy(5, FORALL), 10)
    assert res.won_at == 3 and res.pattern == "AEA"


def test_play_cma_one_forall():
    left, right = make_order_instance(1, 4)
    res = play(left, right, cma_strategy(1, FORALL), 5)
    assert res.won_at == 1 and res.pattern == "A"


def test_play_one_vs_one_hard_pair():
    w, v = hard_pair(2)
    res = play({string_board(w)}, {string_board(v)}, string_one_vs_one(w, v), 20)
    assert res.won and res.won_at <= 3 + 6


def test_play_raises_when_strategy_runs_out():
    left, right = make_order_instance(4, 10)
    with pytest.raises(StrategyError):
        play(left, right, FixedStrategy("A", {0: 0}), 3)


def test_play_stops_at_budget():
    left, right = make_order_instance(6)
    res = play(left, right, cma_strategy(6), 2)
    assert res.won_at is None and len(res.trace.rounds) == 2


def test_trace_json_shape():
    left, right = make_order_instance(2)
    res = play(left, right, cma_strategy(2, FORALL), 5)
    data = json.loads(res.trace.dumps())
    assert set(data) == {"rounds", "won_at"}
    assert data["won_at"] == 2
    first = data["rounds"][0]
    assert first["side"] == "A"
    assert all(set(c) == {"board_id", "position"} for c in first["choices"])


def test_replay_determinism_and_reproduction():
    left, right = make_order_instance(9)
    a = play(left, right, cma_strategy(9), 10)
    b = play(left, right, cma_strategy(9), 10)
    assert a.trace.dumps() == b.trace.dumps()
    states = replay(a.trace, cma_strategy(9))
    assert states == [r.state for r in a.trace.rounds]


def test_replay_unreduced_trace_without_strategy():
    left, right = make_order_instance(3)
    res = play(left, right, cma_strategy(3), 5, reduce=False)
    assert replay(res.trace) == [r.state for r in res.trace.rounds]


def test_pattern_helpers():
    assert flip("EAA") == "AEE"
    assert is_subsequence("EA", "AEA") and not is_subsequence("AA", "EAE")
    assert check_pattern("EAEA") == "EAEA"
    with pytest.raises(UsageError):
        check_pattern("EX")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31), st.booleans())
def test_moves_keep_pebble_counts_and_pruned_types_balanced(ell, seed, prune_flag):
    rng = random.Random(seed)
    left, right = make_order_instance(ell)
    s = GameState(frozenset(left), frozenset(right))
    for _ in range(3):
        side = rng.choice([EXISTS, FORALL])
        s = spoiler_move(s, side, lambda b: rng.randrange(b.size), prune_flag)
        assert {len(b.pebbles) for b in s.left | s.right} <= {s.round}
        if prune_flag:
            assert {type_key(b) for b in s.left} == {type_key(b) for b in s.right}
        assert len(s.pattern) == s.round


@pytest.mark.parametrize("ell", range(1, 13))
@pytest.mark.parametrize("side", [EXISTS, FORALL])
def test_recorded_pattern_equals_declared(ell, side):
    strategy = cma_strategy(ell, side)
    left, right = make_order_instance(ell)
    res = play(left, right, strategy, len(strategy.pattern))
    assert res.pattern == strategy.pattern
