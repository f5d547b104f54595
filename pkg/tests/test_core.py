import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msgames.core import (
    ORDER,
    STRING,
    Board,
    ResourceError,
    UsageError,
    all_placements,
    atomic_type,
    make_order_instance,
    matches,
    order_board,
    parse_board_id,
    parse_string_set,
    prune,
    string_board,
    string_complement,
    type_key,
)


def partial_iso(a: Board, b: Board) -> bool:
    """Independent matching oracle: compare every atom over the labeled points."""
    pa = [0, a.size - 1, *a.pebbles]
    pb = [0, b.size - 1, *b.pebbles]
    for i, j in itertools.product(range(len(pa)), repeat=2):
        if (pa[i] < pa[j]) != (pb[i] < pb[j]) or (pa[i] == pa[j]) != (pb[i] == pb[j]):
            return False
    if a.bits is not None:
        return all(a.bits[x] == b.bits[y] for x, y in zip(pa, pb))
    return True


@st.composite
def boards(draw, kind=None, pebbles=None):
    kind = kind or draw(st.sampled_from([ORDER, STRING]))
    k = draw(st.integers(0, 3)) if pebbles is None else pebbles
    if kind == ORDER:
        size = draw(st.integers(2, 8))
        bits = None
    else:
        size = draw(st.integers(1, 6))
        bits = tuple(draw(st.lists(st.integers(0, 1), min_size=size, max_size=size)))
    peb = tuple(draw(st.lists(st.integers(0, size - 1), min_size=k, max_size=k)))
    return Board(kind, size, bits, peb)


def test_atomic_type_order_interior_pebble():
    assert atomic_type(order_board(2).extend(1)) == "min < p1 < max"


def test_atomic_type_ignores_gaps():
    assert atomic_type(order_board(3).extend(1)) == atomic_type(order_board(2).extend(1))


def test_atomic_type_string():
    assert atomic_type(string_board("01").extend(0)) == "min=p1 < max; S(min)=0, S(max)=1"


def test_atomic_type_groups_pebbles_in_label_order():
    b = order_board(3).extend(3).extend(1).extend(1)
    assert atomic_type(b) == "min < p2=p3 < p1=max"


def test_matches_identical_boards():
    b = order_board(4).extend(2)
    assert matches(b, b)


def test_matches_same_order_type():
    assert matches(order_board(2).extend(1), order_board(3).extend(1))


def test_matches_string_bit_differs():
    assert not matches(string_board("01").extend(0), string_board("11").extend(0))


def test_matches_rejects_mismatched_pebble_counts():
    with pytest.raises(UsageError):
        matches(order_board(2), order_board(2).extend(0))


def test_matches_rejects_mixed_kinds():
    with pytest.raises(UsageError):
        matches(order_board(1), string_board("01"))


def test_all_placements_examples():
    assert [b.pebbles for b in all_placements(order_board(1))] == [(0,), (1,)]
    assert len(all_placements(string_board("0"))) == 1
    out = all_placements(order_board(3).extend(2))
    assert len(out) == 4 and all(len(b.pebbles) == 2 for b in out)


def test_prune_disjoint_types():
    left = {order_board(2).extend(1)}
    right = {order_board(3).extend(0)}
    assert prune(left, right) == (frozenset(), frozenset())


def test_prune_copies_unchanged():
    side = {order_board(2).extend(1), order_board(4).extend(0)}
    assert prune(side, set(side)) == (frozenset(side), frozenset(side))


def test_prune_rejects_mixed_rounds():
    with pytest.raises(UsageError):
        prune({order_board(2)}, {order_board(2).extend(1)})


def test_make_order_instance_examples():
    left, right = make_order_instance(1, 4)
    assert left == {order_board(1)}
    assert right == {order_board(2), order_board(3), order_board(4)}
    left, right = make_order_instance(5, 12)
    assert (len(left), len(right)) == (5, 7)
    left, right = make_order_instance(3)
    assert max(b.length for b in right) == 8


def test_make_order_instance_rejects_short_truncation():
    with pytest.raises(UsageError):
        make_order_instance(3, 3)


def test_string_complement_examples():
    assert {b.word() for b in string_complement({"00"}, 2)} == {"01", "10", "11"}
    assert {b.word() for b in string_complement(set(), 1)} == {"0", "1"}
    assert len(string_complement({"01100110"}, 8)) == 255


def test_string_complement_over_cap(monkeypatch):
    monkeypatch.setenv("MSQ_STRING_CAP", "4")
    with pytest.raises(ResourceError):
        string_complement(set(), 5)


def test_string_complement_length_mismatch():
    with pytest.raises(UsageError):
        string_complement({"0"}, 2)


def test_board_validation():
    with pytest.raises(UsageError):
        Board(ORDER, 1)
    with pytest.raises(UsageError):
        Board(STRING, 2, (0,))
    with pytest.raises(UsageError):
        order_board(2).extend(3)
    with pytest.raises(UsageError):
        string_board("012")


def test_parse_string_set_comments_and_lengths():
    assert parse_string_set("# header\n0101\n\n1100\n") == ["0101", "1100"]
    with pytest.raises(UsageError):
        parse_string_set("01\n011\n")
    with pytest.raises(UsageError):
        parse_string_set("0a1\n")


def test_board_ids():
    assert order_board(3).extend(1).extend(2).board_id() == "L3|1,2"
    assert string_board("0110").extend(0).board_id() == "S0110|0"


@given(boards())
def test_board_id_round_trips(b):
    assert parse_board_id(b.board_id()) == b


def test_matches_agrees_with_atom_comparison_on_random_pairs():
    rng = random.Random(0)
    for _ in range(10_000):
        kind = rng.choice([ORDER, STRING])
        k = rng.randint(0, 3)
        pair = []
        for _ in range(2):
            if kind == ORDER:
                size = rng.randint(2, 7)
                b = Board(ORDER, size)
            else:
                size = rng.randint(1, 5)
                b = Board(STRING, size, tuple(rng.randint(0, 1) for _ in range(size)))
            pair.append(Board(kind, size, b.bits, tuple(rng.randrange(size) for _ in range(k))))
        a, b = pair
        assert matches(a, b) == partial_iso(a, b) == (atomic_type(a) == atomic_type(b))
        assert matches(a, b) == matches(b, a)


@given(st.data())
def test_matching_is_antitone_in_pebbles(data):
    kind = data.draw(st.sampled_from([ORDER, STRING]))
    k = data.draw(st.integers(0, 2))
    a = data.draw(boards(kind, k))
    b = data.draw(boards(kind, k))
    x = data.draw(st.integers(0, a.size - 1))
    y = data.draw(st.integers(0, b.size - 1))
    if matches(a.extend(x), b.extend(y)):
        assert matches(a, b)


@given(st.lists(boards(ORDER, 1), max_size=6), st.lists(boards(ORDER, 1), max_size=6))
def test_prune_idempotent_and_balanced(left, right):
    once = prune(left, right)
    assert prune(*once) == once
    assert {type_key(b) for b in once[0]} == {type_key(b) for b in once[1]}


@settings(max_examples=50)
@given(boards())
def test_all_placements_distinct(b):
    out = all_placements(b)
    assert len(out) == b.size == len(set(out))
