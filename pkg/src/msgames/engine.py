"""The multi-structural game: Spoiler moves, oblivious Duplicator, win detection and traces."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .core import (
    ORDER,
    Board,
    PreconditionError,
    StrategyError,
    UsageError,
    board_sort_key,
    type_key,
)

EXISTS = "E"
FORALL = "A"

Chooser = Callable[[Board], int] | Mapping[Board, int]


def check_pattern(pattern: str) -> str:
    """Validate a pattern string over {E, A} and return it."""
    if any(c not in "EA" for c in pattern):
        raise UsageError(f"pattern must be a string over E/A, got {pattern!r}")
    return pattern


def flip(pattern: str) -> str:
    """Swap E and A in a pattern (the same game with the sides exchanged)."""
    return pattern.translate(str.maketrans("EA", "AE"))


def is_subsequence(sub: str, master: str) -> bool:
    it = iter(master)
    return all(c in it for c in sub)


@dataclass(frozen=True)
class GameState:
    """Both board sets after ``round`` rounds; ``pattern`` records the sides played."""

    left: frozenset[Board]
    right: frozenset[Board]
    round: int = 0
    pattern: str = ""

    def sorted_left(self) -> list[Board]:
        return sorted(self.left, key=board_sort_key)

    def sorted_right(self) -> list[Board]:
        return sorted(self.right, key=board_sort_key)

    def summary(self) -> str:
        return (
            f"round {self.round}, pattern {self.pattern or '-'}, "
            f"{len(self.left)} left / {len(self.right)} right boards"
        )


@dataclass
class RoundRecord:
    """One round: side, Spoiler's choice on each board, resulting state, pre-prune type sets."""

    side: str
    choices: list[tuple[Board, int]]
    state: GameState
    spoiler_types: frozenset
    duplicator_types: frozenset

    @property
    def left_types(self) -> frozenset:
        return self.spoiler_types if self.side == EXISTS else self.duplicator_types

    @property
    def right_types(self) -> frozenset:
        return self.duplicator_types if self.side == EXISTS else self.spoiler_types


@dataclass
class Trace:
    """Full record of a play, sufficient for replay and sentence synthesis."""

    initial: GameState
    rounds: list[RoundRecord] = field(default_factory=list)
    won_at: int | None = None
    pruned: bool = True
    reduced: bool = False

    @property
    def pattern(self) -> str:
        return "".join(r.side for r in self.rounds)

    @property
    def final(self) -> GameState:
        return self.rounds[-1].state if self.rounds else self.initial

    def to_json(self) -> dict:
        return {
            "rounds": [
                {
                    "side": r.side,
                    "choices": [
                        {"board_id": b.board_id(), "position": x}
                        for b, x in sorted(r.choices, key=lambda c: board_sort_key(c[0]))
                    ],
                }
                for r in self.rounds
            ],
            "won_at": self.won_at,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class Strategy:
    """A deterministic Spoiler: picks the side for each round and a position per board.

    Subclasses implement :meth:`side` and :meth:`choose`; both must depend only on
    the content of the boards.  ``pattern`` is the declared pattern (or None).
    A strategy may also provide :meth:`reduce`, a type-preserving shrink of
    board regions it will never play in again; ``play`` applies it when asked.
    """

    name = "strategy"
    pattern: str | None = None
    reduces = False

    def side(self, state: GameState) -> str | None:
        if self.pattern is None or state.round >= len(self.pattern):
            return None
        return self.pattern[state.round]

    def choose(self, board: Board, state: GameState) -> int:
        raise NotImplementedError

    def reduce(self, board: Board) -> Board:
        return board


def child_classes(b: Board) -> list[tuple[tuple, Iterable[int]]]:
    """Group the one-pebble extensions of ``b`` by atomic type: ``(type_key, positions)`` pairs."""
    pos = (0, b.size - 1) + b.pebbles
    distinct = sorted(set(pos))
    rank = {v: i for i, v in enumerate(distinct)}
    ranks = tuple(rank[v] for v in pos)
    bits = None if b.bits is None else tuple(b.bits[v] for v in distinct)
    out: list[tuple[tuple, Iterable[int]]] = []
    for i, v in enumerate(distinct):
        out.append(((ranks + (i,), bits), (v,)))
        if i + 1 < len(distinct) and distinct[i + 1] - v >= 2:
            shifted = tuple(r + (r > i) for r in ranks) + (i + 1,)
            gap = range(v + 1, distinct[i + 1])
            if bits is None:
                out.append(((shifted, None), gap))
            else:
                for c in (0, 1):
                    xs = [x for x in gap if b.bits[x] == c]
                    if xs:
                        out.append(((shifted, bits[: i + 1] + (c,) + bits[i + 1 :]), xs))
    return out


def _resolve(chooser: Chooser) -> Callable[[Board], int]:
    if callable(chooser):
        return chooser
    mapping = chooser
    return lambda b: mapping[b]


def advance(
    state: GameState, side: str, chooser: Chooser, prune_flag: bool = True
) -> tuple[GameState, RoundRecord]:
    """Play one round and return the new state together with its record."""
    if side not in (EXISTS, FORALL):
        raise UsageError(f"side must be E or A, got {side!r}")
    pick = _resolve(chooser)
    mover, other = (state.left, state.right) if side == EXISTS else (state.right, state.left)
    choices = []
    moved: dict[Board, tuple] = {}
    for b in mover:
        x = pick(b)
        if not isinstance(x, int) or not 0 <= x < b.size:
            raise UsageError(f"chosen position {x!r} out of range for {b.board_id()}")
        choices.append((b, x))
        nb = b.extend(x)
        moved[nb] = type_key(nb)
    spoiler_types = frozenset(moved.values())
    dup_types = set()
    responses = []
    for b in other:
        for key, xs in child_classes(b):
            dup_types.add(key)
            if not prune_flag or key in spoiler_types:
                responses.extend(b.extend(x) for x in xs)
    dup_types = frozenset(dup_types)
    if prune_flag:
        mover_after = frozenset(nb for nb, k in moved.items() if k in dup_types)
    else:
        mover_after = frozenset(moved)
    other_after = frozenset(responses)
    if side == EXISTS:
        left, right = mover_after, other_after
    else:
        left, right = other_after, mover_after
    new = GameState(left, right, state.round + 1, state.pattern + side)
    record = RoundRecord(side, choices, new, spoiler_types, dup_types)
    return new, record


def spoiler_move(state: GameState, side: str, chooser: Chooser, prune_flag: bool = True) -> GameState:
    """Spoiler pebbles every board on ``side``; the oblivious Duplicator answers everywhere."""
    return advance(state, side, chooser, prune_flag)[0]


def is_won(state: GameState) -> bool:
    """True iff no left board matches any right board."""
    return not ({type_key(b) for b in state.left} & {type_key(b) for b in state.right})


def initial_state(left: Iterable[Board], right: Iterable[Board]) -> GameState:
    left, right = frozenset(left), frozenset(right)
    rounds = {len(b.pebbles) for b in left | right}
    if rounds - {0}:
        raise UsageError("initial boards must be unpebbled")
    return GameState(left, right, 0, "")


def _prune_state(state: GameState) -> GameState:
    lt = {type_key(b) for b in state.left}
    rt = {type_key(b) for b in state.right}
    common = lt & rt
    return GameState(
        frozenset(b for b in state.left if type_key(b) in common),
        frozenset(b for b in state.right if type_key(b) in common),
        state.round,
        state.pattern,
    )


def _apply_reduce(state: GameState, strategy: Strategy) -> GameState:
    red = strategy.reduce
    return GameState(
        frozenset(red(b) for b in state.left),
        frozenset(red(b) for b in state.right),
        state.round,
        state.pattern,
    )


@dataclass
class PlayResult:
    trace: Trace
    won_at: int | None

    @property
    def won(self) -> bool:
        return self.won_at is not None

    @property
    def pattern(self) -> str:
        return self.trace.pattern


def play(
    left: Iterable[Board],
    right: Iterable[Board],
    strategy: Strategy,
    max_rounds: int,
    prune: bool = True,
    reduce: bool = True,
) -> PlayResult:
    """Run ``strategy`` against the oblivious Duplicator for at most ``max_rounds`` rounds."""
    start = initial_state(left, right)
    use_reduce = reduce and strategy.reduces
    trace = Trace(start, pruned=prune, reduced=use_reduce)
    if is_won(start):
        trace.won_at = 0
        return PlayResult(trace, 0)
    state = _prune_state(start) if prune else start
    for _ in range(max_rounds):
        side = strategy.side(state)
        if side is None:
            raise StrategyError(f"{strategy.name} has no move at {state.summary()}")
        state, record = advance(state, side, lambda b: strategy.choose(b, state), prune)
        if use_reduce:
            state = _apply_reduce(state, strategy)
            record.state = state
        trace.rounds.append(record)
        if is_won(state):
            trace.won_at = state.round
            break
    return PlayResult(trace, trace.won_at)


def replay(trace: Trace, strategy: Strategy | None = None) -> list[GameState]:
    """Re-apply the recorded choices and return every state, checking each against the record."""
    if trace.reduced and strategy is None:
        raise PreconditionError("replaying a reduced trace needs the strategy that reduced it")
    state = _prune_state(trace.initial) if trace.pruned else trace.initial
    states = []
    for r in trace.rounds:
        state, _ = advance(state, r.side, dict(r.choices), trace.pruned)
        if trace.reduced:
            state = _apply_reduce(state, strategy)
        if state != r.state:
            raise PreconditionError(f"replay diverged at round {state.round}")
        states.append(state)
    return states


def is_order_state(state: GameState) -> bool:
    return all(b.kind == ORDER for b in state.left | state.right)
