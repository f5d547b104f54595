"""Exact values of small games: minimal Spoiler rounds (MS game) and pairwise EF rank.

Both searches shorten long gaps on linear orders: with r rounds left, a gap of
more than 2^r between consecutive labeled points behaves like a gap of exactly
2^r (rank-r equivalence of linear orders composes over ordered sums), so every
order board is capped to that length before memoization.  The MS search decides
one pattern at a time: it splits a state into components of equal atomic type,
which never interact, and Spoiler wins exactly when he wins every component.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable

from .core import ORDER, Board, ResourceError, StrategyError, UsageError, board_sort_key, type_key, type_key_after
from .engine import EXISTS, FORALL, GameState, _prune_state, is_won, spoiler_move

DEFAULT_CAPS = (4, 12, 6)


@dataclass(frozen=True)
class Caps:
    boards: int
    universe: int
    rounds: int


def current_caps() -> Caps:
    """Caps from the ``MSQ_CAPS`` environment variable (``boards,universe,rounds``) or defaults."""
    raw = os.environ.get("MSQ_CAPS")
    if not raw:
        return Caps(*DEFAULT_CAPS)
    try:
        parts = [int(p) for p in raw.split(",")]
    except ValueError as exc:
        raise UsageError(f"MSQ_CAPS must be three integers, got {raw!r}") from exc
    if len(parts) != 3:
        raise UsageError(f"MSQ_CAPS must be three integers, got {raw!r}")
    return Caps(*parts)


def check_caps(
    left: Iterable[Board], right: Iterable[Board], max_rounds: int, caps: Caps | None = None, count_boards: bool = True
) -> None:
    """Raise ResourceError if the instance, after gap capping and deduplication, exceeds the caps."""
    caps = caps or current_caps()
    if max_rounds > caps.rounds:
        raise ResourceError(f"{max_rounds} rounds exceeds cap {caps.rounds} (dimension: rounds)")
    left = {cap_board(b, max_rounds) for b in left}
    right = {cap_board(b, max_rounds) for b in right}
    if count_boards and max(len(left), len(right)) > caps.boards:
        raise ResourceError(f"{max(len(left), len(right))} boards on one side exceeds cap {caps.boards} (dimension: boards)")
    biggest = max((b.size for b in left | right), default=0)
    if biggest > caps.universe:
        raise ResourceError(f"universe of size {biggest} exceeds cap {caps.universe} (dimension: universe)")


def cap_board(b: Board, rounds_left: int) -> Board:
    """Shorten every gap of an order board to at most 2^rounds_left."""
    if b.kind != ORDER or rounds_left >= 30:
        return b
    cap = 1 << rounds_left
    points = sorted(set((0, b.size - 1) + b.pebbles))
    new = {points[0]: 0}
    at = 0
    changed = False
    for u, v in zip(points, points[1:]):
        g = v - u
        if g > cap:
            g, changed = cap, True
        at += g
        new[v] = at
    if not changed:
        return b
    return Board(ORDER, at + 1, None, tuple(new[p] for p in b.pebbles))


def pattern_from_index(p: int, r: int) -> str:
    return "".join(FORALL if (p >> (r - 1 - i)) & 1 else EXISTS for i in range(r))


class MSSearch:
    """Decides whether Spoiler wins an MS game state with a fixed pattern.

    Results are memoized on the gap-capped state and the remaining pattern.
    With ``prune`` a board whose move can be left without any matching answer
    is removed by that move, and unmatched boards are dropped; without it
    every move is tried and unmatched boards are carried to the end of play.
    """

    def __init__(self, prune: bool = True) -> None:
        self.prune = prune
        self.memo: dict[tuple, bool] = {}

    def win(self, left: Iterable[Board], right: Iterable[Board], pattern: str) -> bool:
        r = len(pattern)
        L = frozenset(cap_board(b, r) for b in left)
        R = frozenset(cap_board(b, r) for b in right)
        key = (L, R, pattern)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._win(L, R, pattern)
            self.memo[key] = hit
        return hit

    def components(self, L: frozenset, R: frozenset) -> list[tuple[frozenset, frozenset]]:
        """Split a state by atomic type; boards of different types never interact again."""
        lt: dict[tuple, set] = {}
        rt: dict[tuple, set] = {}
        for b in L:
            lt.setdefault(type_key(b), set()).add(b)
        for b in R:
            rt.setdefault(type_key(b), set()).add(b)
        keys = lt.keys() & rt.keys() if self.prune else lt.keys() | rt.keys()
        comps = [(frozenset(lt.get(k, ())), frozenset(rt.get(k, ()))) for k in keys]
        comps.sort(key=lambda c: (len(c[0]) + len(c[1]), sorted(map(board_sort_key, c[0] | c[1]))))
        return comps

    def _win(self, L: frozenset, R: frozenset, pattern: str) -> bool:
        if not pattern:
            return not ({type_key(b) for b in L} & {type_key(b) for b in R})
        comps = self.components(L, R)
        if len(comps) != 1:
            return all(self.win(cl, cr, pattern) for cl, cr in comps)
        cl, cr = comps[0]
        side, rest = pattern[0], pattern[1:]
        if side == EXISTS:
            return self._search(cl, cr, rest, True) is not None
        return self._search(cr, cl, rest, False) is not None

    def _expand(self, other: Iterable[Board], r: int) -> dict[tuple, list[Board]]:
        groups: dict[tuple, set[Board]] = {}
        for b in other:
            for x in range(b.size):
                c = cap_board(b.extend(x), r)
                groups.setdefault(type_key(c), set()).add(c)
        return {k: sorted(v, key=board_sort_key) for k, v in groups.items()}

    def _options(self, mover: Iterable[Board], groups: dict, r: int) -> list:
        """Per mover board, its distinct candidate (position, child, type) triples, best first.

        Positions whose children coincide after gap capping are interchangeable, so
        only the first is kept.
        """
        table = []
        for b in sorted(mover, key=board_sort_key):
            opts = []
            seen = set()
            for x in range(b.size):
                c = cap_board(b.extend(x), r)
                if c in seen:
                    continue
                seen.add(c)
                k = type_key(c)
                if k not in groups and self.prune:
                    # A move with no matching answer removes the board: always best.
                    break
                opts.append((x, c, k))
            else:
                opts.sort(key=lambda o: len(groups.get(o[2], ())))
                table.append((b, opts))
        table.sort(key=lambda e: len(e[1]))
        return table

    def _search(self, mover: frozenset, other: frozenset, rest: str, mover_is_left: bool) -> dict[Board, int] | None:
        """An assignment on ``mover`` after which Spoiler wins ``rest``, or None.

        Boards are assigned one at a time; the group that received the new child
        is re-checked at once, since adding boards to a group can only hurt Spoiler.
        """
        r = len(rest)
        groups = self._expand(other, r)
        table = self._options(mover, groups, r)
        chosen: dict[tuple, list[Board]] = {}
        assign: dict[Board, int] = {}

        def group_wins(k: tuple) -> bool:
            moved, dup = chosen[k], groups.get(k, [])
            L, R = (moved, dup) if mover_is_left else (dup, moved)
            return self.win(L, R, rest)

        def rec(i: int) -> bool:
            if i == len(table):
                if self.prune:
                    return True
                # Duplicator groups nobody moved into are still part of the state.
                return all(self.win(*(((), g) if mover_is_left else (g, ())), rest) for k, g in groups.items() if k not in chosen)
            b, opts = table[i]
            for x, c, k in opts:
                group = chosen.setdefault(k, [])
                group.append(c)
                assign[b] = x
                ok = group_wins(k) and rec(i + 1)
                group.pop()
                if not group:
                    del chosen[k]
                if ok:
                    return True
            return False

        if not rec(0):
            return None
        picks = {b: self._killing_move(b, groups) for b in mover}
        picks.update(assign)
        return picks

    def find_move(self, mover: frozenset, other: frozenset, rest: str, mover_is_left: bool) -> dict[Board, int]:
        """An assignment on ``mover`` after which Spoiler wins ``rest``."""
        picks = self._search(mover, other, rest, mover_is_left)
        if picks is None:
            raise StrategyError(f"no move wins the remaining pattern {rest!r}")
        return picks

    def _killing_move(self, b: Board, groups: dict) -> int:
        for x in range(b.size):
            if type_key_after(b, x) not in groups:
                return x
        return 0


@dataclass
class SolveResult:
    """Outcome of an exact MS search within a round budget."""

    winnable: bool
    rounds: int | None
    pattern: str | None
    variation: list[dict] = field(default_factory=list)
    max_rounds: int = 0
    first_side: str | None = None

    def to_json(self) -> dict:
        return {
            "winnable": self.winnable,
            "rounds": self.rounds,
            "pattern": self.pattern,
            "variation": self.variation,
            "max_rounds": self.max_rounds,
            "first_side": self.first_side,
        }


def _first_side(side: str | None) -> str | None:
    table = {None: None, "E": EXISTS, "A": FORALL, "exists": EXISTS, "forall": FORALL}
    if side not in table:
        raise UsageError(f"first side must be exists or forall, got {side!r}")
    return table[side]


def solve_ms(
    left: Iterable[Board],
    right: Iterable[Board],
    max_rounds: int,
    first_side: str | None = None,
    prune: bool = True,
    caps: Caps | None = None,
) -> SolveResult:
    """Minimal number of rounds in which Spoiler wins, with a winning pattern and line of play."""
    left, right = frozenset(left), frozenset(right)
    if max_rounds < 0:
        raise UsageError("max_rounds must be >= 0")
    check_caps(left, right, max_rounds, caps)
    first = _first_side(first_side)
    search = MSSearch(prune)
    for r in range(max_rounds + 1):
        for p in range(1 << r):
            pattern = pattern_from_index(p, r)
            if first is not None and r and pattern[0] != first:
                continue
            if search.win(left, right, pattern):
                return SolveResult(True, r, pattern, _variation(search, left, right, pattern), max_rounds, first)
    return SolveResult(False, None, None, [], max_rounds, first)


def winning_patterns(left: Iterable[Board], right: Iterable[Board], rounds: int, prune: bool = True) -> list[str]:
    """Every pattern of length ``rounds`` with which Spoiler wins, in lexicographic order (E before A)."""
    search = MSSearch(prune)
    return [pattern_from_index(p, rounds) for p in range(1 << rounds) if search.win(left, right, pattern_from_index(p, rounds))]


def _variation(search: MSSearch, left: frozenset, right: frozenset, pattern: str) -> list[dict]:
    """Replay one winning line for ``pattern`` against the oblivious Duplicator."""
    state = GameState(left, right, 0, "")
    out = []
    for i, side in enumerate(pattern):
        if is_won(state):
            break
        rest = pattern[i + 1 :]
        L, R = state.left, state.right
        if search.prune:
            state = _prune_state(state)
            L, R = state.left, state.right
        picks: dict[Board, int] = {}
        for cl, cr in search.components(L, R):
            if cl and cr:
                mover, other = (cl, cr) if side == EXISTS else (cr, cl)
                picks.update(search.find_move(mover, other, rest, side == EXISTS))
        mover = L if side == EXISTS else R
        for b in mover:
            picks.setdefault(b, 0)
        state = spoiler_move(state, side, picks, search.prune)
        out.append({"side": side, "choices": {b.board_id(): x for b, x in sorted(picks.items(), key=lambda e: board_sort_key(e[0]))}})
    return out


# ---------------------------------------------------------------------------
# Pairwise EF games


class EFSearch:
    """Spoiler wins of k-round EF games on pebbled board pairs, memoized on capped pairs."""

    def __init__(self) -> None:
        self.memo: dict[tuple, bool] = {}

    def wins(self, a: Board, b: Board, k: int) -> bool:
        if type_key(a) != type_key(b):
            return True
        if k == 0:
            return False
        a, b = cap_board(a, k), cap_board(b, k)
        key = (a, b, k)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._wins(a, b, k)
            self.memo[key] = hit
        return hit

    def _wins(self, a: Board, b: Board, k: int) -> bool:
        for here, there, flip in ((a, b, False), (b, a, True)):
            for x in range(here.size):
                hx = here.extend(x)
                kx = type_key(hx)
                if all(
                    self.wins(*((hx, ty) if not flip else (ty, hx)), k - 1)
                    for ty in (there.extend(y) for y in range(there.size))
                    if type_key(ty) == kx
                ):
                    return True
        return False

    def rank(self, a: Board, b: Board, max_rounds: int) -> int | None:
        for k in range(max_rounds + 1):
            if self.wins(a, b, k):
                return k
        return None


def solve_ef(
    left: Iterable[Board], right: Iterable[Board], max_rounds: int, caps: Caps | None = None
) -> int | None:
    """Max over pairs of the least rank k with Spoiler winning the k-round EF game (None if over budget)."""
    left, right = frozenset(left), frozenset(right)
    check_caps(left, right, max_rounds, caps, count_boards=False)
    search = EFSearch()
    worst = 0
    for a in sorted(left, key=lambda x: (x.size, x.bits or ())):
        for b in sorted(right, key=lambda x: (x.size, x.bits or ())):
            k = search.rank(a, b, max_rounds)
            if k is None:
                return None
            worst = max(worst, k)
    return worst
