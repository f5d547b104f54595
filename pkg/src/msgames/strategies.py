"""Spoiler strategies for orders and strings, and the round-count bounds they achieve.

Interval strategies are compiled into *plans*: trees of split and leaf nodes
whose moves are pinned to indices of a master pattern.  A board finds its
current node by comparing its own pebbles with the node's interval, so the
choice depends only on board content.  Master rounds not used by a node are
dummy moves on the left end of the node's interval.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .core import (
    Board,
    PreconditionError,
    StrategyError,
    StructuralError,
    UsageError,
    order_board,
    string_board,
    type_key,
)
from .engine import EXISTS, FORALL, GameState, Strategy, check_pattern, flip

# ---------------------------------------------------------------------------
# Round-count bounds for linear orders


def _side(side: str) -> str:
    table = {"E": "E", "A": "A", "exists": "E", "forall": "A", "best": "best"}
    if side not in table:
        raise UsageError(f"side must be E, A or best, got {side!r}")
    return table[side]


def _check_ell(ell: int) -> None:
    if not isinstance(ell, int) or ell < 1:
        raise UsageError(f"ell must be a positive integer, got {ell!r}")


def rank(ell: int) -> int:
    """Quantifier rank needed to separate L_ell from longer orders: 1 + floor(log2 ell)."""
    _check_ell(ell)
    return ell.bit_length()


@lru_cache(maxsize=None)
def _q(ell: int, side: str) -> int:
    if side == FORALL:
        if ell <= 2:
            return ell
        m, odd = divmod(ell, 2)
        if odd:
            return _q(m, EXISTS) + 1
        return max(_q(m - 1, EXISTS), _q(m, EXISTS)) + 1
    if ell == 1:
        return 2
    m, odd = divmod(ell, 2)
    if odd:
        return max(_q(m, FORALL), _q(m + 1, FORALL)) + 1
    return _q(m, FORALL) + 1


def q_star(ell: int, side: str = "best") -> int:
    """Rounds used by the closest-to-midpoint strategy on L_{<=ell} vs L_{>ell}."""
    _check_ell(ell)
    side = _side(side)
    if side == "best":
        return min(_q(ell, EXISTS), _q(ell, FORALL))
    return _q(ell, side)


def q_star_fast(ell: int, side: str = "best") -> int:
    """Closed-form-style evaluation of q_star by the four-fold reduction."""
    _check_ell(ell)
    side = _side(side)
    if side == "best":
        return min(q_star_fast(ell, EXISTS), q_star_fast(ell, FORALL))
    extra = 0
    if side == EXISTS:
        while ell >= 5:
            ell, extra = (ell + 1) // 4, extra + 2
        return extra + (2, 2, 3, 3)[ell - 1]
    while ell >= 3:
        ell, extra = (ell + 2) // 4, extra + 2
    return extra + ell


def q_star_sweep(limit: int) -> tuple[list[int], list[int]]:
    """Bottom-up arrays qa, qe with qa[ell], qe[ell] for 1 <= ell <= limit (index 0 unused)."""
    qa = [0] * (limit + 2)
    qe = [0] * (limit + 2)
    qa[1], qe[1] = 1, 2
    if limit >= 2:
        qa[2] = 2
    for ell in range(2, limit + 1):
        m, odd = divmod(ell, 2)
        qe[ell] = (max(qa[m], qa[m + 1]) if odd else qa[m]) + 1
        if ell >= 3:
            qa[ell] = (qe[m] if odd else max(qe[m - 1], qe[m])) + 1
    return qa, qe


def table_rows(max_ell: int) -> list[tuple[int, int, int, int, int]]:
    """Rows (ell, q_forall, q_exists, q_star, rank) for 1 <= ell <= max_ell."""
    if max_ell < 1:
        raise UsageError(f"table needs max >= 1, got {max_ell}")
    qa, qe = q_star_sweep(max_ell)
    return [(ell, qa[ell], qe[ell], min(qa[ell], qe[ell]), ell.bit_length()) for ell in range(1, max_ell + 1)]


@lru_cache(maxsize=None)
def _pattern(ell: int, side: str) -> str:
    if side == FORALL:
        if ell <= 2:
            return "A" * ell
        m, odd = divmod(ell, 2)
        if odd:
            return "A" + _pattern(m, EXISTS)
        return "A" + _longer(_pattern(m - 1, EXISTS), _pattern(m, EXISTS))
    if ell == 1:
        return "EA"
    m, odd = divmod(ell, 2)
    if odd:
        return "E" + _longer(_pattern(m, FORALL), _pattern(m + 1, FORALL))
    return "E" + _pattern(m, FORALL)


def _longer(p: str, q: str) -> str:
    return q if len(q) >= len(p) else p


def best_side(ell: int) -> str:
    """The first side achieving q_star(ell, best); ties go to A."""
    return FORALL if q_star(ell, FORALL) <= q_star(ell, EXISTS) else EXISTS


def pattern_of(ell: int, side: str) -> str:
    """Pattern played by the closest-to-midpoint strategy with the given first side."""
    _check_ell(ell)
    side = _side(side)
    if side == "best":
        side = best_side(ell)
    return _pattern(ell, side)


def alternating(length: int, last: str = FORALL) -> str:
    """The strictly alternating pattern of the given length ending in ``last``."""
    other = flip(last)
    return "".join(last if (length - 1 - i) % 2 == 0 else other for i in range(length))


def alternating_pattern(ell: int) -> str:
    """Strictly alternating pattern of length q_star(ell, best) ending in A."""
    return alternating(q_star(ell, "best"))


# ---------------------------------------------------------------------------
# Plans


@dataclass(frozen=True)
class Leaf1:
    """One universal move at the midpoint (length 1 versus longer)."""

    i: int


@dataclass(frozen=True)
class Leaf2:
    """Two universal moves: the midpoint, then the midpoint of the right half."""

    i: int
    j: int


@dataclass(frozen=True)
class Split:
    """A real move of kind ``q`` at master index ``i``; the two halves continue from ``j``."""

    i: int
    q: str
    j: int
    sizes: tuple[int, int]
    kids: tuple


Plan = Leaf1 | Leaf2 | Split


def split_sizes(ell: int, q: str) -> tuple[int, int]:
    """Sub-game lengths after a midpoint move of kind q on the length-ell game."""
    m, odd = divmod(ell, 2)
    if q == EXISTS:
        return (m, m + 1) if odd else (m, m)
    return (m, m) if odd else (m - 1, m)


def realize(ell: int, master: str, start: int = 0) -> Plan | None:
    """Embed the length-ell game into ``master[start:]`` (MS letters: E = play on short side)."""
    return _realize(ell, master, start)


@lru_cache(maxsize=None)
def _realize(ell: int, master: str, start: int) -> Plan | None:
    n = len(master)
    for i in range(start, n):
        q = master[i]
        if q == FORALL and ell <= 2:
            if ell == 1:
                return Leaf1(i)
            j = master.find(FORALL, i + 1)
            return Leaf2(i, j) if j >= 0 else None
        if q == EXISTS and ell == 1:
            continue
        j = master.find(flip(q), i + 1)
        if j < 0:
            continue
        s0, s1 = split_sizes(ell, q)
        k0 = _realize(s0, master, j)
        k1 = _realize(s1, master, j) if k0 is not None else None
        if k0 is not None and k1 is not None:
            return Split(i, q, j, (s0, s1), (k0, k1))
    return None


def plan_indices(plan: Plan) -> set[int]:
    if isinstance(plan, Leaf1):
        return {plan.i}
    if isinstance(plan, Leaf2):
        return {plan.i, plan.j}
    return {plan.i} | plan_indices(plan.kids[0]) | plan_indices(plan.kids[1])


def _mid(a: int, b: int) -> int:
    return a + (b - a) // 2


def plan_move(plan: Plan, peb: Sequence[int], a: int, b: int, t: int) -> int:
    """Position played at master round t on a board whose sub-game interval is [a, b].

    ``peb[i]`` is the board's pebble for master index i (only i < t is read).
    """
    node = plan
    while True:
        if type(node) is Leaf1:
            return _mid(a, b) if t == node.i else a
        if type(node) is Leaf2:
            if t == node.i:
                return _mid(a, b)
            if t == node.j:
                return _mid(peb[node.i], b)
            return a
        if t < node.i:
            return a
        if t == node.i:
            return _mid(a, b)
        if t < node.j:
            return a
        c = peb[node.i]
        if t == node.j:
            x = c - a
            if node.q == EXISTS:
                k = 0 if x > node.sizes[0] else 1
            else:
                k = 0 if x <= node.sizes[0] else 1
        else:
            k = 0 if a <= peb[node.j] < c else 1
        node = node.kids[k]
        a, b = (a, c) if k == 0 else (c, b)


def plan_live(plan: Plan, peb: Sequence[int], a: int, b: int, t: int) -> tuple[int, int]:
    """Interval that can still receive Spoiler moves from master round t on."""
    node = plan
    while type(node) is Split and t > node.j:
        c = peb[node.i]
        k = 0 if a <= peb[node.j] < c else 1
        node = node.kids[k]
        a, b = (a, c) if k == 0 else (c, b)
    return a, b


def shrink(board: Board, a: int, b: int) -> Board:
    """Delete unlabeled elements outside [a, b]; atomic types are unchanged.

    Interval strategies never move outside the live interval again, and
    Duplicator answers there never match Spoiler's, so those gaps only need
    their labeled end points.
    """
    n = board.size
    labeled = set(board.pebbles)
    labeled.update((0, n - 1))
    before = sorted(p for p in labeled if p < a)
    after = sorted(p for p in labeled if p > b)
    new_size = len(before) + (b - a + 1) + len(after)
    if new_size == n:
        return board
    index = {p: i for i, p in enumerate(before)}
    base = len(before) + (b - a + 1)
    index.update({p: base + i for i, p in enumerate(after)})
    off = len(before)

    def at(p: int) -> int:
        return off + p - a if a <= p <= b else index[p]

    pebbles = tuple(at(p) for p in board.pebbles)
    bits = None
    if board.bits is not None:
        src = board.bits
        bits = tuple(src[p] for p in before) + src[a : b + 1] + tuple(src[p] for p in after)
    return Board(board.kind, new_size, bits, pebbles)


# ---------------------------------------------------------------------------
# Order strategies


class PlanStrategy(Strategy):
    """Base for plan-driven strategies with type-preserving board reduction."""

    reduces = True

    def choose(self, board: Board, state: GameState) -> int:
        return self.move(board, state.round)

    def move(self, board: Board, t: int) -> int:
        raise NotImplementedError

    def live(self, board: Board) -> tuple[int, int]:
        return 0, board.size - 1

    def reduce(self, board: Board) -> Board:
        a, b = self.live(board)
        return shrink(board, a, b)


class CMAStrategy(PlanStrategy):
    """Closest-to-midpoint strategy separating L_{<=ell} from L_{>ell}."""

    def __init__(self, ell: int, pattern: str) -> None:
        self.ell = ell
        self.pattern = check_pattern(pattern)
        self.name = f"cma(ell={ell}, pattern={pattern})"
        plan = realize(ell, pattern, 0)
        if plan is None:
            raise StrategyError(f"no closest-to-midpoint plan for ell={ell} within pattern {pattern}")
        self.plan = plan

    def move(self, board: Board, t: int) -> int:
        return plan_move(self.plan, board.pebbles, 0, board.size - 1, t)

    def live(self, board: Board) -> tuple[int, int]:
        return plan_live(self.plan, board.pebbles, 0, board.size - 1, board.round)


def cma_strategy(ell: int, first_side: str = "best", pattern: str | None = None) -> CMAStrategy:
    """The closest-to-midpoint strategy; by default it plays ``pattern_of(ell, first_side)``."""
    _check_ell(ell)
    if pattern is None:
        pattern = pattern_of(ell, first_side)
    return CMAStrategy(ell, pattern)


@dataclass(frozen=True)
class OneVsAllPlan:
    """Plan for {L_ell} on the left versus shorter and longer orders on the right.

    Round ``start`` is universal: one group of right boards is marked by a
    pebble on the interval's right end while the other group uses the same
    round for its own game.  Longer boards then play the length-ell game;
    shorter boards play the length-(ell-1) game with the sides exchanged.
    """

    ell: int
    start: int
    marker_on_long: bool
    long_plan: Plan | None
    short_plan: Plan | None

    def group(self, peb: Sequence[int], a: int, b: int, t: int) -> int:
        """1 for the long-board game, 0 for the short-board game (needs t > start)."""
        marked = peb[self.start] == b
        return 1 if marked == self.marker_on_long else 0

    def move(self, peb: Sequence[int], a: int, b: int, t: int, on_right: bool) -> int:
        if self.short_plan is None:
            return plan_move(self.long_plan, peb, a, b, t)
        if t == self.start:
            if not on_right:
                return a
            is_long = b - a > self.ell
            if is_long == self.marker_on_long:
                return b
            plan = self.long_plan if is_long else self.short_plan
            return plan_move(plan, peb, a, b, t)
        if t < self.start:
            return a
        plan = self.long_plan if self.group(peb, a, b, t) else self.short_plan
        return plan_move(plan, peb, a, b, t)

    def live(self, peb: Sequence[int], a: int, b: int, t: int) -> tuple[int, int]:
        if self.short_plan is None:
            return plan_live(self.long_plan, peb, a, b, t)
        if t <= self.start:
            return a, b
        plan = self.long_plan if self.group(peb, a, b, t) else self.short_plan
        return plan_live(plan, peb, a, b, t)


@lru_cache(maxsize=None)
def one_vs_all_plan(ell: int, master: str, start: int) -> OneVsAllPlan | None:
    """Fit the one-versus-all order game for ell into ``master`` from ``start`` (actual sides)."""
    if start >= len(master) or master[start] != FORALL:
        return None
    if ell == 1:
        plan = realize(1, master, start)
        return None if plan is None else OneVsAllPlan(1, start, True, plan, None)
    reversed_master = flip(master)
    for marker_on_long in (True, False):
        long_start = start + 1 if marker_on_long else start
        short_start = start if marker_on_long else start + 1
        long_plan = realize(ell, master, long_start)
        short_plan = realize(ell - 1, reversed_master, short_start)
        if long_plan is not None and short_plan is not None:
            return OneVsAllPlan(ell, start, marker_on_long, long_plan, short_plan)
    return None


def one_vs_all_length(ell: int) -> int:
    """Length of the shortest alternating pattern (starting and ending in A) that fits the game."""
    length = 1
    while one_vs_all_plan(ell, alternating(length), 0) is None:
        length += 2
        if length > 4 * ell.bit_length() + 8:
            raise StrategyError(f"no alternating one-versus-all plan for ell={ell}")
    return length


def order_one_vs_all_instance(ell: int, max_len: int | None = None) -> tuple[frozenset[Board], frozenset[Board]]:
    """({L_ell}, {L_1..L_{ell-1}} plus {L_{ell+1}..L_max_len}); default max_len = 2*ell + 2."""
    _check_ell(ell)
    if max_len is None:
        max_len = 2 * ell + 2
    if max_len <= ell:
        raise UsageError(f"max_len {max_len} must exceed ell {ell}")
    right = [order_board(i) for i in range(1, max_len + 1) if i != ell]
    return frozenset([order_board(ell)]), frozenset(right)


class OrderOneVsAll(PlanStrategy):
    """Separates L_ell from all other lengths with an alternating pattern ending in A."""

    def __init__(self, ell: int) -> None:
        _check_ell(ell)
        self.ell = ell
        self.pattern = alternating(one_vs_all_length(ell))
        self.plan = one_vs_all_plan(ell, self.pattern, 0)
        self.name = f"order-one-vs-all(ell={ell})"

    def move(self, board: Board, t: int) -> int:
        on_right = self.pattern[t] == FORALL
        return self.plan.move(board.pebbles, 0, board.size - 1, t, on_right)

    def live(self, board: Board) -> tuple[int, int]:
        return self.plan.live(board.pebbles, 0, board.size - 1, board.round)


def order_one_vs_all_strategy(ell: int) -> OrderOneVsAll:
    return OrderOneVsAll(ell)


# ---------------------------------------------------------------------------
# Parallel combination


@dataclass(frozen=True)
class SubGame:
    """A sub-instance with its strategy and the pattern that strategy plays."""

    left: frozenset[Board]
    right: frozenset[Board]
    strategy: Strategy
    pattern: str


def embed(sub: str, master: str) -> list[int] | None:
    """Leftmost embedding of ``sub`` as a subsequence of ``master``."""
    out, i = [], 0
    for c in sub:
        i = master.find(c, i)
        if i < 0:
            return None
        out.append(i)
        i += 1
    return out


class ParallelStrategy(Strategy):
    """Plays several sub-games at once; rounds not used by a sub-game are dummies on min."""

    def __init__(self, subgames: Sequence[SubGame], master: str) -> None:
        self.pattern = check_pattern(master)
        self.subgames = list(subgames)
        self.name = f"parallel({len(self.subgames)} sub-games, pattern={master})"
        self.slots = []
        self.base = None
        owner: dict[tuple[str, Board], int] = {}
        for idx, g in enumerate(self.subgames):
            slots = embed(g.pattern, master)
            if slots is None:
                raise StructuralError(f"pattern {g.pattern!r} is not a subsequence of {master!r}")
            self.slots.append(slots)
            for side, boards in (("L", g.left), ("R", g.right)):
                for b in boards:
                    if (side, b) in owner and owner[(side, b)] != idx:
                        raise PreconditionError(f"board {b.board_id()} belongs to two sub-games")
                    owner[(side, b)] = idx
                    rounds = len(b.pebbles)
                    if self.base is None:
                        self.base = rounds
                    elif self.base != rounds:
                        raise PreconditionError("sub-game boards must carry equal pebble counts")
        self.base = self.base or 0
        self.owner = owner
        for i, gi in enumerate(self.subgames):
            left_types = {type_key(b) for b in gi.left}
            for j, gj in enumerate(self.subgames):
                if i != j and left_types & {type_key(b) for b in gj.right}:
                    raise PreconditionError(f"sub-games {i} and {j} have a cross-matching pair")

    def choose(self, board: Board, state: GameState) -> int:
        t = state.round
        side = "L" if self.pattern[t - self.base] == EXISTS else "R"
        origin = Board(board.kind, board.size, board.bits, board.pebbles[: self.base])
        idx = self.owner.get((side, origin))
        if idx is None:
            return 0
        slots = self.slots[idx]
        local = t - self.base
        if local not in slots:
            return 0
        kept = board.pebbles[: self.base] + tuple(board.pebbles[self.base + s] for s in slots if s < local)
        projected = Board(board.kind, board.size, board.bits, kept)
        sub_state = GameState(frozenset(), frozenset(), len(kept), self.subgames[idx].pattern[: len(kept) - self.base])
        return self.subgames[idx].strategy.choose(projected, sub_state)

    def side(self, state: GameState) -> str | None:
        local = state.round - self.base
        return self.pattern[local] if 0 <= local < len(self.pattern) else None


def parallel_combine(subgames: Sequence[SubGame | tuple], master: str) -> ParallelStrategy:
    """Interleave sub-game strategies along ``master``; each sub-pattern must embed in it."""
    games = []
    for g in subgames:
        if isinstance(g, SubGame):
            games.append(g)
        else:
            (left, right), strategy, pattern = g
            games.append(SubGame(frozenset(left), frozenset(right), strategy, pattern))
    return ParallelStrategy(games, master)


# ---------------------------------------------------------------------------
# String strategies


@dataclass(frozen=True)
class StrategyParams:
    """Radix t for permutation rounds, real base r for preprocessing, pruning switch."""

    t: int = 3
    r_real: Fraction = Fraction(5, 2)
    prune: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.t, int) or self.t < 2:
            raise UsageError(f"t must be an integer >= 2, got {self.t!r}")
        r = Fraction(self.r_real)
        object.__setattr__(self, "r_real", r)
        if r <= 2:
            raise UsageError(f"r_real must exceed 2, got {r}")

    @property
    def epsilon_from_t(self) -> float:
        return 1 / math.log2(self.t)

    @property
    def epsilon_from_r(self) -> float:
        return math.log2(float(self.r_real)) - 1


def first_diff(w: str, v: str) -> int:
    """Least index where two equal-length strings differ."""
    if len(w) != len(v):
        raise UsageError("first_diff needs equal-length strings")
    for i, (x, y) in enumerate(zip(w, v)):
        if x != y:
            return i
    raise UsageError("first_diff needs distinct strings")


def hard_pair(k: int) -> tuple[str, str]:
    """Two strings of length 2^k + 2 differing by a swapped adjacent 1."""
    if k < 2:
        raise UsageError(f"hard_pair needs k >= 2, got {k}")
    pad = "0" * (1 << (k - 1))
    return pad + "10" + pad, pad + "01" + pad


def min_m(count: int) -> int:
    """Smallest m >= 1 with m! >= count."""
    if count < 1:
        raise UsageError(f"count must be >= 1, got {count}")
    m, f = 1, 1
    while f < count:
        m += 1
        f *= m
    return m


def permutation_encoder(count: int, m: int) -> list[tuple[int, ...]]:
    """The first ``count`` permutations of 0..m-1 in lexicographic order."""
    if m < 1 or math.factorial(m) < count:
        raise PreconditionError(f"{m}! is smaller than {count}")
    return list(itertools.islice(itertools.permutations(range(m)), count))


def ceil_log(n: int, base: int) -> int:
    """Smallest e >= 0 with base**e >= n (exact integer arithmetic)."""
    e, p = 0, 1
    while p < n:
        e, p = e + 1, p * base
    return e


def ceil_n_over_log(n: int, r: Fraction) -> int:
    """ceil(n / log_r n) for n >= 2."""
    if n < 2:
        return 1
    return math.ceil(n * math.log(float(r)) / math.log(n) - 1e-12)


class OneVsOne(PlanStrategy):
    """Pebble the first differing bit, then separate the prefix lengths as linear orders."""

    def __init__(self, w: str, v: str) -> None:
        self.w, self.v = w, v
        self.i = first_diff(w, v)
        self.name = f"one-vs-one({w}, {v})"
        if self.i == 0:
            self.pattern = EXISTS
            self.plan = None
        else:
            tail = alternating(one_vs_all_length(self.i))
            self.pattern = EXISTS + tail
            self.plan = one_vs_all_plan(self.i, self.pattern, 1)

    def move(self, board: Board, t: int) -> int:
        if t == 0:
            return self.i
        on_right = self.pattern[t] == FORALL
        return self.plan.move(board.pebbles, 0, board.pebbles[0], t, on_right)

    def live(self, board: Board) -> tuple[int, int]:
        if board.round == 0 or self.plan is None:
            return 0, board.size - 1
        return self.plan.live(board.pebbles, 0, board.pebbles[0], board.round)


def string_one_vs_one(w: str, v: str) -> OneVsOne:
    return OneVsOne(w, v)


class Isolating(PlanStrategy):
    """Separates a set A of strings from a disjoint set B.

    Rounds 0..m0-1 (existential) give every A-string its own class by
    pebbling positions 0..m0-1 in a distinct permutation.  Within each class
    a universal round pebbles every B-string at its first difference from
    the class's A-string; m existential rounds then give each copy of that
    A-string (one per pebbled position j) its own class, and the remaining
    alternating rounds separate prefix length j from the others as orders.
    """

    def __init__(self, A: Sequence[str], m0: int, m: int, name: str) -> None:
        self.A = sorted(A)
        self.n = n = len(self.A[0])
        if m0 > n or m > n:
            raise StrategyError(f"{max(m0, m)} permutation rounds do not fit strings of length {n}")
        self.m0, self.m = m0, m
        self.name = name
        self.index_of = {w: k for k, w in enumerate(self.A)}
        self.outer = permutation_encoder(len(self.A), m0) if m0 else [()]
        self.outer_index = {p: k for k, p in enumerate(self.outer)}
        self.inner = permutation_encoder(n, m)
        self.inner_index = {p: j for j, p in enumerate(self.inner)}
        self.end_start = m0 + 1 + m
        lengths = [one_vs_all_length(j) for j in range(1, n)] or [1]
        tail = alternating(max(lengths))
        self.pattern = EXISTS * m0 + FORALL + EXISTS * m + tail
        self._plans: dict[int, OneVsAllPlan] = {}

    def _plan(self, j: int) -> OneVsAllPlan:
        plan = self._plans.get(j)
        if plan is None:
            plan = one_vs_all_plan(max(j, 1), self.pattern, self.end_start)
            self._plans[j] = plan
        return plan

    @staticmethod
    def _order_type(values: Sequence[int]) -> tuple[int, ...]:
        ranks = sorted(range(len(values)), key=values.__getitem__)
        out = [0] * len(values)
        for r, i in enumerate(ranks):
            out[i] = r
        return tuple(out)

    def _class(self, board: Board) -> int:
        """Index of the A-string whose class a board joined in the first m0 rounds."""
        if self.m0 == 0:
            return 0
        return self.outer_index.get(self._order_type(board.pebbles[: self.m0]), 0)

    def _prefix_class(self, board: Board) -> int:
        """Prefix length j whose class a board joined in the inner permutation rounds."""
        key = self._order_type(board.pebbles[self.m0 + 1 : self.m0 + 1 + self.m])
        return max(self.inner_index.get(key, 1), 1)

    def move(self, board: Board, t: int) -> int:
        m0, m = self.m0, self.m
        if t < m0:
            return self.outer[self.index_of[board.word()]][t]
        if t == m0:
            return first_diff(self.A[self._class(board)], board.word())
        if t <= m0 + m:
            return self.inner[board.pebbles[m0]][t - m0 - 1]
        on_right = self.pattern[t] == FORALL
        plan = self._plan(self._prefix_class(board))
        return plan.move(board.pebbles, 0, board.pebbles[m0], t, on_right)

    def live(self, board: Board) -> tuple[int, int]:
        if board.round <= self.end_start:
            return 0, board.size - 1
        plan = self._plan(self._prefix_class(board))
        return plan.live(board.pebbles, 0, board.pebbles[self.m0], board.round)


def _words(boards: Iterable[Board | str]) -> list[str]:
    return sorted(b if isinstance(b, str) else b.word() for b in boards)


def string_one_vs_all(w: str, params: StrategyParams | None = None) -> Isolating:
    """Separate w from every other string of its length."""
    params = params or StrategyParams()
    n = len(w)
    m = max(ceil_log(n, params.t), min_m(n))
    return Isolating([w], 0, m, f"one-vs-all({w}, t={params.t})")


def string_many_vs_all(A: Iterable[str], params: StrategyParams | None = None) -> Isolating:
    """Separate the set A from every other string of the same length."""
    params = params or StrategyParams()
    A = _words(A)
    if not A:
        raise UsageError("A must be nonempty")
    n = len(A[0])
    m0 = 0 if len(A) == 1 else max(ceil_log(len(A), params.t), min_m(len(A)))
    m = max(ceil_log(n, params.t), min_m(n))
    if len(A) >= 2**n:
        raise UsageError("A must be a strict subset of all strings")
    return Isolating(A, m0, m, f"many-vs-all(|A|={len(A)}, t={params.t})")


def string_any_vs_any(A: Iterable[str], B: Iterable[str], params: StrategyParams | None = None) -> Isolating:
    """Separate two disjoint sets of equal-length strings."""
    params = params or StrategyParams()
    A, B = _words(A), _words(B)
    if not A or not B:
        raise UsageError("A and B must be nonempty")
    if set(A) & set(B):
        raise UsageError("A and B must be disjoint")
    if len({len(w) for w in A + B}) != 1:
        raise UsageError("all strings must share one length")
    n = len(A[0])
    m0 = max(ceil_n_over_log(n, params.r_real), min_m(len(A)))
    m = max(ceil_log(n, params.t), min_m(n))
    return Isolating(A, m0, m, f"any-vs-any(|A|={len(A)}, |B|={len(B)}, r={params.r_real})")


def string_instance(A: Iterable[str], B: Iterable[str]) -> tuple[frozenset[Board], frozenset[Board]]:
    return frozenset(string_board(w) for w in A), frozenset(string_board(w) for w in B)


# ---------------------------------------------------------------------------
# Numeric bounds


def counting_lower_bound(n: int) -> int:
    """Smallest k with k + 2^(k log2 k) >= 2^n - 1, evaluated in the log domain."""
    if n < 4:
        raise UsageError(f"counting_lower_bound needs n >= 4, got {n}")
    rhs_excess = math.log1p(-(2.0 ** -n)) / math.log(2)
    k = 1
    while True:
        e = k * math.log2(k) if k > 1 else 0.0
        lhs_excess = (e - n) + math.log1p(k * 2.0 ** (-e)) / math.log(2)
        if lhs_excess >= rhs_excess:
            return k
        k += 1


def stirling_threshold(t: int) -> int:
    """Smallest N with ceil(log_t n)! >= n for every n >= N."""
    if t < 2:
        raise UsageError("t must be >= 2")
    last_fail = 0
    e = 1
    # Once e + 1 >= t, e! / t^e is nondecreasing, so after the first block that
    # never fails no later block fails either.
    while True:
        hi = t ** e
        fact = math.factorial(e)
        if fact < hi:
            last_fail = hi
        elif e + 1 >= t:
            break
        e += 1
    return last_fail + 1


def log2_factorial(m: int) -> float:
    return math.lgamma(m + 1) / math.log(2)


def realr_holds(n: int, r: Fraction) -> bool:
    """ceil(n / log_r n)! >= 2^n, compared in the log domain."""
    return log2_factorial(ceil_n_over_log(n, r)) >= n


def realr_threshold(r: Fraction, window: int = 200, limit: int = 10**10) -> int:
    """Smallest N >= 2 such that the feasibility inequality holds on all of [N, N + window].

    A failing n with deficit d = n - log2(m!) lets the scan skip ahead: one step
    of n raises log2(m!) - n by less than log2(m + 1), so no success can occur
    within the next d / log2(m + 1) values.
    """
    r = Fraction(r)
    if r <= 1:
        raise UsageError(f"r must exceed 1, got {r}")
    run_start, n = None, 2
    while n <= limit:
        m = ceil_n_over_log(n, r)
        slack = log2_factorial(m) - n
        if slack >= 0:
            if run_start is None:
                run_start = n
            if n - run_start >= window:
                return run_start
            n += 1
        else:
            run_start = None
            # Over the skipped stretch m at most doubles, so log2(2m + 2) bounds each step's gain.
            n += max(1, int(-slack / math.log2(2 * m + 2)))
    raise StrategyError(f"no feasibility threshold for r={r} below {limit}")
