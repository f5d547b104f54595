"""Pebbled boards (linear orders and bit strings), atomic types, matching and pruning."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

ORDER = "order"
STRING = "string"

DEFAULT_STRING_CAP = 20


class GameError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class UsageError(GameError):
    """Invalid arguments or malformed input."""

    exit_code = 2


class ResourceError(GameError):
    """A configured size cap would be exceeded."""

    exit_code = 3


class DomainError(GameError):
    """A well-formed request that has no valid answer."""


class StrategyError(DomainError):
    """A strategy cannot produce a move or cannot be built for an instance."""


class PreconditionError(DomainError):
    """An operation's documented precondition does not hold."""


class StructuralError(DomainError):
    """Formulas or patterns do not have the shape an operation requires."""


@dataclass(frozen=True, slots=True)
class Board:
    """A linear order or bit string with a round-ordered tuple of pebble positions.

    For orders ``size`` is the number of elements (length in edges plus one) and
    ``bits`` is None.  For strings ``bits`` holds one 0/1 value per position.
    """

    kind: str
    size: int
    bits: tuple[int, ...] | None = None
    pebbles: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == ORDER:
            if self.size < 2 or self.bits is not None:
                raise UsageError(f"order boards need size >= 2 and no bits, got size {self.size}")
        elif self.kind == STRING:
            if self.size < 1 or self.bits is None or len(self.bits) != self.size:
                raise UsageError("string boards need size >= 1 and one bit per position")
        else:
            raise UsageError(f"unknown board kind {self.kind!r}")
        for p in self.pebbles:
            if not 0 <= p < self.size:
                raise UsageError(f"pebble position {p} outside [0, {self.size - 1}]")

    @property
    def round(self) -> int:
        return len(self.pebbles)

    @property
    def length(self) -> int:
        """Length in edges for orders, number of bits for strings."""
        return self.size - 1 if self.kind == ORDER else self.size

    def extend(self, position: int) -> Board:
        """Return a copy with one more pebble appended at ``position``."""
        return Board(self.kind, self.size, self.bits, self.pebbles + (position,))

    def root(self) -> Board:
        """The same structure with no pebbles."""
        return Board(self.kind, self.size, self.bits, ())

    def word(self) -> str:
        if self.bits is None:
            raise UsageError("order boards have no bit word")
        return "".join(map(str, self.bits))

    def board_id(self) -> str:
        """Canonical text form, e.g. ``L3|1,2`` or ``S0110|0``."""
        head = f"L{self.size - 1}" if self.kind == ORDER else "S" + self.word()
        return head + "|" + ",".join(map(str, self.pebbles))

    def __repr__(self) -> str:
        return f"Board({self.board_id()})"


def order_board(length: int) -> Board:
    """The unpebbled linear order L_length (length + 1 elements)."""
    if length < 1:
        raise UsageError(f"order length must be >= 1, got {length}")
    return Board(ORDER, length + 1)


def string_board(word: str) -> Board:
    """The unpebbled bit string ``word``."""
    if not word or any(c not in "01" for c in word):
        raise UsageError(f"not a nonempty 0/1 string: {word!r}")
    return Board(STRING, len(word), tuple(int(c) for c in word))


def parse_board_id(text: str) -> Board:
    """Inverse of :meth:`Board.board_id`."""
    head, _, tail = text.partition("|")
    pebbles = tuple(int(p) for p in tail.split(",") if p != "")
    if head.startswith("L"):
        base = order_board(int(head[1:]))
    elif head.startswith("S"):
        base = string_board(head[1:])
    else:
        raise UsageError(f"bad board id {text!r}")
    return Board(base.kind, base.size, base.bits, pebbles)


def board_sort_key(b: Board) -> tuple:
    return (b.kind, b.size, b.bits or (), b.pebbles)


def type_key(b: Board) -> tuple:
    """Fast hashable atomic type: ranks of (min, max, p1..pk) plus bits per rank group."""
    pos = (0, b.size - 1) + b.pebbles
    distinct = sorted(set(pos))
    rank = {v: i for i, v in enumerate(distinct)}
    ranks = tuple(rank[v] for v in pos)
    if b.bits is None:
        return ranks, None
    bits = b.bits
    return ranks, tuple(bits[v] for v in distinct)


def type_key_after(b: Board, x: int) -> tuple:
    """``type_key(b.extend(x))`` without building the extended board."""
    pos = (0, b.size - 1) + b.pebbles + (x,)
    distinct = sorted(set(pos))
    rank = {v: i for i, v in enumerate(distinct)}
    ranks = tuple(rank[v] for v in pos)
    if b.bits is None:
        return ranks, None
    bits = b.bits
    return ranks, tuple(bits[v] for v in distinct)


def labels(k: int) -> list[str]:
    """Label names in key order for a board with k pebbles."""
    return ["min", "max"] + [f"p{i}" for i in range(1, k + 1)]


def describe_type(key: tuple) -> str:
    """Render a type key as canonical text."""
    ranks, bits = key
    names = labels(len(ranks) - 2)
    order = {name: i for i, name in enumerate(["min"] + names[2:] + ["max"])}
    groups: dict[int, list[str]] = {}
    for name, r in zip(names, ranks):
        groups.setdefault(r, []).append(name)
    parts = []
    for r in sorted(groups):
        parts.append("=".join(sorted(groups[r], key=order.__getitem__)))
    text = " < ".join(parts)
    if bits is not None:
        text += "; " + ", ".join(f"S({p.split('=')[0]})={bit}" for p, bit in zip(parts, bits))
    return text


def atomic_type(b: Board) -> str:
    """Canonical text of the substructure induced on min, max and the pebbles."""
    return describe_type(type_key(b))


def matches(a: Board, b: Board) -> bool:
    """True iff pebble_i -> pebble_i, min -> min, max -> max is a partial isomorphism."""
    if a.kind != b.kind or len(a.pebbles) != len(b.pebbles):
        raise UsageError("matches needs boards of the same kind and pebble count")
    return type_key(a) == type_key(b)


def all_placements(b: Board) -> list[Board]:
    """Every one-pebble extension of ``b``, in position order."""
    return [b.extend(x) for x in range(b.size)]


def _check_rounds(boards: Iterable[Board]) -> None:
    counts = {len(b.pebbles) for b in boards}
    if len(counts) > 1:
        raise UsageError(f"boards carry different pebble counts: {sorted(counts)}")


def prune(left: Iterable[Board], right: Iterable[Board]) -> tuple[frozenset[Board], frozenset[Board]]:
    """Drop every board whose atomic type does not occur on the other side."""
    left, right = frozenset(left), frozenset(right)
    _check_rounds(itertools.chain(left, right))
    lt = {b: type_key(b) for b in left}
    rt = {b: type_key(b) for b in right}
    common = set(lt.values()) & set(rt.values())
    return (
        frozenset(b for b, k in lt.items() if k in common),
        frozenset(b for b, k in rt.items() if k in common),
    )


def make_order_instance(ell: int, max_len: int | None = None) -> tuple[frozenset[Board], frozenset[Board]]:
    """Left = {L_1..L_ell}, right = {L_{ell+1}..L_max_len}; default max_len = 2*ell + 2."""
    if ell < 1:
        raise UsageError(f"ell must be >= 1, got {ell}")
    if max_len is None:
        max_len = 2 * ell + 2
    if max_len <= ell:
        raise UsageError(f"max_len {max_len} must exceed ell {ell}")
    left = frozenset(order_board(i) for i in range(1, ell + 1))
    right = frozenset(order_board(i) for i in range(ell + 1, max_len + 1))
    return left, right


def string_cap() -> int:
    return int(os.environ.get("MSQ_STRING_CAP", DEFAULT_STRING_CAP))


def string_complement(targets: Iterable[str], n: int) -> frozenset[Board]:
    """All n-bit strings outside ``targets``, as unpebbled boards."""
    targets = set(targets)
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    if n > string_cap():
        raise ResourceError(f"string length {n} exceeds cap {string_cap()} (dimension: n)")
    for w in targets:
        if len(w) != n:
            raise UsageError(f"target {w!r} does not have length {n}")
    words = ("".join(t) for t in itertools.product("01", repeat=n))
    return frozenset(string_board(w) for w in words if w not in targets)


def parse_string_set(text: str) -> list[str]:
    """Parse the newline-delimited string-set format ('#' lines are comments)."""
    words = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if any(c not in "01" for c in line):
            raise UsageError(f"not a 0/1 string: {line!r}")
        words.append(line)
    if len({len(w) for w in words}) > 1:
        raise UsageError("all strings in a set must share one length")
    return words


def read_string_set(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return parse_string_set(fh.read())


def string_set(words: Sequence[str]) -> frozenset[Board]:
    return frozenset(string_board(w) for w in words)
