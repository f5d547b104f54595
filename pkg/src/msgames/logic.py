"""First-order formulas over {<, S, min, max}: syntax, evaluation, synthesis from traces.

Also builds the α/ε length-test formulas and merges guarded prenex consequents
under one shared quantifier prefix (quantifier pull-out).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import (
    ORDER,
    Board,
    PreconditionError,
    StructuralError,
    UsageError,
    type_key,
)
from .engine import EXISTS, FORALL, Trace

# ---------------------------------------------------------------------------
# Syntax


@dataclass(frozen=True)
class Min:
    def __str__(self) -> str:
        return "min"


@dataclass(frozen=True)
class Max:
    def __str__(self) -> str:
        return "max"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Min | Max | Var
MIN = Min()
MAX = Max()


class Formula:
    """Base class of formula nodes; ``str(f)`` is the s-expression form."""

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, eq=True)
class Lt(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=True)
class S(Formula):
    term: Term


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True, eq=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Eq(MIN, MIN)
FALSE = Lt(MIN, MIN)
QUANTIFIERS = (Exists, Forall)


def conj(parts: Iterable[Formula]) -> Formula:
    """Conjunction that collapses the empty and one-element cases."""
    parts = tuple(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    """Disjunction that collapses the empty and one-element cases."""
    parts = tuple(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


def quantify(side: str, var: str, body: Formula) -> Formula:
    return Exists(var, body) if side == EXISTS else Forall(var, body)


def show(f: Formula) -> str:
    """Render as a one-line s-expression in the interchange grammar."""
    out: list[str] = []

    def go(g: Formula) -> None:
        t = type(g)
        if t is Lt:
            out.append(f"(lt {g.left} {g.right})")
        elif t is Eq:
            out.append(f"(eq {g.left} {g.right})")
        elif t is S:
            out.append(f"(S {g.term})")
        elif t is Not:
            out.append("(not ")
            go(g.arg)
            out.append(")")
        elif t in (And, Or):
            out.append("(and" if t is And else "(or")
            for a in g.args:
                out.append(" ")
                go(a)
            out.append(")")
        elif t is Implies:
            out.append("(imp ")
            go(g.left)
            out.append(" ")
            go(g.right)
            out.append(")")
        elif t in QUANTIFIERS:
            out.append(f"({'exists' if t is Exists else 'forall'} {g.var} ")
            go(g.body)
            out.append(")")
        else:
            raise UsageError(f"not a formula: {g!r}")

    go(f)
    return "".join(out)


_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def parse(text: str) -> Formula:
    """Parse one formula in the s-expression grammar ('#' starts a comment)."""
    lines = [line.split("#", 1)[0] for line in text.splitlines()]
    tokens = _TOKEN.findall("\n".join(lines))
    pos = 0

    def need(tok: str) -> None:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            got = tokens[pos] if pos < len(tokens) else "end of input"
            raise UsageError(f"expected {tok!r}, got {got!r}")
        pos += 1

    def ident() -> str:
        nonlocal pos
        if pos >= len(tokens) or not _IDENT.match(tokens[pos]) or tokens[pos] in ("min", "max"):
            raise UsageError(f"expected a variable name at token {pos}")
        pos += 1
        return tokens[pos - 1]

    def term() -> Term:
        nonlocal pos
        if pos >= len(tokens):
            raise UsageError("unexpected end of input")
        tok = tokens[pos]
        if tok == "min":
            pos += 1
            return MIN
        if tok == "max":
            pos += 1
            return MAX
        return Var(ident())

    def form() -> Formula:
        nonlocal pos
        need("(")
        if pos >= len(tokens):
            raise UsageError("unexpected end of input")
        op = tokens[pos]
        pos += 1
        if op in ("lt", "eq"):
            a, b = term(), term()
            f: Formula = Lt(a, b) if op == "lt" else Eq(a, b)
        elif op == "S":
            f = S(term())
        elif op == "not":
            f = Not(form())
        elif op in ("and", "or"):
            args = [form()]
            while pos < len(tokens) and tokens[pos] == "(":
                args.append(form())
            f = And(tuple(args)) if op == "and" else Or(tuple(args))
        elif op == "imp":
            a = form()
            f = Implies(a, form())
        elif op in ("exists", "forall"):
            v = ident()
            body = form()
            f = Exists(v, body) if op == "exists" else Forall(v, body)
        else:
            raise UsageError(f"unknown operator {op!r}")
        need(")")
        return f

    result = form()
    if pos != len(tokens):
        raise UsageError(f"trailing input after formula at token {pos}")
    return result


def read_sentence(path: str) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# Structural measures


def _term_vars(t: Term) -> set[str]:
    return {t.name} if isinstance(t, Var) else set()


def free_vars(f: Formula) -> frozenset[str]:
    t = type(f)
    if t in (Lt, Eq):
        return frozenset(_term_vars(f.left) | _term_vars(f.right))
    if t is S:
        return frozenset(_term_vars(f.term))
    if t is Not:
        return free_vars(f.arg)
    if t in (And, Or):
        return frozenset().union(*(free_vars(a) for a in f.args))
    if t is Implies:
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - {f.var}


def qcount(f: Formula) -> int:
    """Total number of quantifier occurrences."""
    t = type(f)
    if t in (Lt, Eq, S):
        return 0
    if t is Not:
        return qcount(f.arg)
    if t in (And, Or):
        return sum(qcount(a) for a in f.args)
    if t is Implies:
        return qcount(f.left) + qcount(f.right)
    return 1 + qcount(f.body)


def qrank(f: Formula) -> int:
    """Maximal quantifier nesting depth."""
    t = type(f)
    if t in (Lt, Eq, S):
        return 0
    if t is Not:
        return qrank(f.arg)
    if t in (And, Or):
        return max(qrank(a) for a in f.args)
    if t is Implies:
        return max(qrank(f.left), qrank(f.right))
    return 1 + qrank(f.body)


def prefix(f: Formula) -> tuple[list[tuple[str, str]], Formula]:
    """Split a prenex formula into its quantifier spine and quantifier-free matrix."""
    spine = []
    while type(f) in QUANTIFIERS:
        spine.append((EXISTS if type(f) is Exists else FORALL, f.var))
        f = f.body
    if qcount(f):
        raise UsageError("formula is not in prenex form")
    return spine, f


def prenex_pattern(f: Formula) -> str:
    """The quantifier prefix of a prenex formula as an E/A pattern."""
    return "".join(side for side, _ in prefix(f)[0])


def mentions_s(f: Formula) -> bool:
    t = type(f)
    if t is S:
        return True
    if t in (Lt, Eq):
        return False
    if t is Not:
        return mentions_s(f.arg)
    if t in (And, Or):
        return any(mentions_s(a) for a in f.args)
    if t is Implies:
        return mentions_s(f.left) or mentions_s(f.right)
    return mentions_s(f.body)


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free variables according to ``mapping``."""
    if not mapping:
        return f

    def term(t: Term) -> Term:
        return mapping.get(t.name, t) if isinstance(t, Var) else t

    t = type(f)
    if t is Lt:
        return Lt(term(f.left), term(f.right))
    if t is Eq:
        return Eq(term(f.left), term(f.right))
    if t is S:
        return S(term(f.term))
    if t is Not:
        return Not(substitute(f.arg, mapping))
    if t in (And, Or):
        return t(tuple(substitute(a, mapping) for a in f.args))
    if t is Implies:
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    inner = {k: v for k, v in mapping.items() if k != f.var}
    for v in inner.values():
        if isinstance(v, Var) and v.name == f.var:
            raise StructuralError(f"substitution would capture variable {f.var}")
    return t(f.var, substitute(f.body, inner))


# ---------------------------------------------------------------------------
# Semantics


class Evaluator:
    """Brute-force model checker with memoization on quantified subformulas.

    On orders a quantified subformula of rank k is keyed by the arrangement of
    min, max and its free variables, with the gaps between consecutive points
    capped at 2^k; two such arrangements satisfy the same rank-k formulas, so the
    cache is shared across boards of different lengths.  On strings the key is
    the board content plus the exact free-variable positions.
    """

    def __init__(self) -> None:
        self._info: dict[int, tuple[Formula, tuple[str, ...], int]] = {}
        self._memo: dict[tuple, bool] = {}

    def _node(self, f: Formula) -> tuple[tuple[str, ...], int]:
        info = self._info.get(id(f))
        if info is None:
            info = (f, tuple(sorted(free_vars(f))), qrank(f))
            self._info[id(f)] = info
        return info[1], info[2]

    def value(self, f: Formula, board: Board, env: Mapping[str, int] | None = None) -> bool:
        env = dict(env or {})
        missing = free_vars(f) - env.keys()
        if missing:
            raise UsageError(f"unbound variables: {sorted(missing)}")
        for name, p in env.items():
            if not 0 <= p < board.size:
                raise UsageError(f"variable {name} bound outside the universe")
        if board.kind == ORDER and mentions_s(f):
            raise UsageError("S atoms cannot be evaluated on linear orders")
        return self._eval(f, board, env)

    def _term(self, t: Term, board: Board, env: dict[str, int]) -> int | None:
        if t is MIN or type(t) is Min:
            return 0
        if type(t) is Max:
            return board.size - 1
        return env.get(t.name)

    def _partial(self, f: Formula, board: Board, env: dict[str, int]) -> bool | None:
        """Kleene evaluation treating unbound variables and quantifiers as unknown.

        Conjunctions give up at their first unknown conjunct, which keeps the
        cost proportional to the decided part of the formula.
        """
        t = type(f)
        if t is Lt or t is Eq:
            a = self._term(f.left, board, env)
            b = self._term(f.right, board, env)
            if a is None or b is None:
                return None
            return a < b if t is Lt else a == b
        if t is S:
            a = self._term(f.term, board, env)
            return None if a is None else board.bits[a] == 1
        if t is Not:
            v = self._partial(f.arg, board, env)
            return None if v is None else not v
        if t is And:
            for a in f.args:
                v = self._partial(a, board, env)
                if v is None:
                    return None
                if not v:
                    return False
            return True
        if t is Or:
            unknown = False
            for a in f.args:
                v = self._partial(a, board, env)
                if v is None:
                    unknown = True
                elif v:
                    return True
            return None if unknown else False
        if t is Implies:
            a = self._partial(f.left, board, env)
            if a is False:
                return True
            b = self._partial(f.right, board, env)
            if b is True:
                return True
            if a is True and b is False:
                return False
            return None
        return None

    def _key(self, f: Formula, board: Board, env: dict[str, int]) -> tuple:
        fv, rank = self._node(f)
        if board.kind != ORDER:
            return (id(f), board.bits, tuple(env[v] for v in fv))
        pos = (0, board.size - 1) + tuple(env[v] for v in fv)
        distinct = sorted(set(pos))
        index = {p: i for i, p in enumerate(distinct)}
        cap = 1 << rank if rank < 40 else None
        gaps = tuple(
            (b - a) if cap is None else min(b - a, cap) for a, b in zip(distinct, distinct[1:])
        )
        return (id(f), tuple(index[p] for p in pos), gaps)

    def _eval(self, f: Formula, board: Board, env: dict[str, int]) -> bool:
        t = type(f)
        if t is Lt or t is Eq:
            a = self._term(f.left, board, env)
            b = self._term(f.right, board, env)
            return a < b if t is Lt else a == b
        if t is S:
            return board.bits[self._term(f.term, board, env)] == 1
        if t is Not:
            return not self._eval(f.arg, board, env)
        if t is And:
            return all(self._eval(a, board, env) for a in f.args)
        if t is Or:
            return any(self._eval(a, board, env) for a in f.args)
        if t is Implies:
            return (not self._eval(f.left, board, env)) or self._eval(f.right, board, env)
        key = self._key(f, board, env)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        var = f.var
        saved = env.pop(var, None)
        decided = self._partial(f.body, board, env)
        if decided is not None:
            result = decided
        else:
            want = t is Exists
            result = not want
            for x in range(board.size):
                env[var] = x
                if self._eval(f.body, board, env) == want:
                    result = want
                    break
            env.pop(var, None)
        if saved is not None:
            env[var] = saved
        self._memo[key] = result
        return result


def evaluate(f: Formula, b: Board, env: Mapping[str, int] | None = None) -> bool:
    """Truth value of ``f`` on board ``b`` under the variable assignment ``env``."""
    return Evaluator().value(f, b, env)


eval = evaluate  # noqa: A001 - the operation is named eval in the interface


def separates(f: Formula, A: Iterable[Board], B: Iterable[Board], evaluator: Evaluator | None = None) -> bool:
    """True iff the sentence holds on every board of A and fails on every board of B."""
    if free_vars(f):
        raise UsageError(f"separates needs a sentence; free variables {sorted(free_vars(f))}")
    ev = evaluator or Evaluator()
    return all(ev.value(f, b) for b in A) and not any(ev.value(f, b) for b in B)


# ---------------------------------------------------------------------------
# Synthesis from a won trace


def parent_type(key: tuple) -> tuple:
    """Atomic type of the board with its last pebble removed."""
    ranks, bits = key
    head = ranks[:-1]
    kept = sorted(set(head))
    index = {r: i for i, r in enumerate(kept)}
    new_bits = None if bits is None else tuple(bits[r] for r in kept)
    return tuple(index[r] for r in head), new_bits


def _label_term(i: int) -> Term:
    if i == 0:
        return MIN
    if i == 1:
        return MAX
    return Var(f"x{i - 1}")


def _increment(key: tuple, full: bool) -> Formula:
    """Atoms placing the newest label of ``key`` relative to the earlier labels."""
    ranks, bits = key
    new = len(ranks) - 1
    r = ranks[new]
    x = _label_term(new)
    atoms: list[Formula] = []
    if new == 1:
        atoms.append(Eq(MIN, MAX) if ranks[0] == r else Lt(MIN, MAX))
    elif full:
        for i in range(new):
            s = ranks[i]
            other = _label_term(i)
            atoms.append(Eq(x, other) if s == r else (Lt(x, other) if r < s else Lt(other, x)))
    else:
        same = [i for i in range(new) if ranks[i] == r]
        if same:
            atoms.append(Eq(x, _label_term(same[0])))
        else:
            below = max(s for s in ranks[:new] if s < r)
            above = min(s for s in ranks[:new] if s > r)
            atoms.append(Lt(_label_term(ranks.index(below)), x))
            atoms.append(Lt(x, _label_term(ranks.index(above))))
    fresh_group = all(ranks[i] != r for i in range(new))
    if bits is not None and fresh_group:
        atoms.append(S(x) if bits[r] == 1 else Not(S(x)))
    return conj(atoms)


def _root_diagram(key: tuple) -> Formula:
    ranks, bits = key
    atoms: list[Formula] = [Eq(MIN, MAX) if ranks[0] == ranks[1] else Lt(MIN, MAX)]
    if bits is not None:
        atoms.append(S(MIN) if bits[ranks[0]] == 1 else Not(S(MIN)))
        if ranks[0] != ranks[1]:
            atoms.append(S(MAX) if bits[ranks[1]] == 1 else Not(S(MAX)))
    return conj(atoms)


def synthesize_from_trace(tr: Trace, full_diagram: bool = False) -> Formula:
    """Build a prenex sentence whose prefix is the trace pattern and which separates its instance.

    The matrix is a decision tree over the atomic types seen in the trace: at
    round j the new variable is placed relative to the earlier labels, and
    each surviving common type continues one level deeper, while types of
    Spoiler's side that Duplicator failed to produce end the branch.  This
    stays correct when boards are pruned in the middle of the game, which a
    flat disjunction of the final left types does not.
    """
    if tr.won_at is None:
        raise PreconditionError("synthesis needs a won trace")
    if not tr.pruned:
        raise PreconditionError("synthesis needs a trace recorded with pruning on")
    rounds = tr.rounds[: tr.won_at]
    left0 = {type_key(b) for b in tr.initial.left}
    right0 = {type_key(b) for b in tr.initial.right}
    levels = []
    for rec in rounds:
        lt, rt = rec.left_types, rec.right_types
        kids: dict[tuple, list[tuple]] = {}
        for key in sorted(lt | rt, key=repr):
            kids.setdefault(parent_type(key), []).append(key)
        levels.append((rec.side, lt, rt, kids))
    cache: dict[tuple, Formula] = {}

    def inc(key: tuple) -> Formula:
        return _increment(key, full_diagram)

    def tree(pi: tuple, j: int) -> Formula:
        memo_key = (pi, j)
        if memo_key in cache:
            return cache[memo_key]
        side, lt, rt, kids = levels[j]
        children = kids.get(pi, [])
        parts = [conj((inc(k), tree(k, j + 1))) for k in children if k in lt and k in rt]
        if side == EXISTS:
            parts += [inc(k) for k in children if k in lt and k not in rt]
        else:
            parts.append(Not(disj(inc(k) for k in children if k in rt)))
        cache[memo_key] = result = disj(parts)
        return result

    branches = []
    for key in sorted(left0, key=repr):
        if key in right0:
            branches.append(conj((_root_diagram(key), tree(key, 0))))
        else:
            branches.append(_root_diagram(key))
    body = disj(branches)
    for j in range(len(rounds) - 1, -1, -1):
        body = quantify(rounds[j].side, f"x{j + 1}", body)
    return body


# ---------------------------------------------------------------------------
# Length-test formulas: α_ℓ(x, y) and ε_ℓ(x, y) hold iff x <= y and y - x <= ℓ


class _Fresh:
    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"r{self.n}"


def _le(x: Term, y: Term) -> Formula:
    return Or((Lt(x, y), Eq(x, y)))


def _between(x: Term, r: Term, y: Term) -> Formula:
    return And((Lt(x, r), Lt(r, y)))


def _alpha(ell: int, x: Term, y: Term, fresh: _Fresh) -> Formula:
    if ell == 1:
        r = Var(fresh())
        return And((_le(x, y), Forall(r.name, Implies(Lt(x, r), Not(Lt(r, y))))))
    if ell == 2:
        r, b = Var(fresh()), Var(fresh())
        inner = Implies(And((_between(x, r, y), _between(x, b, y))), Eq(r, b))
        return And((_le(x, y), Forall(r.name, Forall(b.name, inner))))
    if ell == 3:
        r, b, g = Var(fresh()), Var(fresh()), Var(fresh())
        only = Forall(g.name, Implies(_between(x, g, y), Or((Eq(g, r), Eq(g, b)))))
        body = Implies(_between(x, r, y), Exists(b.name, And((_between(x, b, y), only))))
        return And((_le(x, y), Forall(r.name, body)))
    k, odd = divmod(ell, 2)
    r = Var(fresh())
    left = _epsilon(k if odd else k - 1, x, r, fresh)
    right = _epsilon(k, r, y, fresh)
    return And((_le(x, y), Forall(r.name, Implies(_between(x, r, y), Or((left, right))))))


def _epsilon(ell: int, x: Term, y: Term, fresh: _Fresh) -> Formula:
    r = Var(fresh())
    if ell == 1:
        return Exists(r.name, And((Eq(r, x), _alpha(1, r, y, fresh))))
    k, odd = divmod(ell, 2)
    return Exists(r.name, And((_alpha(k, x, r, fresh), _alpha(k + odd, r, y, fresh))))


def build_alpha(ell: int) -> Formula:
    """Sentence true exactly on linear orders of length at most ell (universal form)."""
    if ell < 1:
        raise UsageError(f"build_alpha needs ell >= 1, got {ell}")
    if ell == 1:
        return And((Lt(MIN, MAX), Forall("r1", Implies(Lt(MIN, Var("r1")), Eq(MAX, Var("r1"))))))
    return _alpha(ell, MIN, MAX, _Fresh())


def build_epsilon(ell: int) -> Formula:
    """Sentence true exactly on linear orders of length at most ell (existential form)."""
    if ell < 2:
        raise UsageError(f"build_epsilon needs ell >= 2, got {ell}")
    return _epsilon(ell, MIN, MAX, _Fresh())


def length_at_most(ell: int, x: Term, y: Term) -> Formula:
    """Formula with free endpoints x, y stating x <= y and y - x <= ell."""
    return _alpha(ell, x, y, _Fresh())


# ---------------------------------------------------------------------------
# Relativization and quantifier pull-out


def relativize(sentence: Formula, lo: Term, hi: Term) -> Formula:
    """Prenex formula stating that the interval [lo, hi] satisfies the prenex ``sentence``.

    min and max are replaced by the endpoints and every quantifier is guarded to
    range over [lo, hi]; the result stays prenex with the same prefix.
    """
    spine, matrix = prefix(sentence)
    names = {v for _, v in spine}
    for t in (lo, hi):
        if isinstance(t, Var) and t.name in names:
            raise StructuralError(f"endpoint {t.name} clashes with a bound variable")

    def ends(g: Formula) -> Formula:
        kind = type(g)

        def term(t: Term) -> Term:
            if type(t) is Min:
                return lo
            if type(t) is Max:
                return hi
            return t

        if kind is Lt:
            return Lt(term(g.left), term(g.right))
        if kind is Eq:
            return Eq(term(g.left), term(g.right))
        if kind is S:
            return S(term(g.term))
        if kind is Not:
            return Not(ends(g.arg))
        if kind in (And, Or):
            return kind(tuple(ends(a) for a in g.args))
        return Implies(ends(g.left), ends(g.right))

    body = ends(matrix)
    for side, v in reversed(spine):
        inside = And((_le(lo, Var(v)), _le(Var(v), hi)))
        body = And((inside, body)) if side == EXISTS else Implies(inside, body)
    for side, v in reversed(spine):
        body = quantify(side, v, body)
    return body


def pull_out(
    outer_prefix: Sequence[tuple[str, str]],
    psi: Formula,
    guarded: Sequence[tuple[Formula, Formula]],
) -> Formula:
    """Merge ``Q x̄ (psi ∧ ∧_i (guard_i -> consequent_i))`` into one prenex sentence.

    The new prefix is ``outer_prefix`` followed by the longest consequent prefix.
    Shorter consequents must have prefixes that are final segments of the
    longest; they bind its last variables and the leading ones act as dummies.
    Guards are assumed mutually exclusive.
    """
    outer_vars = {v for _, v in outer_prefix}
    for side, _ in outer_prefix:
        if side not in (EXISTS, FORALL):
            raise UsageError(f"bad quantifier side {side!r}")
    for g in [psi] + [g for g, _ in guarded]:
        if qcount(g):
            raise StructuralError("psi and guards must be quantifier-free")
    spines = []
    for _, c in guarded:
        spine, matrix = prefix(c)
        clash = {v for _, v in spine} & outer_vars
        if clash:
            raise StructuralError(f"consequent requantifies outer variables {sorted(clash)}")
        spines.append((spine, matrix))
    longest = max(("".join(s for s, _ in spine) for spine, _ in spines), key=len, default="")
    for spine, _ in spines:
        pat = "".join(s for s, _ in spine)
        if not longest.endswith(pat):
            raise StructuralError(f"prefix {pat!r} is not a final segment of {longest!r}")
    taken = set(outer_vars)
    for f in [psi] + [g for g, _ in guarded] + [c for _, c in guarded]:
        taken |= free_vars(f)
        taken |= {v for v, _ in _all_bound(f)}
    fresh = []
    i = 1
    while len(fresh) < len(longest):
        name = f"y{i}"
        if name not in taken:
            fresh.append(name)
        i += 1
    h = len(longest)
    parts = [] if psi == TRUE else [psi]
    for (guard, _), (spine, matrix) in zip(guarded, spines):
        offset = h - len(spine)
        mapping = {v: Var(fresh[offset + k]) for k, (_, v) in enumerate(spine)}
        parts.append(Implies(guard, substitute(matrix, mapping)))
    body = conj(parts)
    for k in range(h - 1, -1, -1):
        body = quantify(longest[k], fresh[k], body)
    for side, v in reversed(list(outer_prefix)):
        body = quantify(side, v, body)
    return body


def _all_bound(f: Formula) -> list[tuple[str, str]]:
    t = type(f)
    if t in (Lt, Eq, S):
        return []
    if t is Not:
        return _all_bound(f.arg)
    if t in (And, Or):
        return [p for a in f.args for p in _all_bound(a)]
    if t is Implies:
        return _all_bound(f.left) + _all_bound(f.right)
    return [(f.var, "E" if t is Exists else "A")] + _all_bound(f.body)
