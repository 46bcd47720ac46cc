"""λ-term core: nameless terms, concrete syntax, substitution, normalization.

Terms use de Bruijn indices for λ-bound variables; binder names survive only
as display hints and never participate in equality. Unification variables are
ordinary heads applied to their argument spine with plain ``Apply`` nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

DEFAULT_FUEL = 10_000


class TermError(Exception):
    """Base class for term-level failures."""


class ParseError(TermError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at column {position})")
        self.position = position


class UnboundIdentifier(ParseError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unbound identifier {name!r}", position)
        self.name = name


class FuelExhausted(TermError):
    """Reduction-step budget ran out; the term is likely divergent."""


class NegativeIndex(TermError):
    """A shift would push a bound-variable index below zero."""


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class BoundVar(Term):
    index: int


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class UnifVar(Term):
    ident: int


@dataclass(frozen=True)
class Apply(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True)
class Lambda(Term):
    hint: str = field(compare=False)
    body: Term


def apply_spine(fun: Term, args) -> Term:
    for a in args:
        fun = Apply(fun, a)
    return fun


def lambdas(hints, body: Term) -> Term:
    for h in reversed(list(hints)):
        body = Lambda(h, body)
    return body


def strip(t: Term) -> tuple[Term, list[Term]]:
    """Split a term into its head and argument spine, leftmost-first."""
    args: list[Term] = []
    while isinstance(t, Apply):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def shift(t: Term, amount: int, cutoff: int = 0) -> Term:
    if amount == 0:
        return t
    match t:
        case BoundVar(index=k):
            if k < cutoff:
                return t
            if k + amount < 0:
                raise NegativeIndex(f"shift would take index {k} to {k + amount}")
            return BoundVar(k + amount)
        case Apply(fun=f, arg=a):
            return Apply(shift(f, amount, cutoff), shift(a, amount, cutoff))
        case Lambda(hint=h, body=b):
            return Lambda(h, shift(b, amount, cutoff + 1))
        case _:
            return t


def _subst_index(t: Term, j: int, arg: Term) -> Term:
    match t:
        case BoundVar(index=k):
            if k == j:
                return shift(arg, j) if j else arg
            return BoundVar(k - 1) if k > j else t
        case Apply(fun=f, arg=a):
            return Apply(_subst_index(f, j, arg), _subst_index(a, j, arg))
        case Lambda(hint=h, body=b):
            return Lambda(h, _subst_index(b, j + 1, arg))
        case _:
            return t


def instantiate_bound(body: Term, arg: Term) -> Term:
    """β-step primitive: substitute index 0 in a λ body, lowering escapees."""
    return _subst_index(body, 0, arg)


def loose_bound_vars(t: Term, depth: int = 0) -> set[int]:
    """Indices (relative to ``depth`` binders already stripped) free in t."""
    out: set[int] = set()

    def walk(t: Term, d: int) -> None:
        match t:
            case BoundVar(index=k):
                if k >= d:
                    out.add(k - d)
            case Apply(fun=f, arg=a):
                walk(f, d)
                walk(a, d)
            case Lambda(body=b):
                walk(b, d + 1)

    walk(t, depth)
    return out


def contains_unifvar(t: Term) -> bool:
    match t:
        case UnifVar():
            return True
        case Apply(fun=f, arg=a):
            return contains_unifvar(f) or contains_unifvar(a)
        case Lambda(body=b):
            return contains_unifvar(b)
        case _:
            return False


def unifvars_of(t: Term) -> set[int]:
    match t:
        case UnifVar(ident=v):
            return {v}
        case Apply(fun=f, arg=a):
            return unifvars_of(f) | unifvars_of(a)
        case Lambda(body=b):
            return unifvars_of(b)
        case _:
            return set()


class Fuel:
    """Mutable β-step budget shared across one normalization run."""

    __slots__ = ("remaining",)

    def __init__(self, steps: int):
        self.remaining = steps

    def spend(self) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise FuelExhausted("reduction budget exhausted; term may diverge")


def _whnf(t: Term, fuel: Fuel) -> Term:
    args: list[Term] = []
    while True:
        if isinstance(t, Apply):
            args.append(t.arg)
            t = t.fun
        elif isinstance(t, Lambda) and args:
            fuel.spend()
            t = instantiate_bound(t.body, args.pop())
        else:
            return apply_spine(t, reversed(args))


def _nf(t: Term, fuel: Fuel) -> Term:
    t = _whnf(t, fuel)
    match t:
        case Lambda(hint=h, body=b):
            return Lambda(h, _nf(b, fuel))
        case Apply(fun=f, arg=a):
            # After whnf the head is rigid, so fun cannot expose a new redex.
            return Apply(_nf(f, fuel), _nf(a, fuel))
        case _:
            return t


def normalize(t: Term, fuel: int | Fuel = DEFAULT_FUEL) -> Term:
    """Normal-order β-normal form; raises FuelExhausted on runaway terms."""
    budget = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    try:
        return _nf(t, budget)
    except RecursionError:
        # Untyped self-application can deepen terms faster than it spends
        # fuel; report it the same way as an exhausted budget.
        raise FuelExhausted(
            "term nesting exceeded the interpreter stack during normalization"
        ) from None


def eta_contract(t: Term) -> Term:
    """Fully η-contract a β-normal term."""
    match t:
        case Lambda(hint=h, body=b):
            b = eta_contract(b)
            if (
                isinstance(b, Apply)
                and b.arg == BoundVar(0)
                and 0 not in loose_bound_vars(b.fun)
            ):
                return shift(b.fun, -1)
            return Lambda(h, b)
        case Apply(fun=f, arg=a):
            return Apply(eta_contract(f), eta_contract(a))
        case _:
            return t


def alpha_beta_eta_equal(t: Term, u: Term, fuel: int = DEFAULT_FUEL) -> bool:
    """αβη-equality: β-normalize, η-contract, compare modulo binder hints."""
    return eta_contract(normalize(t, fuel)) == eta_contract(normalize(u, fuel))


# ---------------------------------------------------------------------------
# Concrete syntax
#
#   term    ::= binder+ '.' term | opterm
#   opterm  ::= app (SYM app)+       one infix symbol, right-associative
#             | app SYM              postfix symbol
#             | app
#   app     ::= atom+                left-associative application
#   atom    ::= identifier | '?'digits | '(' term ')'
#
# A constant named `_s_` declares infix symbol s, `_s` declares postfix s;
# any other name is an ordinary prefix constant. Distinct symbols never mix
# without parentheses.
# ---------------------------------------------------------------------------

PREFIX = "prefix"
INFIX = "infix"
POSTFIX = "postfix"


def fixity(name: str) -> tuple[str, str]:
    """(kind, display symbol) encoded by the underscore holes in a name."""
    if len(name) > 2 and name.startswith("_") and name.endswith("_") and "_" not in name[1:-1]:
        return INFIX, name[1:-1]
    if len(name) > 1 and name.startswith("_") and "_" not in name[1:]:
        return POSTFIX, name[1:]
    return PREFIX, name


@dataclass(frozen=True)
class NameEnv:
    """Constant table plus the binder-name stack for free indices.

    ``binders`` lists names outermost-first; index 0 is the last entry.
    """

    constants: frozenset[str] = frozenset()
    binders: tuple[str, ...] = ()

    @cached_property
    def operators(self) -> dict[str, str]:
        """Symbol → constant name, for infix/postfix occurrences."""
        table: dict[str, str] = {}
        for name in self.constants:
            kind, sym = fixity(name)
            if kind is PREFIX:
                continue
            if sym in table and table[sym] != name:
                raise ValueError(f"operator symbol {sym!r} declared twice")
            table[sym] = name
        return table

    @cached_property
    def _symbols_by_length(self) -> list[str]:
        return sorted(self.operators, key=len, reverse=True)

    def with_binders(self, names) -> "NameEnv":
        return NameEnv(self.constants, self.binders + tuple(names))

    def with_constants(self, names) -> "NameEnv":
        return NameEnv(self.constants | frozenset(names), self.binders)

    @property
    def depth(self) -> int:
        return len(self.binders)


_SPECIAL = set("().")


@dataclass(frozen=True)
class _Token:
    kind: str  # "(", ")", ".", "ident", "unifvar", "op"
    text: str
    pos: int


def _split_chunk(chunk: str, pos: int, env: NameEnv, known: set[str]) -> list[_Token]:
    # A chunk that is itself a declared name stays whole, so prefix uses of
    # operator constants (`_=_ x x`) survive.
    if chunk in known:
        return [_Token("ident", chunk, pos)]
    if chunk in env.operators:
        return [_Token("op", chunk, pos)]
    tokens: list[_Token] = []
    i = 0
    start = 0
    while i < len(chunk):
        for sym in env._symbols_by_length:
            if chunk.startswith(sym, i):
                if start < i:
                    tokens.append(_Token("ident", chunk[start:i], pos + start))
                tokens.append(_Token("op", sym, pos + i))
                i += len(sym)
                start = i
                break
        else:
            i += 1
    if start < len(chunk):
        tokens.append(_Token("ident", chunk[start:], pos + start))
    return tokens


def _tokenize(text: str, env: NameEnv, binders: set[str]) -> list[_Token]:
    known = set(env.constants) | binders
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _SPECIAL:
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in _SPECIAL:
            j += 1
        tokens.extend(_split_chunk(text[i:j], i, env, known))
        i = j
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], env: NameEnv, length: int):
        self.tokens = tokens
        self.env = env
        self.end = length

    def peek(self, i: int) -> _Token | None:
        return self.tokens[i] if i < len(self.tokens) else None

    def pos(self, i: int) -> int:
        tok = self.peek(i)
        return tok.pos if tok else self.end

    def term(self, i: int, binders: list[str]) -> tuple[Term, int]:
        # Abstraction: one or more binder names followed by '.'.
        j = i
        names: list[str] = []
        while (tok := self.peek(j)) and tok.kind == "ident" and not tok.text.startswith("?"):
            names.append(tok.text)
            j += 1
        if names and (tok := self.peek(j)) and tok.kind == ".":
            body, j = self.term(j + 1, binders + names)
            return lambdas(names, body), j
        return self.opterm(i, binders)

    def opterm(self, i: int, binders: list[str]) -> tuple[Term, int]:
        left, i = self.app(i, binders)
        tok = self.peek(i)
        if tok is None or tok.kind != "op":
            return left, i
        name = self.env.operators[tok.text]
        kind, _ = fixity(name)
        if kind is POSTFIX:
            t = Apply(Const(name), left)
            after = self.peek(i + 1)
            if after and after.kind == "op":
                raise ParseError(
                    "mixing operators requires parentheses", after.pos
                )
            return t, i + 1
        operands = [left]
        while (tok := self.peek(i)) and tok.kind == "op":
            if self.env.operators[tok.text] != name:
                raise ParseError(
                    "mixing operators requires parentheses", tok.pos
                )
            operand, i = self.app(i + 1, binders)
            operands.append(operand)
        t = operands[-1]
        for operand in reversed(operands[:-1]):  # right-associative
            t = Apply(Apply(Const(name), operand), t)
        return t, i

    def app(self, i: int, binders: list[str]) -> tuple[Term, int]:
        t, i = self.atom(i, binders)
        while (tok := self.peek(i)) and tok.kind in ("ident", "unifvar", "("):
            arg, i = self.atom(i, binders)
            t = Apply(t, arg)
        return t, i

    def atom(self, i: int, binders: list[str]) -> tuple[Term, int]:
        tok = self.peek(i)
        if tok is None:
            raise ParseError("unexpected end of input", self.end)
        if tok.kind == "(":
            t, i = self.term(i + 1, binders)
            close = self.peek(i)
            if close is None or close.kind != ")":
                raise ParseError("expected ')'", self.pos(i))
            return t, i + 1
        if tok.kind == "ident":
            name = tok.text
            if name.startswith("?"):
                digits = name[1:]
                if digits.isdigit():
                    return UnifVar(int(digits)), i + 1
                raise ParseError(f"malformed unification variable {name!r}", tok.pos)
            for back, binder in enumerate(reversed(binders)):
                if binder == name:
                    return BoundVar(back), i + 1
            if name in self.env.constants:
                return Const(name), i + 1
            raise UnboundIdentifier(name, tok.pos)
        if tok.kind == "op":
            raise ParseError(f"operator {tok.text!r} needs operands", tok.pos)
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)


def parse_term(text: str, env: NameEnv) -> Term:
    """Parse concrete syntax under env's constants and binder stack."""
    binders = list(env.binders)
    tokens = _tokenize(text, env, set(binders))
    parser = _Parser(tokens, env, len(text))
    t, i = parser.term(0, binders)
    if i != len(tokens):
        raise ParseError(f"trailing input {tokens[i].text!r}", tokens[i].pos)
    return t


# Printer result shapes, used to decide parenthesization at the call site.
_ATOM, _APP, _INFIX, _POSTFIX = range(4)


def _printable_hint(hint: str, symbols: list[str]) -> bool:
    if not hint or hint.startswith("?"):
        return False
    if any(c.isspace() or c in _SPECIAL for c in hint):
        return False
    return not any(sym in hint for sym in symbols)


def _fresh_hint(hint: str, taken: set[str], symbols: list[str]) -> str:
    name = hint if _printable_hint(hint, symbols) else "x"
    while name in taken:
        name += "'"
    return name


def freshen_binders(hints, env: NameEnv) -> tuple[str, ...]:
    """Distinct printable names for a binder stack, respecting hints."""
    taken = set(env.constants) | set(env.operators)
    symbols = list(env.operators)
    out: list[str] = []
    for h in hints:
        name = _fresh_hint(h, taken, symbols)
        taken.add(name)
        out.append(name)
    return tuple(out)


def print_term(t: Term, env: NameEnv, style: str = INFIX) -> str:
    """Render t so that parse_term(print_term(t)) is α-equal to t."""
    taken = set(env.constants) | set(env.operators) | set(env.binders)
    symbols = list(env.operators)

    def pr(t: Term, names: list[str], taken: set[str]) -> tuple[str, int, str]:
        match t:
            case BoundVar(index=k):
                if k >= len(names):
                    raise ValueError(f"unbound index {k} while printing")
                return names[-1 - k], _ATOM, ""
            case Const(name=name):
                return name, _ATOM, ""
            case UnifVar(ident=v):
                return f"?{v}", _ATOM, ""
            case Lambda():
                hints: list[str] = []
                inner = set(taken)
                body = t
                while isinstance(body, Lambda):
                    h = _fresh_hint(body.hint, inner, symbols)
                    hints.append(h)
                    inner.add(h)
                    body = body.body
                s, _, _ = pr(body, names + hints, inner)
                return f"({' '.join(hints)}. {s})", _ATOM, ""
            case Apply():
                head, args = strip(t)
                if style == INFIX and isinstance(head, Const):
                    kind, sym = fixity(head.name)
                    if kind is INFIX and len(args) == 2:
                        ls, lk, lop = pr(args[0], names, taken)
                        rs, rk, rop = pr(args[1], names, taken)
                        if lk not in (_ATOM, _APP):
                            ls = f"({ls})"
                        if rk not in (_ATOM, _APP) and not (
                            rk == _INFIX and rop == head.name
                        ):
                            rs = f"({rs})"
                        return f"{ls} {sym} {rs}", _INFIX, head.name
                    if kind is POSTFIX and len(args) == 1:
                        s, k, _ = pr(args[0], names, taken)
                        if k is not _ATOM:
                            s = f"({s})"
                        return f"{s} {sym}", _POSTFIX, ""
                fs, fk, _ = pr(t.fun, names, taken)
                if fk not in (_ATOM, _APP):
                    fs = f"({fs})"
                xs, xk, _ = pr(t.arg, names, taken)
                if xk is not _ATOM:
                    xs = f"({xs})"
                return f"{fs} {xs}", _APP, ""
        raise TypeError(f"not a term: {t!r}")

    s, _, _ = pr(t, list(env.binders), taken)
    return s
