"""Hereditary Harrop rules and their instantiation schemes.

A rule binds metavariables over premises (themselves rules) and a conclusion.
Backward application instantiates every binder with a fresh unification
variable applied to the whole ambient spine; forward (elimination) use splits
instantiation in two phases so the conclusion unification stays inside the
pattern fragment.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    DEFAULT_FUEL,
    Apply,
    BoundVar,
    Const,
    NameEnv,
    Term,
    UnifVar,
    apply_spine,
    freshen_binders,
    loose_bound_vars,
    normalize,
    print_term,
    shift,
    strip,
)
from .unification import FreshIds, Substitution, apply_subst

EQUALS = "_=_"


@dataclass(frozen=True)
class Rule:
    binders: tuple[str, ...]
    premises: tuple["Rule", ...]
    conclusion: Term

    @staticmethod
    def fact(conclusion: Term) -> "Rule":
        """A plain formula: no binders, no premises."""
        return Rule((), (), conclusion)

    @property
    def is_fact(self) -> bool:
        return not self.binders and not self.premises


@dataclass(frozen=True)
class NamedRule:
    name: str
    rule: Rule
    kind: str = "axiom"  # axiom | theorem | derived-cases | derived-induction | builtin-refl


@dataclass(frozen=True)
class InstantiatedRule:
    premises: tuple[Rule, ...]
    conclusion: Term
    introduced: tuple[int, ...]


REFL = NamedRule(
    "refl",
    Rule(("x",), (), Apply(Apply(Const(EQUALS), BoundVar(0)), BoundVar(0))),
    "builtin-refl",
)


def map_rule_terms(r: Rule, f, depth: int = 0) -> Rule:
    """Rebuild a rule applying f(term, binder_depth) to every term."""
    d = depth + len(r.binders)
    return Rule(
        r.binders,
        tuple(map_rule_terms(p, f, d) for p in r.premises),
        f(r.conclusion, d),
    )


def shift_rule(r: Rule, amount: int, cutoff: int = 0) -> Rule:
    return map_rule_terms(r, lambda t, d: shift(t, amount, cutoff + d))


def apply_subst_rule(s: Substitution, r: Rule, fuel: int = DEFAULT_FUEL) -> Rule:
    return map_rule_terms(r, lambda t, d: apply_subst(s, t, fuel))


def normalize_rule(r: Rule, fuel: int = DEFAULT_FUEL) -> Rule:
    return map_rule_terms(r, lambda t, d: normalize(t, fuel))


def loose_rule_vars(r: Rule) -> set[int]:
    """Free indices of r relative to the context enclosing its binders."""
    n = len(r.binders)
    out = {k - n for k in loose_bound_vars(r.conclusion) if k >= n}
    for p in r.premises:
        out |= {k - n for k in loose_rule_vars(p) if k >= n}
    return out


def rule_well_scoped(r: Rule, ambient: int) -> bool:
    return all(k < ambient for k in loose_rule_vars(r))


def rule_unifvars(r: Rule) -> set[int]:
    from .terms import unifvars_of

    out = unifvars_of(r.conclusion)
    for p in r.premises:
        out |= rule_unifvars(p)
    return out


def is_introduction_format(r: Rule) -> bool:
    """True iff the conclusion's head is a constant, so the rule does not
    unify with every goal."""
    head, _ = strip(r.conclusion)
    return isinstance(head, Const)


def _substitute_binders(
    r: Rule, values: dict[int, Term], remaining: tuple[int, ...], n: int
) -> Rule:
    """Replace binder positions in ``values`` by their terms; compact the
    ``remaining`` binder positions; lower ambient indices past the removed
    binders. Values are expressed at ambient depth and get shifted under
    whatever binders enclose each occurrence."""
    from .terms import Lambda

    m = len(remaining)

    def walk(t: Term, ld: int) -> Term:
        match t:
            case BoundVar(index=k):
                if k < ld:
                    return t
                k2 = k - ld
                if k2 < n:
                    i = n - 1 - k2  # binder position, 0 = outermost
                    if i in values:
                        return shift(values[i], ld + m)
                    j = remaining.index(i)
                    return BoundVar(ld + (m - 1 - j))
                return BoundVar(k - n + m)
            case Apply(fun=f, arg=a):
                return Apply(walk(f, ld), walk(a, ld))
            case Lambda(hint=h, body=b):
                return Lambda(h, walk(b, ld + 1))
            case _:
                return t

    def on_rule(rr: Rule, ld: int) -> Rule:
        d = ld + len(rr.binders)
        return Rule(
            rr.binders,
            tuple(on_rule(p, d) for p in rr.premises),
            walk(rr.conclusion, d),
        )

    names = tuple(r.binders[i] for i in remaining)
    inner = on_rule(Rule((), r.premises, r.conclusion), 0)
    return Rule(names, inner.premises, inner.conclusion)


def ambient_spine(depth: int, skip: set[int] | None = None) -> list[Term]:
    """All ambient variables, outermost first, optionally omitting some."""
    skip = skip or set()
    return [BoundVar(i) for i in range(depth - 1, -1, -1) if i not in skip]


def instantiate(
    r: Rule, depth: int, fresh: FreshIds, fuel: int = DEFAULT_FUEL
) -> InstantiatedRule:
    """Replace every binder by a fresh variable applied to the full ambient
    spine."""
    n = len(r.binders)
    spine = ambient_spine(depth)
    ids: list[int] = []
    values: dict[int, Term] = {}
    for i in range(n):
        v = fresh.take()
        ids.append(v)
        values[i] = apply_spine(UnifVar(v), spine)
    out = _substitute_binders(r, values, (), n)
    out = normalize_rule(out, fuel)
    return InstantiatedRule(out.premises, out.conclusion, tuple(ids))


@dataclass(frozen=True)
class TwoPhaseInstantiation:
    """Phase one of elimination instantiation plus its continuation state."""

    first_premise: Rule
    partial: Rule  # remaining binders still bound; all premises retained
    introduced: tuple[int, ...]
    depth: int

    def complete(
        self, subst: Substitution, fresh: FreshIds, fuel: int = DEFAULT_FUEL
    ) -> InstantiatedRule:
        """Apply the premise-one substitution, then instantiate the remaining
        binders applied only to ambient variables absent from the substituted
        conclusion."""
        r = normalize_rule(apply_subst_rule(subst, self.partial, fuel), fuel)
        n = len(r.binders)
        occupied = {
            k - n for k in loose_bound_vars(r.conclusion) if k >= n
        }
        spine = ambient_spine(self.depth, skip=occupied)
        ids: list[int] = []
        values: dict[int, Term] = {}
        for i in range(n):
            v = fresh.take()
            ids.append(v)
            values[i] = apply_spine(UnifVar(v), spine)
        out = normalize_rule(_substitute_binders(r, values, (), n), fuel)
        return InstantiatedRule(
            out.premises, out.conclusion, self.introduced + tuple(ids)
        )


def instantiate_two_phase(
    r: Rule, depth: int, fresh: FreshIds, fuel: int = DEFAULT_FUEL
) -> TwoPhaseInstantiation:
    """Instantiate only the binders occurring in the first premise, with the
    full ambient spine; the rest wait for the premise-one substitution."""
    if not r.premises:
        raise ValueError("two-phase instantiation needs at least one premise")
    n = len(r.binders)
    refs = {k for k in loose_rule_vars(r.premises[0]) if k < n}
    phase1 = sorted(n - 1 - k for k in refs)  # binder positions
    spine = ambient_spine(depth)
    ids: list[int] = []
    values: dict[int, Term] = {}
    for i in phase1:
        v = fresh.take()
        ids.append(v)
        values[i] = apply_spine(UnifVar(v), spine)
    remaining = tuple(i for i in range(n) if i not in values)
    partial = normalize_rule(_substitute_binders(r, values, remaining, n), fuel)
    # Premise one mentions no remaining binder, so it can be read at ambient
    # depth directly.
    first = shift_rule(partial.premises[0], -len(remaining))
    return TwoPhaseInstantiation(first, partial, tuple(ids), depth)


def print_rule(r: Rule, env: NameEnv, style: str = "infix") -> str:
    """Linear rendering: ``binders. premises ⊢ conclusion``."""
    names = freshen_binders(r.binders, env)
    inner = env.with_binders(names)
    parts = []
    for p in r.premises:
        s = print_rule(p, inner, style)
        parts.append(f"({s})" if not p.is_fact else s)
    body = print_term(r.conclusion, inner, style)
    if parts:
        body = f"{', '.join(parts)} ⊢ {body}"
    if names:
        body = f"{' '.join(names)}. {body}"
    return body
