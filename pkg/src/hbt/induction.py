"""Synthesis of cases (inversion) and induction rules for inductive judgments.

The user supplies only introduction rules; the derived rules enumerate, for
each intro, how a judgment instance could have arisen (cases) or what must be
shown for a motive to hold everywhere (induction). Mutually inductive
definitions share one motive per judgment and get simultaneous induction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rules import EQUALS, NamedRule, Rule
from .terms import Apply, BoundVar, Const, Term, apply_spine, fixity, strip


class InductiveError(Exception):
    pass


class UnknownJudgment(InductiveError):
    pass


class MalformedInductiveDef(InductiveError):
    pass


class PositivityViolation(InductiveError):
    pass


@dataclass(frozen=True)
class InductiveDef:
    judgments: tuple[tuple[str, int], ...]  # (head constant, arity)
    intros: tuple[NamedRule, ...]

    @property
    def heads(self) -> dict[str, int]:
        return dict(self.judgments)


def _intro_conclusion_parts(d: InductiveDef, intro: NamedRule) -> tuple[str, list[Term]]:
    head, args = strip(intro.rule.conclusion)
    if not isinstance(head, Const) or head.name not in d.heads:
        raise MalformedInductiveDef(
            f"intro rule {intro.name!r} does not conclude a declared judgment"
        )
    if len(args) != d.heads[head.name]:
        raise MalformedInductiveDef(
            f"intro rule {intro.name!r} applies {head.name!r} to {len(args)} "
            f"arguments, expected {d.heads[head.name]}"
        )
    return head.name, args


def _term_mentions(t: Term, names: set[str]) -> bool:
    match t:
        case Const(name=n):
            return n in names
        case Apply(fun=f, arg=a):
            return _term_mentions(f, names) or _term_mentions(a, names)
        case _:
            from .terms import Lambda

            if isinstance(t, Lambda):
                return _term_mentions(t.body, names)
            return False


def _rule_mentions(r: Rule, names: set[str]) -> bool:
    return _term_mentions(r.conclusion, names) or any(
        _rule_mentions(p, names) for p in r.premises
    )


def check_positivity(d: InductiveDef) -> None:
    """Judgment heads may not occur inside premises of intro premises."""
    heads = set(d.heads)
    for intro in d.intros:
        _intro_conclusion_parts(d, intro)
        for premise in intro.rule.premises:
            for nested in premise.premises:
                if _rule_mentions(nested, heads):
                    raise PositivityViolation(
                        f"intro rule {intro.name!r} uses a judgment in a "
                        "premise of a premise"
                    )


def _arg_names(arity: int) -> tuple[str, ...]:
    if arity == 1:
        return ("x",)
    return tuple(f"x{i}" for i in range(1, arity + 1))


def cases_name(judgment: str) -> str:
    return f"cases({judgment})"


def induction_name(judgment: str) -> str:
    return f"induction({judgment})"


def synthesize_cases(d: InductiveDef, judgment: str) -> NamedRule:
    """Inversion rule: ``P, x̄. judgment x̄, (per-intro branch)… ⊢ P``."""
    if judgment not in d.heads:
        raise UnknownJudgment(judgment)
    check_positivity(d)
    arity = d.heads[judgment]
    xs = _arg_names(arity)
    # binder layout, outermost first: P, x1..xn
    motive_at = lambda depth: BoundVar(depth + arity)  # noqa: E731
    xvar = lambda i, depth: BoundVar(depth + (arity - i))  # noqa: E731  (i is 1-based)

    major = Rule.fact(
        apply_spine(Const(judgment), [xvar(i, 0) for i in range(1, arity + 1)])
    )
    branches: list[Rule] = []
    for intro in d.intros:
        head, args = _intro_conclusion_parts(d, intro)
        if head != judgment:
            continue
        b = len(intro.rule.binders)
        equations = tuple(
            Rule.fact(Apply(Apply(Const(EQUALS), xvar(i + 1, b)), arg))
            for i, arg in enumerate(args)
        )
        branches.append(
            Rule(
                intro.rule.binders,
                equations + intro.rule.premises,
                motive_at(b),
            )
        )
    rule = Rule(("P",) + xs, (major, *branches), motive_at(0))
    return NamedRule(cases_name(judgment), rule, "derived-cases")


def synthesize_induction(d: InductiveDef) -> list[NamedRule]:
    """One (simultaneous) induction rule per judgment, sharing motives."""
    check_positivity(d)
    heads = d.heads
    order = [name for name, _ in d.judgments]
    nmotives = len(order)
    if nmotives == 1:
        motive_names: tuple[str, ...] = ("P",)
    else:
        motive_names = tuple(f"P_{fixity(name)[1]}" for name in order)

    out: list[NamedRule] = []
    for t_index, (judgment, arity) in enumerate(d.judgments):
        xs = _arg_names(arity)

        def motive(s_index: int, depth: int) -> Term:
            return BoundVar(depth + arity + (nmotives - 1 - s_index))

        def xvar(i: int, depth: int) -> Term:  # i is 1-based
            return BoundVar(depth + (arity - i))

        major = Rule.fact(
            apply_spine(Const(judgment), [xvar(i, 0) for i in range(1, arity + 1)])
        )
        branches: list[Rule] = []
        for intro in d.intros:
            head, args = _intro_conclusion_parts(d, intro)
            b = len(intro.rule.binders)
            premises: list[Rule] = []
            for q in intro.rule.premises:
                qhead, qargs = strip(q.conclusion)
                if isinstance(qhead, Const) and qhead.name in heads:
                    if len(qargs) != heads[qhead.name]:
                        raise MalformedInductiveDef(
                            f"intro rule {intro.name!r} applies {qhead.name!r} "
                            f"to {len(qargs)} arguments"
                        )
                    qb = len(q.binders)
                    s_index = order.index(qhead.name)
                    hypothesis = Rule(
                        q.binders,
                        q.premises,
                        apply_spine(motive(s_index, qb + b), qargs),
                    )
                    premises += [hypothesis, q]
                else:
                    premises.append(q)
            s_index = order.index(head)
            branches.append(
                Rule(intro.rule.binders, tuple(premises), apply_spine(motive(s_index, b), args))
            )
        conclusion = apply_spine(
            motive(t_index, 0), [xvar(i, 0) for i in range(1, arity + 1)]
        )
        rule = Rule(motive_names + xs, (major, *branches), conclusion)
        out.append(NamedRule(induction_name(judgment), rule, "derived-induction"))
    return out
