"""Goal-tree proof engine.

A proof is a tree of goals mirroring the inference tree: each node records
the step that solved it (if any), the metavariables and assumptions it
introduced, and its subtrees. Steps unify via the pattern fragment and apply
the resulting substitution to every goal in the proof. States are values:
every operation returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .rules import (
    EQUALS,
    InstantiatedRule,
    NamedRule,
    Rule,
    apply_subst_rule,
    instantiate,
    instantiate_two_phase,
    is_introduction_format,
    print_rule,
    rule_unifvars,
    shift_rule,
)
from .terms import (
    DEFAULT_FUEL,
    Apply,
    Const,
    Lambda,
    NameEnv,
    Term,
    freshen_binders,
    print_term,
    shift,
    strip,
    unifvars_of,
)
from .unification import (
    FreshIds,
    Substitution,
    UnifyError,
    apply_subst,
    compose,
    unify,
)

GoalRef = tuple[int, ...]

LTR = "→"
RTL = "←"


class EngineError(Exception):
    pass


class InvalidGoalRef(EngineError):
    pass


class InvalidPath(EngineError):
    pass


class ApplyError(EngineError):
    pass


class NoUnifier(ApplyError):
    def __init__(self, message: str, site: str = "conclusion"):
        super().__init__(message)
        self.site = site


class NoMatchingSubterm(ApplyError):
    pass


class OccurrenceOutOfRange(ApplyError):
    pass


@dataclass(frozen=True)
class Step:
    op: str  # intro | assumption | elim | rewrite | refl
    rule: str | None = None
    assumption: int | None = None
    direction: str | None = None
    occurrence: int | None = None


@dataclass(frozen=True)
class ProofNode:
    new_locals: tuple[str, ...]
    new_assumptions: tuple[Rule, ...]
    target: Term
    step: Step | None = None
    children: tuple["ProofNode", ...] = ()

    @property
    def unsolved(self) -> bool:
        return self.step is None


@dataclass(frozen=True)
class Goal:
    """Path-aggregated view of one node: everything in scope plus the target."""

    locals: tuple[str, ...]
    assumptions: tuple[Rule, ...]  # shifted to the goal's depth
    target: Term

    @property
    def depth(self) -> int:
        return len(self.locals)


@dataclass(frozen=True)
class ProofState:
    theorem: NamedRule
    tree: ProofNode
    subst: Substitution
    next_id: int
    env: NameEnv = NameEnv()
    fuel: int = DEFAULT_FUEL


@dataclass(frozen=True)
class GoalSummary:
    target: Term
    locals: tuple[str, ...]
    assumptions: tuple[Rule, ...]
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class CheckReport:
    complete: bool
    solved: bool
    step_errors: tuple[tuple[GoalRef, str], ...]
    unsolved: tuple[GoalRef, ...]
    unresolved_unifvars: tuple[int, ...]


def new_proof(
    theorem: NamedRule, env: NameEnv = NameEnv(), fuel: int = DEFAULT_FUEL
) -> ProofState:
    """Root goal: theorem binders become locals, premises become assumptions."""
    r = theorem.rule
    if rule_unifvars(r):
        raise ValueError("theorem statements may not contain unification variables")
    root = ProofNode(tuple(r.binders), tuple(r.premises), r.conclusion)
    return ProofState(theorem, root, Substitution.empty(), 0, env, fuel)


def node_at(state: ProofState, ref: GoalRef) -> ProofNode:
    node = state.tree
    for i in ref:
        if not 0 <= i < len(node.children):
            raise InvalidGoalRef(f"no node at path {list(ref)}")
        node = node.children[i]
    return node


def goal_at(state: ProofState, ref: GoalRef) -> Goal:
    node = state.tree
    nodes = [node]
    for i in ref:
        if not 0 <= i < len(node.children):
            raise InvalidGoalRef(f"no node at path {list(ref)}")
        node = node.children[i]
        nodes.append(node)
    locals_: list[str] = []
    placed: list[tuple[Rule, int]] = []
    for n in nodes:
        locals_ += n.new_locals
        depth_here = len(locals_)
        placed += [(a, depth_here) for a in n.new_assumptions]
    depth = len(locals_)
    assumptions = tuple(shift_rule(a, depth - d) for a, d in placed)
    return Goal(tuple(locals_), assumptions, node.target)


def unsolved_goals(state: ProofState) -> list[GoalRef]:
    out: list[GoalRef] = []

    def walk(node: ProofNode, path: GoalRef) -> None:
        if node.unsolved:
            out.append(path)
        for i, c in enumerate(node.children):
            walk(c, path + (i,))

    walk(state.tree, ())
    return out


def _update_node(node: ProofNode, path: GoalRef, fn) -> ProofNode:
    if not path:
        return fn(node)
    i = path[0]
    children = list(node.children)
    children[i] = _update_node(children[i], path[1:], fn)
    return replace(node, children=tuple(children))


def _subst_node(node: ProofNode, s: Substitution, fuel: int) -> ProofNode:
    if not s:
        return node
    return ProofNode(
        node.new_locals,
        tuple(apply_subst_rule(s, a, fuel) for a in node.new_assumptions),
        apply_subst(s, node.target, fuel),
        node.step,
        tuple(_subst_node(c, s, fuel) for c in node.children),
    )


def _child_from_premise(p: Rule) -> ProofNode:
    return ProofNode(tuple(p.binders), tuple(p.premises), p.conclusion)


def _require_open(state: ProofState, ref: GoalRef) -> ProofNode:
    node = node_at(state, ref)
    if not node.unsolved:
        raise InvalidGoalRef(f"goal {list(ref)} is already solved")
    return node


def _pretty(state: ProofState, goal: Goal, t: Term) -> str:
    names = freshen_binders(goal.locals, state.env)
    return print_term(t, state.env.with_binders(names))


def _unify_or_fail(
    state: ProofState,
    goal: Goal,
    lhs: Term,
    rhs: Term,
    fresh: FreshIds,
    site: str,
) -> Substitution:
    try:
        return unify(lhs, rhs, fresh, goal.depth, state.fuel)
    except UnifyError as exc:
        from .unification import OutsidePatternFragment

        if isinstance(exc, OutsidePatternFragment):
            raise
        raise NoUnifier(
            f"no unifier at the {site}: "
            f"{_pretty(state, goal, lhs)}  vs  {_pretty(state, goal, rhs)}  ({exc})",
            site,
        ) from exc


def _commit(
    state: ProofState,
    ref: GoalRef,
    step: Step,
    children: tuple[ProofNode, ...],
    sigma: Substitution,
    fresh: FreshIds,
) -> ProofState:
    tree = _subst_node(state.tree, sigma, state.fuel)
    tree = _update_node(
        tree, ref, lambda node: replace(node, step=step, children=children)
    )
    return replace(
        state,
        tree=tree,
        subst=compose(sigma, state.subst),
        next_id=fresh.next_id,
    )


def _backward(
    state: ProofState, ref: GoalRef, rule: Rule, step: Step
) -> ProofState:
    _require_open(state, ref)
    goal = goal_at(state, ref)
    fresh = FreshIds(state.next_id)
    inst = instantiate(rule, goal.depth, fresh, state.fuel)
    sigma = _unify_or_fail(state, goal, inst.conclusion, goal.target, fresh, "conclusion")
    children = tuple(
        _child_from_premise(apply_subst_rule(sigma, p, state.fuel))
        for p in inst.premises
    )
    return _commit(state, ref, step, children, sigma, fresh)


def apply_intro(state: ProofState, ref: GoalRef, rule: NamedRule) -> ProofState:
    """Backward application: unify the conclusion, premises become subgoals."""
    return _backward(state, ref, rule.rule, Step("intro", rule=rule.name))


def apply_assumption(state: ProofState, ref: GoalRef, assumption: int) -> ProofState:
    """Apply an assumption exactly like a rule; facts close the goal."""
    goal = goal_at(state, ref)
    if not 0 <= assumption < len(goal.assumptions):
        raise ApplyError(f"assumption {assumption} is not in scope")
    return _backward(
        state,
        ref,
        goal.assumptions[assumption],
        Step("assumption", assumption=assumption),
    )


def apply_refl(state: ProofState, ref: GoalRef) -> ProofState:
    """Close an equation whose two sides unify (αβη)."""
    from .rules import REFL

    goal = goal_at(state, ref)
    head, args = strip(goal.target)
    if head != Const(EQUALS) or len(args) != 2:
        raise NoUnifier(
            f"refl needs an equation, goal is {_pretty(state, goal, goal.target)}"
        )
    return _backward(state, ref, REFL.rule, Step("refl"))


def apply_elim(
    state: ProofState, ref: GoalRef, assumption: int, rule: NamedRule
) -> ProofState:
    """Forward application: unify the rule's first premise with an assumption,
    then (two-phase) its conclusion with the goal. The first subgoal is
    discharged by the assumption and omitted."""
    _require_open(state, ref)
    goal = goal_at(state, ref)
    if not 0 <= assumption < len(goal.assumptions):
        raise ApplyError(f"assumption {assumption} is not in scope")
    target_assumption = goal.assumptions[assumption]
    if not target_assumption.is_fact:
        raise ApplyError(
            f"assumption {assumption} is hypothetical and cannot be eliminated"
        )
    if not rule.rule.premises:
        raise ApplyError(f"rule {rule.name!r} has no premise to eliminate with")
    fresh = FreshIds(state.next_id)
    phase = instantiate_two_phase(rule.rule, goal.depth, fresh, state.fuel)
    if not phase.first_premise.is_fact:
        raise ApplyError(
            f"rule {rule.name!r} has a hypothetical first premise; it cannot be "
            "applied to an assumption"
        )
    sigma1 = _unify_or_fail(
        state,
        goal,
        phase.first_premise.conclusion,
        target_assumption.conclusion,
        fresh,
        "premise",
    )
    inst = phase.complete(sigma1, fresh, state.fuel)
    target = apply_subst(sigma1, goal.target, state.fuel)
    sigma2 = _unify_or_fail(state, goal, inst.conclusion, target, fresh, "conclusion")
    sigma = compose(sigma2, sigma1)
    children = tuple(
        _child_from_premise(apply_subst_rule(sigma2, p, state.fuel))
        for p in inst.premises[1:]
    )
    step = Step("elim", rule=rule.name, assumption=assumption)
    return _commit(state, ref, step, children, sigma, fresh)


def _equation_sides(state: ProofState, goal: Goal, inst: InstantiatedRule) -> tuple[Term, Term]:
    head, args = strip(inst.conclusion)
    if head != Const(EQUALS) or len(args) != 2:
        raise ApplyError("rewriting needs an equation with head _=_")
    return args[0], args[1]


def rewrite(
    state: ProofState,
    ref: GoalRef,
    equation: NamedRule | int,
    direction: str = LTR,
    occurrence: int = 0,
) -> ProofState:
    """Replace the occurrence-th subterm (leftmost-outermost order) unifying
    with one side of the equation by the instantiated other side."""
    _require_open(state, ref)
    if direction not in (LTR, RTL):
        raise ApplyError(f"unknown rewrite direction {direction!r}")
    goal = goal_at(state, ref)
    fresh = FreshIds(state.next_id)
    if isinstance(equation, int):
        if not 0 <= equation < len(goal.assumptions):
            raise ApplyError(f"assumption {equation} is not in scope")
        eq_rule = goal.assumptions[equation]
        if not eq_rule.is_fact:
            raise ApplyError("only premise-free assumptions can rewrite")
        step = Step(
            "rewrite", assumption=equation, direction=direction, occurrence=occurrence
        )
    else:
        if equation.rule.premises:
            raise ApplyError(
                f"rule {equation.name!r} has premises and cannot rewrite"
            )
        eq_rule = equation.rule
        step = Step(
            "rewrite", rule=equation.name, direction=direction, occurrence=occurrence
        )
    inst = instantiate(eq_rule, goal.depth, fresh, state.fuel)
    left, right = _equation_sides(state, goal, inst)
    pattern, replacement = (left, right) if direction == LTR else (right, left)

    matches = 0
    sigma_found: Substitution | None = None

    def attempt(t: Term, b: int) -> Substitution | None:
        try:
            return unify(shift(pattern, b), t, fresh, goal.depth + b, state.fuel)
        except UnifyError:
            return None

    def walk(t: Term, b: int) -> Term | None:
        nonlocal matches, sigma_found
        sigma = attempt(t, b)
        if sigma is not None:
            if matches == occurrence:
                sigma_found = sigma
                return apply_subst(sigma, shift(replacement, b), state.fuel)
            matches += 1
        match t:
            case Apply(fun=f, arg=a):
                done = walk(f, b)
                if done is not None:
                    return Apply(done, a)
                done = walk(a, b)
                if done is not None:
                    return Apply(f, done)
            case Lambda(hint=h, body=body):
                done = walk(body, b + 1)
                if done is not None:
                    return Lambda(h, done)
        return None

    rewritten = walk(goal.target, 0)
    if rewritten is None:
        if matches == 0:
            raise NoMatchingSubterm(
                f"no subterm of {_pretty(state, goal, goal.target)} matches "
                f"{_pretty(state, goal, pattern)}"
            )
        raise OccurrenceOutOfRange(
            f"only {matches} matching subterms, occurrence {occurrence} requested"
        )
    assert sigma_found is not None
    new_target = apply_subst(sigma_found, rewritten, state.fuel)
    child = ProofNode((), (), new_target)
    return _commit(state, ref, step, (child,), sigma_found, fresh)


def clear_subtree(state: ProofState, path: GoalRef, scope: Mapping[str, NamedRule]) -> ProofState:
    """Reset a node to unsolved and recompute the global substitution by
    replaying the remaining steps."""
    try:
        node_at(state, path)
    except InvalidGoalRef as exc:
        raise InvalidPath(str(exc)) from exc
    cleared = _update_node(
        state.tree, path, lambda node: replace(node, step=None, children=())
    )
    steps = script_of(cleared)
    replayed, errors = replay(state.theorem, steps, scope, state.env, state.fuel)
    if errors:
        # Remaining steps were valid before; a failure here is a logic error.
        raise InvalidPath(f"replay after clearing failed: {errors[0][1]}")
    return replayed


def script_of(tree: ProofNode) -> list[tuple[GoalRef, Step]]:
    """Steps in preorder; parents precede children, siblings left to right."""
    out: list[tuple[GoalRef, Step]] = []

    def walk(node: ProofNode, path: GoalRef) -> None:
        if node.step is not None:
            out.append((path, node.step))
        for i, c in enumerate(node.children):
            walk(c, path + (i,))

    walk(tree, ())
    return out


def apply_step(
    state: ProofState,
    ref: GoalRef,
    step: Step,
    scope: Mapping[str, NamedRule],
) -> ProofState:
    def named(name: str | None) -> NamedRule:
        if name is None or name not in scope:
            raise ApplyError(f"unknown rule {name!r}")
        return scope[name]

    match step.op:
        case "intro":
            return apply_intro(state, ref, named(step.rule))
        case "assumption":
            if step.assumption is None:
                raise ApplyError("assumption step without a number")
            return apply_assumption(state, ref, step.assumption)
        case "elim":
            if step.assumption is None:
                raise ApplyError("elim step without an assumption number")
            return apply_elim(state, ref, step.assumption, named(step.rule))
        case "rewrite":
            eq: NamedRule | int
            if step.assumption is not None:
                eq = step.assumption
            else:
                eq = named(step.rule)
            return rewrite(
                state, ref, eq, step.direction or LTR, step.occurrence or 0
            )
        case "refl":
            return apply_refl(state, ref)
    raise ApplyError(f"unknown operation {step.op!r}")


def replay(
    theorem: NamedRule,
    steps: Iterable[tuple[GoalRef, Step]],
    scope: Mapping[str, NamedRule],
    env: NameEnv = NameEnv(),
    fuel: int = DEFAULT_FUEL,
) -> tuple[ProofState, list[tuple[GoalRef, str]]]:
    """Run a script from scratch, collecting per-step errors."""
    state = new_proof(theorem, env, fuel)
    errors: list[tuple[GoalRef, str]] = []
    from .terms import FuelExhausted

    for ref, step in steps:
        try:
            state = apply_step(state, ref, step, scope)
        except (EngineError, UnifyError, FuelExhausted) as exc:
            errors.append((ref, f"{type(exc).__name__}: {exc}"))
    return state, errors


def tree_unifvars(node: ProofNode) -> set[int]:
    out = unifvars_of(node.target)
    for a in node.new_assumptions:
        out |= rule_unifvars(a)
    for c in node.children:
        out |= tree_unifvars(c)
    return out


def check_tree(state: ProofState, scope: Mapping[str, NamedRule]) -> CheckReport:
    """Replay every recorded step from the root with a fresh id source."""
    steps = script_of(state.tree)
    replayed, errors = replay(state.theorem, steps, scope, state.env, state.fuel)
    unsolved = tuple(unsolved_goals(replayed))
    unresolved = tuple(sorted(tree_unifvars(replayed.tree)))
    solved = not unsolved and not errors
    return CheckReport(
        complete=solved and not unresolved,
        solved=solved,
        step_errors=tuple(errors),
        unsolved=unsolved,
        unresolved_unifvars=unresolved,
    )


def goal_summary(
    state: ProofState,
    ref: GoalRef,
    rules: Iterable[NamedRule] = (),
    show_all: bool = False,
    check_unifiable: bool = False,
) -> GoalSummary:
    """The open goal plus the applicable rules from the given scope."""
    node = node_at(state, ref)
    if not node.unsolved:
        raise InvalidGoalRef(f"goal {list(ref)} is already solved")
    goal = goal_at(state, ref)
    names: list[str] = []
    for nr in rules:
        if not show_all and not is_introduction_format(nr.rule):
            continue
        if check_unifiable and not _could_apply(state, goal, nr):
            continue
        names.append(nr.name)
    return GoalSummary(goal.target, goal.locals, goal.assumptions, tuple(names))


def _could_apply(state: ProofState, goal: Goal, nr: NamedRule) -> bool:
    fresh = FreshIds(10**9)  # throwaway ids; never committed
    try:
        inst = instantiate(nr.rule, goal.depth, fresh, state.fuel)
        unify(inst.conclusion, goal.target, fresh, goal.depth, state.fuel)
        return True
    except UnifyError:
        return False


def goal_display(state: ProofState, ref: GoalRef) -> dict:
    """Printable view of one goal, for transcripts and interfaces."""
    goal = goal_at(state, ref)
    names = freshen_binders(goal.locals, state.env)
    env = state.env.with_binders(names)
    return {
        "locals": list(names),
        "assumptions": [print_rule(a, env) for a in goal.assumptions],
        "target": print_term(goal.target, env),
    }
