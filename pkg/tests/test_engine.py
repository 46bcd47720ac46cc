import pytest

from hbt.engine import (
    ApplyError,
    InvalidGoalRef,
    NoMatchingSubterm,
    NoUnifier,
    OccurrenceOutOfRange,
    Step,
    apply_assumption,
    apply_elim,
    apply_intro,
    apply_refl,
    apply_step,
    check_tree,
    clear_subtree,
    goal_at,
    goal_display,
    goal_summary,
    new_proof,
    node_at,
    replay,
    rewrite,
    script_of,
    unsolved_goals,
)
from hbt.rules import NamedRule, Rule
from hbt.terms import NameEnv, parse_term
from hbt.unification import OutsidePatternFragment

from helpers import CORE_CONSTANTS, base_axioms, full_scope, rule_of


@pytest.fixture
def scope(env):
    return full_scope(env)


def theorem(env, name, binders, premises, conclusion):
    return NamedRule(name, rule_of(env, binders, premises, conclusion), "theorem")


@pytest.fixture
def conj_comm(env):
    return theorem(env, "/\\comm", ["A", "B"], [], "(A /\\ B) -> (B /\\ A)")


def finish_conj_comm(state, scope):
    state = apply_intro(state, (), scope["->I"])
    state = apply_intro(state, (0,), scope["/\\I"])
    state = apply_intro(state, (0, 0), scope["/\\E2"])
    state = apply_assumption(state, (0, 0, 0), 0)
    state = apply_intro(state, (0, 1), scope["/\\E1"])
    state = apply_assumption(state, (0, 1, 0), 0)
    return state


def test_new_proof_conj_comm(env, conj_comm):
    st = new_proof(conj_comm, env)
    assert goal_display(st, ()) == {
        "locals": ["A", "B"],
        "assumptions": [],
        "target": "(A /\\ B) -> (B /\\ A)",
    }


def test_new_proof_numbers_premises(env):
    thm = theorem(env, "pred", ["n"], ["n ℕ", "¬ (n = 0)"], "∃ (k. n = S k)")
    st = new_proof(thm, env)
    assert goal_display(st, ()) == {
        "locals": ["n"],
        "assumptions": ["n ℕ", "¬ (n = 0)"],
        "target": "∃ (k. n = S k)",
    }


def test_new_proof_trivial_theorem(env):
    thm = theorem(env, "z", [], [], "0 = 0")
    st = new_proof(thm, env)
    g = goal_at(st, ())
    assert g.locals == () and g.assumptions == ()


def test_intro_arrow_then_conj(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    st = apply_intro(st, (), scope["->I"])
    assert goal_display(st, (0,)) == {
        "locals": ["A", "B"],
        "assumptions": ["A /\\ B"],
        "target": "B /\\ A",
    }
    st = apply_intro(st, (0,), scope["/\\I"])
    assert goal_display(st, (0, 0))["target"] == "B"
    assert goal_display(st, (0, 1))["target"] == "A"


def test_intro_clash_reports_both_sides(env, scope):
    thm = theorem(env, "t", ["A", "B"], [], "A \\/ B")
    st = new_proof(thm, env)
    with pytest.raises(NoUnifier) as exc:
        apply_intro(st, (), scope["/\\I"])
    assert "\\/" in str(exc.value) and "/\\" in str(exc.value)


def test_goal_summary_filters_intro_format(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    st = apply_intro(st, (), scope["->I"])
    st = apply_intro(st, (0,), scope["/\\I"])
    summary = goal_summary(st, (0, 1), scope.values())
    assert {"/\\I", "\\/I1", "->I", "∃I", "refl"} <= set(summary.candidates)
    assert "/\\E1" not in summary.candidates and "∃E" not in summary.candidates
    everything = goal_summary(st, (0, 1), scope.values(), show_all=True)
    assert {"/\\E1", "/\\E2", "\\/E", "¬E"} <= set(everything.candidates)
    assert goal_summary(st, (0, 1), ()).candidates == ()


def test_goal_summary_optional_unifiability_filter(env, scope):
    thm = theorem(env, "t", ["A", "B"], ["A"], "A \\/ B")
    st = new_proof(thm, env)
    names = goal_summary(st, (), scope.values(), check_unifiable=True).candidates
    assert "\\/I1" in names and "\\/I2" in names
    assert "/\\I" not in names


def test_goal_summary_requires_open_goal(env, scope, conj_comm):
    st = finish_conj_comm(new_proof(conj_comm, env), scope)
    with pytest.raises(InvalidGoalRef):
        goal_summary(st, (), scope.values())
    with pytest.raises(InvalidGoalRef):
        goal_summary(st, (9, 9), scope.values())


def test_assumption_closes_matching_goal(env, scope):
    thm = theorem(env, "t", ["A", "B"], ["A /\\ B"], "A")
    st = new_proof(thm, env)
    st = apply_intro(st, (), scope["/\\E1"])  # via show-all, per the checkbox
    assert "A /\\ ?" in goal_display(st, (0,))["target"]
    st = apply_assumption(st, (0,), 0)
    assert node_at(st, (0,)).children == ()
    assert unsolved_goals(st) == []


def test_assumption_clash(env, scope):
    thm = theorem(env, "t", ["A", "B"], ["B"], "A")
    st = new_proof(thm, env)
    with pytest.raises(NoUnifier):
        apply_assumption(st, (), 0)


def test_assumption_out_of_scope(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    with pytest.raises(ApplyError):
        apply_assumption(st, (), 3)


def test_elim_exists_introduces_local_and_assumption(env, scope):
    thm = theorem(env, "t", ["P", "F"], ["∃ (x. ¬ (P x))"], "F")
    st = new_proof(thm, env)
    st = apply_elim(st, (), 0, scope["∃E"])
    assert goal_display(st, (0,)) == {
        "locals": ["P", "F", "x"],
        "assumptions": ["∃ (x'. ¬ (P x'))", "¬ (P x)"],
        "target": "F",
    }


def test_elim_forall_closes_goal(env, scope):
    thm = theorem(env, "t", ["P", "x"], ["∀ (a. P a)"], "P x")
    st = new_proof(thm, env)
    st = apply_elim(st, (), 0, scope["∀E"])
    assert unsolved_goals(st) == []
    assert check_tree(st, scope).complete


def test_elim_induction_subgoals(env, scope):
    thm = theorem(env, "t", ["n"], ["n ℕ"], "(n + 0) = n")
    st = new_proof(thm, env)
    st = apply_elim(st, (), 0, scope["induction(_ℕ)"])
    base, step = goal_display(st, (0,)), goal_display(st, (1,))
    assert base["target"] == "(0 + 0) = 0"
    assert step["locals"] == ["n", "n'"]
    assert step["assumptions"] == ["n ℕ", "(n' + 0) = n'", "n' ℕ"]
    assert step["target"] == "(S n' + 0) = S n'"


def test_elim_rejects_hypothetical_assumption(env, scope):
    thm = NamedRule(
        "t",
        rule_of(env, ["A", "B"], [([], ["A"], "B")], "A -> B"),
        "theorem",
    )
    st = new_proof(thm, env)
    with pytest.raises(ApplyError) as exc:
        apply_elim(st, (), 0, scope["¬E"])
    assert "hypothetical" in str(exc.value)


def test_elim_distinguishes_premise_and_conclusion_failures(env, scope):
    thm = theorem(env, "t", ["A", "B"], ["A /\\ B"], "A")
    st = new_proof(thm, env)
    with pytest.raises(NoUnifier) as exc:
        apply_elim(st, (), 0, scope["∃E"])  # premise ∃… vs assumption ∧…
    assert exc.value.site == "premise"
    # suc has a rigid conclusion, so the second unification can fail
    thm2 = theorem(env, "t2", ["n"], ["n ℕ"], "0 = 0")
    st2 = new_proof(thm2, env)
    with pytest.raises(NoUnifier) as exc2:
        apply_elim(st2, (), 0, scope["suc"])
    assert exc2.value.site == "conclusion"


def test_elim_needs_premised_rule(env, scope):
    thm = theorem(env, "t", ["A"], ["A"], "A")
    st = new_proof(thm, env)
    with pytest.raises(ApplyError):
        apply_elim(st, (), 0, scope["zero"])  # zero has no premises


def test_rewrite_by_rule_then_assumption(env, scope):
    thm = theorem(env, "t", ["k"], ["(k + 0) = k"], "(S k + 0) = S k")
    st = new_proof(thm, env)
    st = rewrite(st, (), scope["+I"], "→")
    assert goal_display(st, (0,))["target"] == "S (k + 0) = S k"
    st = rewrite(st, (0,), 0, "→")
    assert goal_display(st, (0, 0))["target"] == "S k = S k"
    st = apply_refl(st, (0, 0))
    assert unsolved_goals(st) == []


def test_rewrite_reverse_direction(env, scope):
    thm = theorem(env, "t", ["n"], [], "S n = S (0 + n)")
    st = new_proof(thm, env)
    st = rewrite(st, (), scope["+B"], "←")
    # ← rewrites right-to-left: the first subterm matching n gets wrapped
    assert "0 + " in goal_display(st, (0,))["target"]


def test_rewrite_occurrence_selection(env, scope):
    thm = theorem(env, "t", ["n"], [], "(0 + n) = (0 + n)")
    st = new_proof(thm, env)
    st1 = rewrite(st, (), scope["+B"], "→", occurrence=0)
    assert goal_display(st1, (0,))["target"] == "n = (0 + n)"
    st2 = rewrite(st, (), scope["+B"], "→", occurrence=1)
    assert goal_display(st2, (0,))["target"] == "(0 + n) = n"
    with pytest.raises(OccurrenceOutOfRange):
        rewrite(st, (), scope["+B"], "→", occurrence=2)


def test_rewrite_no_matching_subterm(env, scope):
    thm = theorem(env, "t", ["n"], [], "n = n")
    st = new_proof(thm, env)
    with pytest.raises(NoMatchingSubterm):
        rewrite(st, (), scope["+B"], "→")


def test_rewrite_rejects_premised_or_non_equations(env, scope):
    thm = theorem(env, "t", ["n"], ["n ℕ"], "n = n")
    st = new_proof(thm, env)
    with pytest.raises(ApplyError):
        rewrite(st, (), scope["suc"], "→")  # premised rule
    with pytest.raises(ApplyError):
        rewrite(st, (), 0, "→")  # assumption n ℕ is not an equation


def test_refl_examples(env, scope):
    closes = [("S k = S k", ["k"]), ("(x. x) 0 = 0", [])]
    for text, binders in closes:
        st = new_proof(theorem(env, "t", binders, [], text), env)
        st = apply_refl(st, ())
        assert unsolved_goals(st) == []
    st = new_proof(theorem(env, "t", [], [], "0 = S 0"), env)
    with pytest.raises(NoUnifier):
        apply_refl(st, ())
    st = new_proof(theorem(env, "t", ["A"], [], "A"), env)
    with pytest.raises(NoUnifier):
        apply_refl(st, ())


def test_clear_root_restores_initial_state(env, scope, conj_comm):
    st = finish_conj_comm(new_proof(conj_comm, env), scope)
    cleared = clear_subtree(st, (), scope)
    assert cleared.tree == new_proof(conj_comm, env).tree


def test_clear_branch_keeps_sibling(env, scope, conj_comm):
    st = finish_conj_comm(new_proof(conj_comm, env), scope)
    cleared = clear_subtree(st, (0, 1), scope)
    assert unsolved_goals(cleared) == [(0, 1)]
    assert node_at(cleared, (0, 0)).step is not None
    assert goal_display(cleared, (0, 1))["target"] == "A"


def test_clear_unsolved_node_is_noop(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    st = apply_intro(st, (), scope["->I"])
    cleared = clear_subtree(st, (0,), scope)
    assert cleared.tree == st.tree


def test_check_tree_complete_proof(env, scope, conj_comm):
    st = finish_conj_comm(new_proof(conj_comm, env), scope)
    report = check_tree(st, scope)
    assert report.complete and not report.step_errors


def test_check_tree_flags_unsolved(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    st = apply_intro(st, (), scope["->I"])
    st = apply_intro(st, (0,), scope["/\\I"])
    st = apply_intro(st, (0, 0), scope["/\\E2"])
    st = apply_assumption(st, (0, 0, 0), 0)
    report = check_tree(st, scope)
    assert not report.complete
    assert (0, 1) in report.unsolved


def test_check_tree_reports_tampered_step(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    steps = [
        ((), Step("intro", rule="->I")),
        ((0,), Step("assumption", assumption=7)),  # out of scope
    ]
    _, errors = replay(conj_comm, steps, scope, env)
    assert errors and errors[0][0] == (0,)
    assert "assumption 7" in errors[0][1]


def test_check_tree_flags_unresolved_unifvars(env, scope):
    # ∃I with a witness that nothing ever determines
    thm = theorem(env, "t", ["P"], [(["x"], [], "P x")], "∃ (a. P a)")
    st = new_proof(thm, env)
    st = apply_intro(st, (), scope["∃I"])
    st = apply_assumption(st, (0,), 0)
    assert unsolved_goals(st) == []
    report = check_tree(st, scope)
    assert report.solved and not report.complete
    assert report.unresolved_unifvars


def test_elim_agrees_with_intro_plus_assumption(env, scope):
    # For rules whose binders all occur in premise one, forward use matches
    # backward use followed by closing the first subgoal with the assumption.
    cases = [
        ("/\\E1", ["A /\\ B"], "A"),
        ("/\\E2", ["A /\\ B"], "B"),
        ("->E", ["A -> B", "A"], "B"),
        ("\\/E", ["A \\/ B", "A", "B"], "0 = 0"),
    ]
    for rule_name, premises, conclusion in cases:
        thm = theorem(env, "t", ["A", "B"], premises, conclusion)
        via_elim = apply_elim(new_proof(thm, env), (), 0, scope[rule_name])
        via_intro = apply_intro(new_proof(thm, env), (), scope[rule_name])
        via_intro = apply_assumption(via_intro, (0,), 0)
        elim_goals = [goal_display(via_elim, g) for g in unsolved_goals(via_elim)]
        intro_goals = [goal_display(via_intro, g) for g in unsolved_goals(via_intro)]
        assert elim_goals == intro_goals, rule_name


def test_determinism_and_replay_closure(env, scope, conj_comm):
    st1 = finish_conj_comm(new_proof(conj_comm, env), scope)
    st2 = finish_conj_comm(new_proof(conj_comm, env), scope)
    assert st1.tree == st2.tree
    script = script_of(st1.tree)
    replayed, errors = replay(conj_comm, script, scope, env)
    assert not errors
    assert replayed.tree == st1.tree
    assert script_of(replayed.tree) == script


def test_scope_safety_along_paths(env, scope):
    from hbt.rules import rule_well_scoped
    from hbt.terms import loose_bound_vars

    thm = theorem(env, "pred", ["n"], ["n ℕ", "¬ (n = 0)"], "∃ (k. n = S k)")
    st = new_proof(thm, env)
    st = apply_elim(st, (), 0, scope["cases(_ℕ)"])
    st = apply_elim(st, (0,), 1, scope["¬E"])
    for ref in [(0, 0), (1,)]:
        g = goal_at(st, ref)
        assert all(k < g.depth for k in loose_bound_vars(g.target))
        assert all(rule_well_scoped(a, g.depth) for a in g.assumptions)


def test_pattern_fragment_violations_surface(env, scope):
    # Applying ∀E backwards instantiates P applied to another variable's
    # spine: the conclusion unification leaves the pattern fragment.
    thm = theorem(env, "t", ["G", "k"], [], "G k")
    st = new_proof(thm, env)
    with pytest.raises(OutsidePatternFragment):
        apply_intro(st, (), scope["∀E"])


def test_cases_rule_supports_inversion_proofs(env, scope):
    # cases(_<_) inverts an impossible hypothesis x < 0: each branch carries
    # an equation 0 = S n, discharged by a zero-successor-disjointness axiom.
    from hbt.induction import InductiveDef, synthesize_cases
    from hbt.rules import NamedRule

    e = env.with_constants(["_<_"])
    lt0 = NamedRule("lt0", rule_of(e, ["n"], [], "0 < S n"))
    ltS = NamedRule("ltS", rule_of(e, ["m", "n"], ["m < n"], "S m < S n"))
    lt = InductiveDef((("_<_", 2),), (lt0, ltS))
    cases = synthesize_cases(lt, "_<_")
    zs = NamedRule("zs", rule_of(e, ["X", "n"], ["0 = S n"], "X"))
    local_scope = dict(scope) | {nr.name: nr for nr in (lt0, ltS, cases, zs)}

    thm = NamedRule("nolt0", rule_of(e, ["x"], [], "¬ (x < 0)"), "theorem")
    st = new_proof(thm, e)
    st = apply_intro(st, (), local_scope["¬I"])
    st = apply_elim(st, (0,), 0, cases)
    branches = unsolved_goals(st)
    assert len(branches) == 2
    for ref in branches:
        g = goal_display(st, ref)
        impossible = next(
            i for i, text in enumerate(g["assumptions"]) if text.startswith("0 = S")
        )
        st = apply_elim(st, ref, impossible, zs)
    assert unsolved_goals(st) == []
    assert check_tree(st, local_scope).complete


def test_each_intro_recoverable_from_its_cases_branch(env, scope):
    # x ℕ ⊢ (∃ (m. x = S m)) \/ (x = 0): the zero branch closes through the
    # zero equation, the successor branch through the successor equation.
    thm = theorem(env, "shape", ["x"], ["x ℕ"], "(∃ (m. x = S m)) \\/ (x = 0)")
    st = new_proof(thm, env)
    st = apply_elim(st, (), 0, scope["cases(_ℕ)"])
    st = apply_intro(st, (0,), scope["\\/I2"])
    st = apply_assumption(st, (0, 0), 1)
    st = apply_intro(st, (1,), scope["\\/I1"])
    st = apply_intro(st, (1, 0), scope["∃I"])
    st = apply_assumption(st, (1, 0, 0), 1)
    assert unsolved_goals(st) == []
    assert check_tree(st, scope).complete


def test_simultaneous_induction_even_odd(env, scope):
    # n ℕ ⊢ even n \/ odd n by simultaneous induction with shared motives.
    from hbt.induction import InductiveDef, synthesize_induction
    from hbt.rules import NamedRule

    e = env.with_constants(["even", "odd"])
    ev0 = NamedRule("ev0", rule_of(e, [], [], "even 0"))
    evS = NamedRule("evS", rule_of(e, ["n"], ["odd n"], "even (S n)"))
    odS = NamedRule("odS", rule_of(e, ["n"], ["even n"], "odd (S n)"))
    defs = InductiveDef((("even", 1), ("odd", 1)), (ev0, evS, odS))
    local_scope = dict(scope) | {nr.name: nr for nr in (ev0, evS, odS)}
    for nr in synthesize_induction(defs):
        local_scope[nr.name] = nr

    thm = NamedRule(
        "parity", rule_of(e, ["n"], ["n ℕ"], "(even n) \\/ (odd n)"), "theorem"
    )
    st = new_proof(thm, e)
    st = apply_elim(st, (), 0, local_scope["induction(_ℕ)"])
    # base: even 0
    st = apply_intro(st, (0,), local_scope["\\/I1"])
    st = apply_intro(st, (0, 0), local_scope["ev0"])
    # step: case split on the hypothesis even k \/ odd k
    step = goal_display(st, (1,))
    assert step["assumptions"][1].startswith("even") and "\\/" in step["assumptions"][1]
    st = apply_elim(st, (1,), 1, local_scope["\\/E"])
    # even k ⊢ ...: S k is odd
    st = apply_intro(st, (1, 0), local_scope["\\/I2"])
    st = apply_intro(st, (1, 0, 0), local_scope["odS"])
    st = apply_assumption(st, (1, 0, 0, 0), 3)
    # odd k ⊢ ...: S k is even
    st = apply_intro(st, (1, 1), local_scope["\\/I1"])
    st = apply_intro(st, (1, 1, 0), local_scope["evS"])
    st = apply_assumption(st, (1, 1, 0, 0), 3)
    assert unsolved_goals(st) == []
    assert check_tree(st, local_scope).complete


def test_step_soundness_after_every_step(env, scope, conj_comm):
    st = new_proof(conj_comm, env)
    steps = [
        ((), lambda s: apply_intro(s, (), scope["->I"])),
        ((0,), lambda s: apply_intro(s, (0,), scope["/\\I"])),
        ((0, 0), lambda s: apply_intro(s, (0, 0), scope["/\\E2"])),
        ((0, 0, 0), lambda s: apply_assumption(s, (0, 0, 0), 0)),
        ((0, 1), lambda s: apply_intro(s, (0, 1), scope["/\\E1"])),
        ((0, 1, 0), lambda s: apply_assumption(s, (0, 1, 0), 0)),
    ]
    for _, step in steps:
        st = step(st)
        assert check_tree(st, scope).step_errors == ()
