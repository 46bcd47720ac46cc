import pytest

from hbt.induction import (
    InductiveDef,
    MalformedInductiveDef,
    PositivityViolation,
    UnknownJudgment,
    check_positivity,
    synthesize_cases,
    synthesize_induction,
)
from hbt.rules import NamedRule, Rule, is_introduction_format, print_rule, rule_well_scoped
from hbt.terms import Apply, BoundVar, Const

NAT = "_ℕ"
SUC = Const("S")
ZERO = Const("0")


def fact(t):
    return Rule.fact(t)


def nat(t):
    return Apply(Const(NAT), t)


def nat_def() -> InductiveDef:
    zero = NamedRule("zero", fact(nat(ZERO)))
    suc = NamedRule(
        "suc", Rule(("n",), (fact(nat(BoundVar(0))),), nat(Apply(SUC, BoundVar(0))))
    )
    return InductiveDef(((NAT, 1),), (zero, suc))


def lt_def() -> InductiveDef:
    lt = Const("_<_")
    lt0 = NamedRule(
        "lt0", Rule(("n",), (), Apply(Apply(lt, ZERO), Apply(SUC, BoundVar(0))))
    )
    ltS = NamedRule(
        "ltS",
        Rule(
            ("m", "n"),
            (fact(Apply(Apply(lt, BoundVar(1)), BoundVar(0))),),
            Apply(Apply(lt, Apply(SUC, BoundVar(1))), Apply(SUC, BoundVar(0))),
        ),
    )
    return InductiveDef((("_<_", 2),), (lt0, ltS))


def even_odd_def() -> InductiveDef:
    even, odd = Const("even"), Const("odd")
    ev0 = NamedRule("ev0", fact(Apply(even, ZERO)))
    evS = NamedRule(
        "evS",
        Rule(("n",), (fact(Apply(odd, BoundVar(0))),), Apply(even, Apply(SUC, BoundVar(0)))),
    )
    odS = NamedRule(
        "odS",
        Rule(("n",), (fact(Apply(even, BoundVar(0))),), Apply(odd, Apply(SUC, BoundVar(0)))),
    )
    return InductiveDef((("even", 1), ("odd", 1)), (ev0, evS, odS))


def test_cases_for_naturals_golden(env):
    e = env.with_constants(["even", "odd", "_<_"])
    rule = synthesize_cases(nat_def(), NAT)
    assert rule.name == "cases(_ℕ)"
    assert rule.kind == "derived-cases"
    # the successor branch keeps the intro's own premise n ℕ
    assert print_rule(rule.rule, e) == "P x. x ℕ, (x = 0 ⊢ P), (n. x = S n, n ℕ ⊢ P) ⊢ P"


def test_induction_for_naturals_golden(env):
    rule = synthesize_induction(nat_def())[0]
    assert rule.name == "induction(_ℕ)"
    assert rule.kind == "derived-induction"
    assert print_rule(rule.rule, env) == "P x. x ℕ, P 0, (n. P n, n ℕ ⊢ P (S n)) ⊢ P x"


def test_derived_rules_are_well_scoped_and_not_intro_format():
    d = nat_def()
    for nr in [synthesize_cases(d, NAT), *synthesize_induction(d)]:
        assert rule_well_scoped(nr.rule, 0)
        assert not is_introduction_format(nr.rule)


def test_cases_with_no_intros_has_only_major_premise():
    d = InductiveDef((("empty", 1),), ())
    rule = synthesize_cases(d, "empty")
    assert len(rule.rule.premises) == 1
    assert print_rule(rule.rule, __import__("hbt.terms", fromlist=["NameEnv"]).NameEnv(frozenset({"empty"}))) == "P x. empty x ⊢ P"


def test_cases_two_argument_judgment_equations_per_position(env):
    e = env.with_constants(["_<_"])
    rule = synthesize_cases(lt_def(), "_<_")
    assert (
        print_rule(rule.rule, e)
        == "P x1 x2. x1 < x2, (n. x1 = 0, x2 = S n ⊢ P), (m n. x1 = S m, x2 = S n, m < n ⊢ P) ⊢ P"
    )


def test_mutual_induction_shares_motives(env):
    e = env.with_constants(["even", "odd"])
    rules = synthesize_induction(even_odd_def())
    assert [r.name for r in rules] == ["induction(even)", "induction(odd)"]
    printed = [print_rule(r.rule, e) for r in rules]
    shared = "P_even 0, (n. P_odd n, odd n ⊢ P_even (S n)), (n. P_even n, even n ⊢ P_odd (S n))"
    assert printed[0] == f"P_even P_odd x. even x, {shared} ⊢ P_even x"
    assert printed[1] == f"P_even P_odd x. odd x, {shared} ⊢ P_odd x"


def test_single_premise_free_intro_degenerates(env):
    e = env.with_constants(["unit"])
    d = InductiveDef((("unit", 1),), (NamedRule("tt", fact(Apply(Const("unit"), ZERO))),))
    cases = synthesize_cases(d, "unit")
    ind = synthesize_induction(d)[0]
    assert print_rule(cases.rule, e) == "P x. unit x, (x = 0 ⊢ P) ⊢ P"
    assert print_rule(ind.rule, e) == "P x. unit x, P 0 ⊢ P x"


def test_unknown_judgment_rejected():
    with pytest.raises(UnknownJudgment):
        synthesize_cases(nat_def(), "_≤_")


def test_malformed_intro_conclusion_rejected():
    bad = NamedRule("bad", fact(Apply(Const("S"), ZERO)))
    d = InductiveDef(((NAT, 1),), (bad,))
    with pytest.raises(MalformedInductiveDef):
        synthesize_cases(d, NAT)


def test_positivity_violation_rejected():
    # an intro premise that itself hypothesizes the judgment
    hypothetical = Rule((), (fact(nat(ZERO)),), nat(ZERO))
    bad = NamedRule("bad", Rule((), (hypothetical,), nat(Apply(SUC, ZERO))))
    d = InductiveDef(((NAT, 1),), (bad,))
    with pytest.raises(PositivityViolation):
        check_positivity(d)
    with pytest.raises(PositivityViolation):
        synthesize_induction(d)
