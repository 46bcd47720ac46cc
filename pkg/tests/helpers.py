import random

from hbt.terms import (
    Apply,
    BoundVar,
    Const,
    Lambda,
    Term,
    UnifVar,
    apply_spine,
)

# The running vocabulary used throughout the suite: propositional and
# quantifier connectives, naturals, and addition.
CORE_CONSTANTS = frozenset(
    {
        "_/\\_",
        "_\\/_",
        "_->_",
        "¬",
        "∀",
        "∃",
        "_=_",
        "_ℕ",
        "0",
        "S",
        "_+_",
    }
)


def random_term(
    rng: random.Random,
    depth: int,
    binders: int,
    constants: tuple[str, ...],
    unifvars: tuple[int, ...] = (),
    spines: dict[int, int] | None = None,
) -> Term:
    """A random β-normal, well-scoped term.

    Unification variables, when requested, are applied to spines of distinct
    bound variables so the result stays inside the pattern fragment.
    """
    choices = ["const"]
    if binders > 0:
        choices.append("var")
    if depth > 0:
        choices += ["app", "lam"]
        if unifvars and binders > 0:
            choices.append("flex")
    kind = rng.choice(choices)
    if kind == "var":
        return BoundVar(rng.randrange(binders))
    if kind == "const":
        return Const(rng.choice(constants))
    if kind == "lam":
        return Lambda(
            rng.choice("xyzk"),
            random_term(rng, depth - 1, binders + 1, constants, unifvars, spines),
        )
    if kind == "flex":
        v = rng.choice(unifvars)
        arity = spines[v] if spines else rng.randrange(min(binders, 3) + 1)
        arity = min(arity, binders)
        spine = [BoundVar(i) for i in rng.sample(range(binders), arity)]
        return apply_spine(UnifVar(v), spine)
    # application with a rigid head, keeping the term β-normal
    head: Term
    if binders > 0 and rng.random() < 0.4:
        head = BoundVar(rng.randrange(binders))
    else:
        head = Const(rng.choice(constants))
    nargs = rng.randint(1, 2)
    args = [
        random_term(rng, depth - 1, binders, constants, unifvars, spines)
        for _ in range(nargs)
    ]
    return apply_spine(head, args)


# ---------------------------------------------------------------------------
# Enumeration oracle: exhaustive pools of small β-normal terms, used to vet
# unifier soundness, generality, and genuine non-unifiability.
# ---------------------------------------------------------------------------


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_bodies(max_size, nvars, constants, max_args=2):
    """All λ-free β-normal terms with ≤ max_size nodes over the signature."""
    from itertools import product

    heads = [BoundVar(i) for i in range(nvars)] + [Const(c) for c in constants]
    by_size = {1: list(heads)}
    for s in range(2, max_size + 1):
        terms = []
        for nargs in range(1, max_args + 1):
            if s - 1 < nargs:
                continue
            for sizes in _compositions(s - 1, nargs):
                for head in heads:
                    for args in product(*(by_size[sz] for sz in sizes)):
                        terms.append(apply_spine(head, list(args)))
        by_size[s] = terms
    return [t for s in sorted(by_size) for t in by_size[s]]


def candidate_solutions(arity, max_size, constants, max_args=2):
    """Closed λ-abstracted candidate values for a variable of given arity."""
    from hbt.terms import lambdas

    return [
        lambdas(["x"] * arity, body)
        for body in enumerate_bodies(max_size, arity, constants, max_args)
    ]


# ---------------------------------------------------------------------------
# The running natural-deduction vocabulary, built programmatically.
# ---------------------------------------------------------------------------


def rule_of(env, binders, premises, conclusion):
    """Build a Rule from term strings; nested premises are (binders, premises,
    conclusion) triples."""
    from hbt.rules import Rule
    from hbt.terms import parse_term

    def premise(e, p):
        if isinstance(p, str):
            return Rule.fact(parse_term(p, e))
        b, ps, c = p
        inner = e.with_binders(b)
        return Rule(
            tuple(b), tuple(premise(inner, q) for q in ps), parse_term(c, inner)
        )

    e = env.with_binders(binders)
    return Rule(
        tuple(binders),
        tuple(premise(e, p) for p in premises),
        parse_term(conclusion, e),
    )


def base_axioms(env):
    """Name → NamedRule for the usual intuitionistic connectives and +."""
    from hbt.rules import NamedRule, REFL

    specs = {
        "/\\I": (["A", "B"], ["A", "B"], "A /\\ B"),
        "/\\E1": (["A", "B"], ["A /\\ B"], "A"),
        "/\\E2": (["A", "B"], ["A /\\ B"], "B"),
        "->I": (["A", "B"], [([], ["A"], "B")], "A -> B"),
        "->E": (["A", "B"], ["A -> B", "A"], "B"),
        "\\/I1": (["A", "B"], ["A"], "A \\/ B"),
        "\\/I2": (["A", "B"], ["B"], "A \\/ B"),
        "\\/E": (["A", "B", "C"], ["A \\/ B", ([], ["A"], "C"), ([], ["B"], "C")], "C"),
        "¬I": (["P"], [(["X"], ["P"], "X")], "¬ P"),
        "¬E": (["P", "X"], ["¬ P", "P"], "X"),
        "∀I": (["P"], [(["x"], [], "P x")], "∀ (a. P a)"),
        "∀E": (["P", "x"], ["∀ (a. P a)"], "P x"),
        "∃I": (["P", "x"], ["P x"], "∃ (a. P a)"),
        "∃E": (["P", "Q"], ["∃ (a. P a)", (["x"], ["P x"], "Q")], "Q"),
        "+B": (["n"], [], "(0 + n) = n"),
        "+I": (["m", "n"], [], "(S m + n) = S (m + n)"),
    }
    out = {
        name: NamedRule(name, rule_of(env, b, ps, c))
        for name, (b, ps, c) in specs.items()
    }
    out["refl"] = REFL
    return out


def nat_inductive():
    from hbt.induction import InductiveDef
    from hbt.rules import NamedRule, Rule
    from hbt.terms import Apply, BoundVar, Const

    nat = lambda t: Apply(Const("_ℕ"), t)  # noqa: E731
    zero = NamedRule("zero", Rule.fact(nat(Const("0"))))
    suc = NamedRule(
        "suc",
        Rule(("n",), (Rule.fact(nat(BoundVar(0))),), nat(Apply(Const("S"), BoundVar(0)))),
    )
    return InductiveDef((("_ℕ", 1),), (zero, suc))


def full_scope(env):
    """Axioms plus the derived rules for ℕ."""
    from hbt.induction import synthesize_cases, synthesize_induction

    scope = base_axioms(env)
    d = nat_inductive()
    for nr in d.intros:
        scope[nr.name] = nr
    cases = synthesize_cases(d, "_ℕ")
    scope[cases.name] = cases
    for nr in synthesize_induction(d):
        scope[nr.name] = nr
    return scope
