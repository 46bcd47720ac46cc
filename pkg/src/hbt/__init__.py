"""Pedagogical natural-deduction kernel and interactive textbook toolkit.

Layers, bottom up: ``terms`` (λ-terms, concrete syntax, normalization),
``unification`` (pattern unification), ``rules`` (hereditary Harrop rules and
instantiation), ``induction`` (derived cases/induction rules), ``engine``
(goal trees and proof steps), ``document`` (the `.hbt` textbook format),
``protocol`` and ``cli`` (the session server and command-line tools).
"""

from .terms import (
    Apply,
    BoundVar,
    Const,
    Lambda,
    NameEnv,
    Term,
    UnifVar,
    alpha_beta_eta_equal,
    normalize,
    parse_term,
    print_term,
)
from .unification import FreshIds, Substitution, apply_subst, compose, is_pattern, unify
from .rules import (
    InstantiatedRule,
    NamedRule,
    Rule,
    instantiate,
    instantiate_two_phase,
    is_introduction_format,
    print_rule,
)
from .induction import InductiveDef, synthesize_cases, synthesize_induction
from .engine import (
    CheckReport,
    Goal,
    GoalRef,
    ProofNode,
    ProofState,
    Step,
    apply_assumption,
    apply_elim,
    apply_intro,
    apply_refl,
    check_tree,
    clear_subtree,
    goal_summary,
    new_proof,
    rewrite,
    unsolved_goals,
)
from .document import (
    Document,
    check_document,
    parse_document,
    serialize_document,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
