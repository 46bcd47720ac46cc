"""Higher-order pattern unification with most general unifiers.

Only the pattern fragment is solved: every unification variable must be
applied to a spine of distinct λ-bound variables. Anything outside the
fragment raises OutsidePatternFragment rather than guessing a solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    DEFAULT_FUEL,
    Apply,
    BoundVar,
    Const,
    Fuel,
    Lambda,
    Term,
    UnifVar,
    apply_spine,
    instantiate_bound,
    lambdas,
    loose_bound_vars,
    normalize,
    shift,
    strip,
    unifvars_of,
)


class UnifyError(Exception):
    """Base class: the pair cannot be unified (or cannot be attempted)."""


class Clash(UnifyError):
    """Definite failure: rigid parts disagree."""


class OccursCheck(UnifyError):
    """A variable would have to contain itself."""


class OutsidePatternFragment(UnifyError):
    """A unification variable is applied to a non-pattern spine."""


class DepthMismatch(UnifyError):
    """The two sides were declared at different binder depths."""


@dataclass
class FreshIds:
    """Monotone supply of unification-variable identifiers."""

    next_id: int = 0

    def take(self) -> int:
        v = self.next_id
        self.next_id += 1
        return v

    def reserve(self, ident: int) -> None:
        if ident >= self.next_id:
            self.next_id = ident + 1


@dataclass(frozen=True)
class Substitution:
    """Finite map from unification-variable id to a closed, λ-abstracted term."""

    mapping: dict[int, Term] = field(default_factory=dict)

    @staticmethod
    def empty() -> "Substitution":
        return Substitution({})

    def __contains__(self, ident: int) -> bool:
        return ident in self.mapping

    def __bool__(self) -> bool:
        return bool(self.mapping)

    def get(self, ident: int) -> Term | None:
        return self.mapping.get(ident)

    def items(self):
        return self.mapping.items()


def is_pattern(t: Term) -> bool:
    """True iff every unification variable has a distinct-bound-var spine."""
    match t:
        case Apply():
            head, args = strip(t)
            if isinstance(head, UnifVar):
                if not all(isinstance(a, BoundVar) for a in args):
                    return False
                indices = [a.index for a in args]  # type: ignore[union-attr]
                return len(set(indices)) == len(indices)
            return is_pattern(head) and all(is_pattern(a) for a in args)
        case Lambda(body=b):
            return is_pattern(b)
        case _:
            return True


def _beta_apply(sol: Term, args: list[Term], fuel: Fuel) -> Term:
    for i, a in enumerate(args):
        if isinstance(sol, Lambda):
            fuel.spend()
            sol = instantiate_bound(sol.body, a)
        else:
            return apply_spine(sol, args[i:])
    return sol


def _devar(m: dict[int, Term], t: Term, fuel: Fuel) -> Term:
    """Expose the true head by expanding solved variables and head redexes."""
    while True:
        head, args = strip(t)
        if isinstance(head, UnifVar) and head.ident in m:
            t = _beta_apply(m[head.ident], args, fuel)
        elif isinstance(head, Lambda) and args:
            fuel.spend()
            t = apply_spine(instantiate_bound(head.body, args[0]), args[1:])
        else:
            return t


def _spine_indices(m: dict[int, Term], args: list[Term], fuel: Fuel) -> list[int]:
    indices: list[int] = []
    for a in args:
        a = _devar(m, a, fuel)
        if not isinstance(a, BoundVar):
            raise OutsidePatternFragment(
                "unification variable applied to a non-variable argument"
            )
        indices.append(a.index)
    if len(set(indices)) != len(indices):
        raise OutsidePatternFragment(
            "unification variable applied to a repeated variable"
        )
    return indices


class _Unifier:
    def __init__(self, fresh: FreshIds, fuel: Fuel):
        self.m: dict[int, Term] = {}
        self.fresh = fresh
        self.fuel = fuel

    def unif(self, s: Term, t: Term) -> None:
        s = _devar(self.m, s, self.fuel)
        t = _devar(self.m, t, self.fuel)
        match (s, t):
            case (Lambda(body=sb), Lambda(body=tb)):
                self.unif(sb, tb)
            case (Lambda(body=sb), _):
                self.unif(sb, Apply(shift(t, 1), BoundVar(0)))
            case (_, Lambda(body=tb)):
                self.unif(Apply(shift(s, 1), BoundVar(0)), tb)
            case _:
                self.cases(s, t)

    def cases(self, s: Term, t: Term) -> None:
        sh, sargs = strip(s)
        th, targs = strip(t)
        s_flex = isinstance(sh, UnifVar)
        t_flex = isinstance(th, UnifVar)
        if s_flex and t_flex:
            si = _spine_indices(self.m, sargs, self.fuel)
            ti = _spine_indices(self.m, targs, self.fuel)
            if sh.ident == th.ident:
                self.flexflex_same(sh.ident, si, ti)
            else:
                self.flexflex_diff(sh.ident, si, th.ident, ti)
        elif s_flex:
            si = _spine_indices(self.m, sargs, self.fuel)
            self.flexrigid(sh.ident, si, t)
        elif t_flex:
            ti = _spine_indices(self.m, targs, self.fuel)
            self.flexrigid(th.ident, ti, s)
        else:
            self.rigidrigid(sh, sargs, th, targs)

    def rigidrigid(self, sh: Term, sargs: list[Term], th: Term, targs: list[Term]) -> None:
        match (sh, th):
            case (Const(name=a), Const(name=b)):
                if a != b:
                    raise Clash(f"constant heads differ: {a!r} vs {b!r}")
            case (BoundVar(index=i), BoundVar(index=j)):
                if i != j:
                    raise Clash(f"bound variables differ: {i} vs {j}")
            case _:
                raise Clash("rigid heads differ in kind")
        if len(sargs) != len(targs):
            raise Clash("rigid heads applied to different numbers of arguments")
        for sa, ta in zip(sargs, targs):
            self.unif(sa, ta)

    def flexflex_same(self, ident: int, si: list[int], ti: list[int]) -> None:
        if len(si) != len(ti):
            raise OutsidePatternFragment(
                "same variable applied to spines of different lengths"
            )
        if si == ti:
            return
        n = len(si)
        keep = [k for k in range(n) if si[k] == ti[k]]
        h = UnifVar(self.fresh.take())
        body = apply_spine(h, [BoundVar(n - 1 - k) for k in keep])
        self.m[ident] = lambdas(["x"] * n, body)

    def flexflex_diff(self, f: int, fi: list[int], g: int, gi: list[int]) -> None:
        common = [i for i in fi if i in gi]
        h = UnifVar(self.fresh.take())
        nf, ng = len(fi), len(gi)
        f_body = apply_spine(h, [BoundVar(nf - 1 - fi.index(i)) for i in common])
        g_body = apply_spine(h, [BoundVar(ng - 1 - gi.index(i)) for i in common])
        self.m[f] = lambdas(["x"] * nf, f_body)
        self.m[g] = lambdas(["x"] * ng, g_body)

    def flexrigid(self, ident: int, spine: list[int], t: Term) -> None:
        n = len(spine)

        def mapvar(j: int, b: int) -> int:
            if j < b:
                return j
            outer = j - b
            if outer in spine:
                return b + (n - 1 - spine.index(outer))
            raise Clash(
                "a variable outside the unification variable's scope occurs rigidly"
            )

        def project(t: Term, b: int) -> Term:
            t = _devar(self.m, t, self.fuel)
            if isinstance(t, Lambda):
                return Lambda(t.hint, project(t.body, b + 1))
            head, args = strip(t)
            match head:
                case UnifVar(ident=g):
                    if g == ident:
                        raise OccursCheck(f"?{ident} would occur in its own solution")
                    js = _spine_indices(self.m, args, self.fuel)
                    keep = [
                        k
                        for k, j in enumerate(js)
                        if j < b or (j - b) in spine
                    ]
                    if len(keep) == len(js):
                        return apply_spine(
                            head, [BoundVar(mapvar(j, b)) for j in js]
                        )
                    # prune spine entries the solution may not mention
                    h = UnifVar(self.fresh.take())
                    self.m[g] = lambdas(
                        ["x"] * len(js),
                        apply_spine(h, [BoundVar(len(js) - 1 - k) for k in keep]),
                    )
                    return apply_spine(
                        h, [BoundVar(mapvar(js[k], b)) for k in keep]
                    )
                case BoundVar(index=j):
                    return apply_spine(
                        BoundVar(mapvar(j, b)), [project(a, b) for a in args]
                    )
                case Const():
                    return apply_spine(head, [project(a, b) for a in args])
            raise AssertionError("devar left a redex at the head")

        self.m[ident] = lambdas(["x"] * n, project(t, 0))


def unify(
    t: Term,
    u: Term,
    fresh: FreshIds,
    depth: int | None = None,
    fuel: int = DEFAULT_FUEL,
) -> Substitution:
    """Most general unifier of two pattern terms at a common binder depth."""
    if depth is not None:
        for side in (t, u):
            over = {i for i in loose_bound_vars(side) if i >= depth}
            if over:
                raise DepthMismatch(
                    f"indices {sorted(over)} exceed declared depth {depth}"
                )
    budget = Fuel(fuel)
    for v in unifvars_of(t) | unifvars_of(u):
        fresh.reserve(v)
    unifier = _Unifier(fresh, budget)
    unifier.unif(normalize(t, budget), normalize(u, budget))
    resolved = Substitution(dict(unifier.m))
    out = {v: apply_subst(resolved, sol, fuel) for v, sol in unifier.m.items()}
    return Substitution(out)


def apply_subst(s: Substitution, t: Term, fuel: int = DEFAULT_FUEL) -> Term:
    """Replace solved variables (chasing chains) and β-normalize the result."""
    if not s or not (unifvars_of(t) & set(s.mapping)):
        return t

    def replace(t: Term) -> Term:
        match t:
            case UnifVar(ident=v):
                sol = s.mapping.get(v)
                return replace(sol) if sol is not None else t
            case Apply(fun=f, arg=a):
                return Apply(replace(f), replace(a))
            case Lambda(hint=h, body=b):
                return Lambda(h, replace(b))
            case _:
                return t

    return normalize(replace(t), fuel)


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """Substitution such that applying it equals applying inner, then outer."""
    mapping: dict[int, Term] = {}
    for v, sol in inner.items():
        mapping[v] = apply_subst(outer, sol)
    for v, sol in outer.items():
        if v not in mapping:
            mapping[v] = sol
    for v, sol in mapping.items():
        if v in unifvars_of(sol):
            raise OccursCheck(f"composition makes ?{v} mention itself")
    return Substitution(mapping)


@dataclass
class UnifProblem:
    """A batch of pairs to be solved under one shared substitution."""

    pairs: list[tuple[Term, Term]]
    fresh: FreshIds
    depth: int | None = None

    def solve(self, fuel: int = DEFAULT_FUEL) -> Substitution:
        total = Substitution.empty()
        for t, u in self.pairs:
            t = apply_subst(total, t, fuel)
            u = apply_subst(total, u, fuel)
            total = compose(unify(t, u, self.fresh, self.depth, fuel), total)
        return total
