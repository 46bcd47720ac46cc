"""Textbook documents: ordered items with lexical scope, stored as `.hbt`.

A document interleaves prose, axiom groups, inductive definitions (whose
derived rules are recomputed on load, never stored), and theorems with proof
scripts. The on-disk format is canonical JSON (sorted keys, UTF-8, trailing
newline) with terms written in the concrete term grammar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Union

from .engine import (
    CheckReport,
    GoalRef,
    Step,
    replay,
    tree_unifvars,
    unsolved_goals,
)
from .induction import InductiveDef, InductiveError, synthesize_cases, synthesize_induction
from .rules import EQUALS, REFL, NamedRule, Rule, rule_well_scoped
from .terms import NameEnv, ParseError, parse_term, print_term

FORMAT_VERSION = 1
STYLES = ("hybrid", "linear", "vertical", "tree", "prose")
KNOWN_OPS = ("intro", "assumption", "elim", "rewrite", "refl")
DIRECTIONS = ("→", "←")


class DocumentError(Exception):
    pass


class DocumentParseError(DocumentError):
    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


class DuplicateRuleName(DocumentError):
    pass


class UnknownRuleReference(DocumentError):
    pass


@dataclass(frozen=True)
class Prose:
    text: str


@dataclass(frozen=True)
class AxiomGroup:
    rules: tuple[NamedRule, ...]


@dataclass(frozen=True)
class Inductive:
    definition: InductiveDef


@dataclass(frozen=True)
class Theorem:
    statement: NamedRule
    proof: tuple[tuple[GoalRef, Step], ...]
    style: str = "hybrid"


Item = Union[Prose, AxiomGroup, Inductive, Theorem]


@dataclass(frozen=True)
class Document:
    title: str = ""
    version: str = ""
    constants: tuple[str, ...] = ()
    items: tuple[Item, ...] = ()

    def env(self) -> NameEnv:
        names = set(self.constants) | {EQUALS}
        for item in self.items:
            if isinstance(item, Inductive):
                names |= {head for head, _ in item.definition.judgments}
        return NameEnv(frozenset(names))


def scope_at(doc: Document, index: int) -> dict[str, NamedRule]:
    """Named rules visible to item ``index`` (strictly earlier items)."""
    scope: dict[str, NamedRule] = {REFL.name: REFL}
    for item in doc.items[:index]:
        for nr in _introduced_rules(item):
            scope[nr.name] = nr
    return scope


def _introduced_rules(item: Item) -> list[NamedRule]:
    match item:
        case AxiomGroup(rules=rules):
            return list(rules)
        case Inductive(definition=d):
            derived = [synthesize_cases(d, head) for head, _ in d.judgments]
            derived += synthesize_induction(d)
            return list(d.intros) + derived
        case Theorem(statement=statement):
            return [statement]
        case _:
            return []


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _expect(cond: bool, message: str, where: str) -> None:
    if not cond:
        raise DocumentParseError(message, where)


def _parse_rule(data, env: NameEnv, where: str) -> Rule:
    _expect(isinstance(data, dict), "rule must be an object", where)
    binders = data.get("binders", [])
    _expect(
        isinstance(binders, list) and all(isinstance(b, str) for b in binders),
        "binders must be a list of names",
        where,
    )
    _expect(len(set(binders)) == len(binders), "duplicate binder names", where)
    inner = env.with_binders(binders)
    premises = data.get("premises", [])
    _expect(isinstance(premises, list), "premises must be a list", where)
    parsed = tuple(
        _parse_rule(p, inner, f"{where}.premises[{i}]") for i, p in enumerate(premises)
    )
    conclusion = data.get("conclusion")
    _expect(isinstance(conclusion, str), "conclusion must be a term string", where)
    try:
        term = parse_term(conclusion, inner)
    except ParseError as exc:
        raise DocumentParseError(f"bad term {conclusion!r}: {exc}", where) from exc
    return Rule(tuple(binders), parsed, term)


def _parse_named_rule(data, env: NameEnv, kind: str, where: str) -> NamedRule:
    _expect(isinstance(data, dict), "rule must be an object", where)
    name = data.get("name")
    _expect(isinstance(name, str) and bool(name), "rule needs a name", where)
    rule = _parse_rule(data, env, where)
    from .rules import rule_unifvars

    _expect(
        not rule_unifvars(rule),
        "rules may not contain unification variables",
        where,
    )
    return NamedRule(name, rule, kind)


def _parse_step(data, where: str) -> tuple[GoalRef, Step]:
    _expect(isinstance(data, dict), "step must be an object", where)
    path = data.get("path")
    _expect(
        isinstance(path, list) and all(isinstance(i, int) and i >= 0 for i in path),
        "path must be a list of child indices",
        where,
    )
    op = data.get("op")
    _expect(op in KNOWN_OPS, f"unknown op {op!r}", where)
    rule = data.get("rule")
    _expect(rule is None or isinstance(rule, str), "rule must be a name", where)
    assumption = data.get("assumption")
    _expect(
        assumption is None or (isinstance(assumption, int) and assumption >= 0),
        "assumption must be a number",
        where,
    )
    direction = data.get("direction")
    _expect(
        direction is None or direction in DIRECTIONS,
        f"direction must be one of {DIRECTIONS}",
        where,
    )
    occurrence = data.get("occurrence")
    _expect(
        occurrence is None or (isinstance(occurrence, int) and occurrence >= 0),
        "occurrence must be a natural number",
        where,
    )
    if op == "intro" or op == "elim":
        _expect(rule is not None, f"{op} step needs a rule name", where)
    if op in ("assumption", "elim"):
        _expect(assumption is not None, f"{op} step needs an assumption", where)
    if op == "rewrite":
        _expect(
            (rule is None) != (assumption is None),
            "rewrite needs exactly one of rule or assumption",
            where,
        )
    return tuple(path), Step(op, rule, assumption, direction, occurrence)


def _step_rule_refs(step: Step) -> list[str]:
    return [step.rule] if step.rule is not None else []


def parse_document(data: bytes | str) -> Document:
    """Parse and scope-check an `.hbt` document."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentParseError(f"not valid JSON: {exc}") from exc
    _expect(isinstance(raw, dict), "document must be an object", "document")
    _expect(raw.get("hbt") == FORMAT_VERSION, "missing or unsupported format tag", "document")
    title = raw.get("title", "")
    version = raw.get("version", "")
    constants = raw.get("constants", [])
    _expect(
        isinstance(constants, list) and all(isinstance(c, str) for c in constants),
        "constants must be a list of names",
        "document",
    )
    env = NameEnv(frozenset(constants) | {EQUALS})
    items: list[Item] = []
    scope: dict[str, NamedRule] = {REFL.name: REFL}

    def register(nr: NamedRule, where: str) -> None:
        if nr.name in scope:
            raise DuplicateRuleName(f"{where}: rule {nr.name!r} already defined")
        scope[nr.name] = nr

    raw_items = raw.get("items", [])
    _expect(isinstance(raw_items, list), "items must be a list", "document")
    for i, raw_item in enumerate(raw_items):
        where = f"items[{i}]"
        _expect(isinstance(raw_item, dict), "item must be an object", where)
        kind = raw_item.get("kind")
        if kind == "prose":
            text_field = raw_item.get("text", "")
            _expect(isinstance(text_field, str), "prose text must be a string", where)
            items.append(Prose(text_field))
        elif kind == "axioms":
            rules = raw_item.get("rules", [])
            _expect(isinstance(rules, list) and rules, "axioms need rules", where)
            group = tuple(
                _parse_named_rule(r, env, "axiom", f"{where}.rules[{j}]")
                for j, r in enumerate(rules)
            )
            for nr in group:
                _expect(
                    rule_well_scoped(nr.rule, 0), f"rule {nr.name!r} is open", where
                )
                register(nr, where)
            items.append(AxiomGroup(group))
        elif kind == "inductive":
            judgments = raw_item.get("judgments", [])
            _expect(
                isinstance(judgments, list) and judgments,
                "inductive needs judgments",
                where,
            )
            heads: list[tuple[str, int]] = []
            for j, judgment in enumerate(judgments):
                _expect(
                    isinstance(judgment, dict)
                    and isinstance(judgment.get("head"), str)
                    and isinstance(judgment.get("arity"), int)
                    and judgment["arity"] >= 1,
                    "judgment needs a head and a positive arity",
                    f"{where}.judgments[{j}]",
                )
                heads.append((judgment["head"], judgment["arity"]))
            env = env.with_constants([h for h, _ in heads])
            rules = raw_item.get("rules", [])
            _expect(isinstance(rules, list), "rules must be a list", where)
            intros = tuple(
                _parse_named_rule(r, env, "axiom", f"{where}.rules[{j}]")
                for j, r in enumerate(rules)
            )
            definition = InductiveDef(tuple(heads), intros)
            try:
                derived_item = Inductive(definition)
                for nr in _introduced_rules(derived_item):
                    register(nr, where)
            except InductiveError as exc:
                raise DocumentParseError(str(exc), where) from exc
            items.append(derived_item)
        elif kind == "theorem":
            statement = _parse_named_rule(raw_item, env, "theorem", where)
            _expect(
                rule_well_scoped(statement.rule, 0),
                f"theorem {statement.name!r} is open",
                where,
            )
            style = raw_item.get("style", "hybrid")
            _expect(style in STYLES, f"unknown style {style!r}", where)
            raw_proof = raw_item.get("proof", [])
            _expect(isinstance(raw_proof, list), "proof must be a list", where)
            proof = tuple(
                _parse_step(s, f"{where}.proof[{j}]") for j, s in enumerate(raw_proof)
            )
            for (path, step), j in zip(proof, range(len(proof))):
                for name in _step_rule_refs(step):
                    if name not in scope:
                        raise UnknownRuleReference(
                            f"{where}.proof[{j}]: rule {name!r} is not in scope"
                        )
            register(statement, where)
            items.append(Theorem(statement, proof, style))
        else:
            raise DocumentParseError(f"unknown item kind {kind!r}", where)
    return Document(title, version, tuple(constants), tuple(items))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _rule_to_dict(r: Rule, env: NameEnv) -> dict:
    inner = env.with_binders(r.binders)
    out: dict = {"conclusion": print_term(r.conclusion, inner)}
    if r.binders:
        out["binders"] = list(r.binders)
    if r.premises:
        out["premises"] = [_rule_to_dict(p, inner) for p in r.premises]
    return out


def _step_to_dict(path: GoalRef, step: Step) -> dict:
    out: dict = {"path": list(path), "op": step.op}
    if step.rule is not None:
        out["rule"] = step.rule
    if step.assumption is not None:
        out["assumption"] = step.assumption
    if step.direction is not None:
        out["direction"] = step.direction
    if step.occurrence:  # occurrence 0 is the default and stays implicit
        out["occurrence"] = step.occurrence
    return out


def document_to_dict(doc: Document) -> dict:
    env = NameEnv(frozenset(doc.constants) | {EQUALS})
    items = []
    for item in doc.items:
        match item:
            case Prose(text=text):
                items.append({"kind": "prose", "text": text})
            case AxiomGroup(rules=rules):
                items.append(
                    {
                        "kind": "axioms",
                        "rules": [
                            {"name": nr.name, **_rule_to_dict(nr.rule, env)}
                            for nr in rules
                        ],
                    }
                )
            case Inductive(definition=d):
                env = env.with_constants([h for h, _ in d.judgments])
                items.append(
                    {
                        "kind": "inductive",
                        "judgments": [
                            {"head": h, "arity": a} for h, a in d.judgments
                        ],
                        "rules": [
                            {"name": nr.name, **_rule_to_dict(nr.rule, env)}
                            for nr in d.intros
                        ],
                    }
                )
            case Theorem(statement=nr, proof=proof, style=style):
                items.append(
                    {
                        "kind": "theorem",
                        "name": nr.name,
                        **_rule_to_dict(nr.rule, env),
                        "style": style,
                        "proof": [_step_to_dict(p, s) for p, s in proof],
                    }
                )
    return {
        "hbt": FORMAT_VERSION,
        "title": doc.title,
        "version": doc.version,
        "constants": list(doc.constants),
        "items": items,
    }


def serialize_document(doc: Document) -> bytes:
    """Canonical bytes: sorted keys, two-space indent, UTF-8, final newline."""
    text = json.dumps(document_to_dict(doc), ensure_ascii=False, sort_keys=True, indent=2)
    return (text + "\n").encode("utf-8")


def replace_proof(doc: Document, theorem_name: str, proof) -> Document:
    items = []
    found = False
    for item in doc.items:
        if isinstance(item, Theorem) and item.statement.name == theorem_name:
            items.append(replace(item, proof=tuple(proof)))
            found = True
        else:
            items.append(item)
    if not found:
        raise UnknownRuleReference(f"no theorem named {theorem_name!r}")
    return replace(doc, items=tuple(items))


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremStatus:
    name: str
    report: CheckReport

    @property
    def status(self) -> str:
        if self.report.step_errors:
            return "error"
        if self.report.unsolved:
            return "incomplete"
        if self.report.unresolved_unifvars:
            return "unresolved-variables"
        return "complete"


@dataclass(frozen=True)
class DocumentReport:
    theorems: tuple[TheoremStatus, ...]

    @property
    def counts(self) -> dict[str, int]:
        out = {"theorems": len(self.theorems), "complete": 0, "incomplete": 0, "error": 0}
        for t in self.theorems:
            if t.status == "complete":
                out["complete"] += 1
            elif t.status == "error":
                out["error"] += 1
            else:
                out["incomplete"] += 1
        return out

    def all_complete(self, strict_unifvars: bool = False) -> bool:
        for t in self.theorems:
            if t.status in ("error", "incomplete"):
                return False
            if strict_unifvars and t.status == "unresolved-variables":
                return False
        return True


def check_document(doc: Document, fuel: int = 10_000) -> DocumentReport:
    """Replay every theorem's proof script under its lexical scope."""
    env = doc.env()
    statuses: list[TheoremStatus] = []
    for i, item in enumerate(doc.items):
        if not isinstance(item, Theorem):
            continue
        scope = scope_at(doc, i)
        state, errors = replay(item.statement, item.proof, scope, env, fuel)
        unsolved = tuple(unsolved_goals(state))
        unresolved = tuple(sorted(tree_unifvars(state.tree)))
        solved = not unsolved and not errors
        report = CheckReport(
            complete=solved and not unresolved,
            solved=solved,
            step_errors=tuple(errors),
            unsolved=unsolved,
            unresolved_unifvars=unresolved,
        )
        statuses.append(TheoremStatus(item.statement.name, report))
    return DocumentReport(tuple(statuses))
