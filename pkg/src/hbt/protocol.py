"""Session protocol: length-prefixed JSON frames driving a held document.

One session owns one loaded document plus a proof state per theorem. Every
request gets exactly one response echoing its id; responses are canonical
JSON so replayed transcripts are byte-identical. Frames are the payload's
byte length in ASCII decimal, a newline, then the UTF-8 payload.
"""

from __future__ import annotations

import json
from typing import BinaryIO

from . import engine
from .document import (
    Document,
    DocumentError,
    Inductive,
    Prose,
    Theorem,
    check_document,
    parse_document,
    replace_proof,
    scope_at,
    serialize_document,
)
from .engine import (
    ApplyError,
    EngineError,
    GoalRef,
    InvalidGoalRef,
    InvalidPath,
    NoMatchingSubterm,
    NoUnifier,
    OccurrenceOutOfRange,
    ProofState,
)
from .rules import print_rule
from .terms import DEFAULT_FUEL, FuelExhausted, freshen_binders, print_term
from .unification import OutsidePatternFragment, UnifyError

PROTOCOL_VERSION = "hbt/1"
MAX_FRAME = 16 * 1024 * 1024


class FrameError(Exception):
    pass


def encode_frame(payload: dict) -> bytes:
    body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
    return str(len(body)).encode("ascii") + b"\n" + body


def read_frame(stream: BinaryIO) -> dict | None:
    """One frame from the stream; None at clean end of input."""
    header = b""
    while True:
        c = stream.read(1)
        if not c:
            if header:
                raise FrameError("stream ended inside a frame header")
            return None
        if c == b"\n":
            break
        if not c.isdigit() or len(header) > 9:
            raise FrameError("malformed frame header")
        header += c
    if not header:
        raise FrameError("empty frame header")
    length = int(header)
    if length > MAX_FRAME:
        raise FrameError("frame too large")
    body = b""
    while len(body) < length:
        chunk = stream.read(length - len(body))
        if not chunk:
            raise FrameError("stream ended inside a frame body")
        body += chunk
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FrameError(f"frame body is not JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FrameError("frame payload must be an object")
    return payload


class BadRequest(Exception):
    def __init__(self, message: str, code: str = "bad-request"):
        super().__init__(message)
        self.code = code


_ERROR_CODES = [
    (NoUnifier, "no-unifier"),
    (NoMatchingSubterm, "no-matching-subterm"),
    (OccurrenceOutOfRange, "occurrence-out-of-range"),
    (InvalidGoalRef, "invalid-goal"),
    (InvalidPath, "invalid-goal"),
    (ApplyError, "apply-error"),
    (EngineError, "apply-error"),
    (OutsidePatternFragment, "outside-pattern-fragment"),
    (UnifyError, "no-unifier"),
    (FuelExhausted, "fuel-exhausted"),
    (DocumentError, "document-error"),
]


def _error_code(exc: Exception) -> str:
    for cls, code in _ERROR_CODES:
        if isinstance(exc, cls):
            return code
    return "internal-error"


class Session:
    """One protocol session: a document and one proof state per theorem."""

    def __init__(self, fuel: int = DEFAULT_FUEL):
        self.fuel = fuel
        self.document: Document | None = None
        self.states: dict[str, ProofState] = {}

    # -- plumbing ----------------------------------------------------------

    def handle(self, request: dict) -> dict:
        request_id = request.get("id")
        op = request.get("op")
        handler = getattr(self, f"_op_{str(op).replace('-', '_')}", None)
        if not isinstance(op, str) or handler is None:
            return {
                "id": request_id,
                "ok": False,
                "error": {"code": "unknown-op", "message": f"unknown op {op!r}"},
            }
        try:
            payload = handler(request)
        except BadRequest as exc:
            return {
                "id": request_id,
                "ok": False,
                "error": {"code": exc.code, "message": str(exc)},
            }
        except Exception as exc:  # noqa: BLE001 - all kernel errors map to codes
            return {
                "id": request_id,
                "ok": False,
                "error": {"code": _error_code(exc), "message": str(exc)},
            }
        return {"id": request_id, "ok": True, **payload}

    def _document(self) -> Document:
        if self.document is None:
            raise BadRequest("no document loaded", "no-document")
        return self.document

    def _theorem_item(self, name: str) -> tuple[int, Theorem]:
        doc = self._document()
        for i, item in enumerate(doc.items):
            if isinstance(item, Theorem) and item.statement.name == name:
                return i, item
        raise BadRequest(f"unknown theorem {name!r}", "unknown-theorem")

    def _scope(self, name: str) -> dict:
        index, _ = self._theorem_item(name)
        return scope_at(self._document(), index)

    def _state(self, name: str) -> ProofState:
        if name not in self.states:
            index, item = self._theorem_item(name)
            doc = self._document()
            state, errors = engine.replay(
                item.statement, item.proof, scope_at(doc, index), doc.env(), self.fuel
            )
            if errors:
                raise BadRequest(
                    f"saved proof of {name!r} does not replay: {errors[0][1]}",
                    "document-error",
                )
            self.states[name] = state
        return self.states[name]

    @staticmethod
    def _goal_ref(request: dict, key: str = "goal") -> GoalRef:
        path = request.get(key)
        if not isinstance(path, list) or not all(
            isinstance(i, int) and i >= 0 for i in path
        ):
            raise BadRequest(f"{key} must be a list of child indices")
        return tuple(path)

    @staticmethod
    def _name(request: dict, key: str) -> str:
        value = request.get(key)
        if not isinstance(value, str) or not value:
            raise BadRequest(f"{key} must be a non-empty string")
        return value

    def _named_rule(self, theorem: str, rule_name: str):
        scope = self._scope(theorem)
        if rule_name not in scope:
            raise BadRequest(f"rule {rule_name!r} is not in scope", "unknown-rule")
        return scope[rule_name]

    def _after_mutation(self, theorem: str, state: ProofState, ref: GoalRef) -> dict:
        self.states[theorem] = state
        node = engine.node_at(state, ref)
        new_goals = [
            list(ref) + [i] for i, c in enumerate(node.children) if c.unsolved
        ]
        return {
            "new_goals": new_goals,
            "open_goals": [list(g) for g in engine.unsolved_goals(state)],
        }

    # -- operations --------------------------------------------------------

    def _op_version(self, request: dict) -> dict:
        return {"protocol": PROTOCOL_VERSION}

    def _op_load_document(self, request: dict) -> dict:
        text = request.get("text")
        if not isinstance(text, str):
            raise BadRequest("text must be the document source")
        document = parse_document(text)
        self.document = document
        self.states = {}
        env = document.env()
        items = []
        for item in document.items:
            match item:
                case Prose(text=prose):
                    items.append({"kind": "prose", "text": prose})
                case Theorem(statement=nr, style=style):
                    items.append(
                        {
                            "kind": "theorem",
                            "name": nr.name,
                            "statement": print_rule(nr.rule, env),
                            "style": style,
                        }
                    )
                case Inductive(definition=d):
                    items.append(
                        {
                            "kind": "inductive",
                            "judgments": [h for h, _ in d.judgments],
                            "rules": [
                                {"name": nr.name, "text": print_rule(nr.rule, env)}
                                for nr in d.intros
                            ],
                        }
                    )
                case _:
                    items.append(
                        {
                            "kind": "axioms",
                            "rules": [
                                {"name": nr.name, "text": print_rule(nr.rule, env)}
                                for nr in item.rules
                            ],
                        }
                    )
        return {"title": document.title, "items": items}

    def _op_save_document(self, request: dict) -> dict:
        doc = self._document()
        for name, state in self.states.items():
            doc = replace_proof(doc, name, engine.script_of(state.tree))
        self.document = doc
        return {"text": serialize_document(doc).decode("utf-8")}

    def _op_list_goals(self, request: dict) -> dict:
        state = self._state(self._name(request, "theorem"))
        goals = []
        for ref in engine.unsolved_goals(state):
            goals.append(
                {"path": list(ref), "target": engine.goal_display(state, ref)["target"]}
            )
        return {"goals": goals}

    def _op_goal_summary(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        state = self._state(theorem)
        ref = self._goal_ref(request)
        show_all = bool(request.get("show_all", False))
        scope = self._scope(theorem)
        summary = engine.goal_summary(state, ref, scope.values(), show_all)
        display = engine.goal_display(state, ref)
        return {
            "target": display["target"],
            "locals": display["locals"],
            "assumptions": [
                {"number": i, "text": text}
                for i, text in enumerate(display["assumptions"])
            ],
            "candidates": list(summary.candidates),
        }

    def _op_apply_intro(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        ref = self._goal_ref(request)
        rule = self._named_rule(theorem, self._name(request, "rule"))
        state = engine.apply_intro(self._state(theorem), ref, rule)
        return self._after_mutation(theorem, state, ref)

    def _op_apply_assumption(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        ref = self._goal_ref(request)
        assumption = request.get("assumption")
        if not isinstance(assumption, int):
            raise BadRequest("assumption must be a number")
        state = engine.apply_assumption(self._state(theorem), ref, assumption)
        return self._after_mutation(theorem, state, ref)

    def _op_apply_elim(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        ref = self._goal_ref(request)
        assumption = request.get("assumption")
        if not isinstance(assumption, int):
            raise BadRequest("assumption must be a number")
        rule = self._named_rule(theorem, self._name(request, "rule"))
        state = engine.apply_elim(self._state(theorem), ref, assumption, rule)
        return self._after_mutation(theorem, state, ref)

    def _op_rewrite(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        ref = self._goal_ref(request)
        direction = request.get("direction", engine.LTR)
        occurrence = request.get("occurrence", 0)
        if not isinstance(occurrence, int) or occurrence < 0:
            raise BadRequest("occurrence must be a natural number")
        equation: engine.NamedRule | int
        if "assumption" in request:
            assumption = request.get("assumption")
            if not isinstance(assumption, int):
                raise BadRequest("assumption must be a number")
            equation = assumption
        else:
            equation = self._named_rule(theorem, self._name(request, "rule"))
        state = engine.rewrite(
            self._state(theorem), ref, equation, direction, occurrence
        )
        return self._after_mutation(theorem, state, ref)

    def _op_apply_refl(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        ref = self._goal_ref(request)
        state = engine.apply_refl(self._state(theorem), ref)
        return self._after_mutation(theorem, state, ref)

    def _op_clear_subtree(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        ref = self._goal_ref(request, "path")
        scope = self._scope(theorem)
        state = engine.clear_subtree(self._state(theorem), ref, scope)
        self.states[theorem] = state
        return {"open_goals": [list(g) for g in engine.unsolved_goals(state)]}

    def _op_get_tree(self, request: dict) -> dict:
        theorem = self._name(request, "theorem")
        _, item = self._theorem_item(theorem)
        state = self._state(theorem)
        env = state.env

        def render(node, names: tuple[str, ...], assumption_count: int) -> dict:
            fresh = freshen_binders(names + node.new_locals, env)
            local_env = env.with_binders(fresh)
            new_names = names + node.new_locals
            step = None
            if node.step is not None:
                step = {"op": node.step.op}
                for key in ("rule", "assumption", "direction", "occurrence"):
                    value = getattr(node.step, key)
                    if value is not None:
                        step[key] = value
            count = assumption_count + len(node.new_assumptions)
            return {
                "target": print_term(node.target, local_env),
                "new_locals": list(
                    fresh[len(names):]
                ),
                "new_assumptions": [
                    {
                        "number": assumption_count + i,
                        "text": print_rule(a, local_env),
                    }
                    for i, a in enumerate(node.new_assumptions)
                ],
                "step": step,
                "children": [render(c, new_names, count) for c in node.children],
            }

        return {
            "name": theorem,
            "style": item.style,
            "statement": print_rule(item.statement.rule, env),
            "tree": render(state.tree, (), 0),
        }

    def _op_check(self, request: dict) -> dict:
        doc = self._document()
        for name, state in self.states.items():
            doc = replace_proof(doc, name, engine.script_of(state.tree))
        report = check_document(doc, self.fuel)
        return {
            "theorems": [
                {
                    "name": t.name,
                    "status": t.status,
                    "unsolved": [list(p) for p in t.report.unsolved],
                    "errors": [
                        {"path": list(p), "message": m}
                        for p, m in t.report.step_errors
                    ],
                }
                for t in report.theorems
            ],
            "counts": report.counts,
        }


def serve_stream(reader: BinaryIO, writer: BinaryIO, fuel: int = DEFAULT_FUEL) -> None:
    """Serve one session over a byte stream; malformed frames end it."""
    session = Session(fuel)
    while True:
        try:
            request = read_frame(reader)
        except FrameError:
            return
        if request is None:
            return
        writer.write(encode_frame(session.handle(request)))
        writer.flush()
