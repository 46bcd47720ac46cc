"""Command-line front door: batch checking, formatting, and the session server."""

from __future__ import annotations

import argparse
import json
import socketserver
import sys
from pathlib import Path

from .document import DocumentError, check_document, parse_document, serialize_document
from .protocol import serve_stream
from .terms import DEFAULT_FUEL

EXIT_OK = 0
EXIT_INCOMPLETE = 1
EXIT_ERROR = 2


def _check_file(path: str, fuel: int, strict: bool) -> tuple[int, dict]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        return EXIT_ERROR, {"path": path, "error": f"cannot read: {exc}"}
    try:
        doc = parse_document(data)
    except DocumentError as exc:
        return EXIT_ERROR, {"path": path, "error": str(exc)}
    report = check_document(doc, fuel)
    ok = report.all_complete(strict_unifvars=strict)
    payload = {
        "path": path,
        "counts": report.counts,
        "theorems": [
            {
                "name": t.name,
                "status": t.status,
                "unsolved": [list(p) for p in t.report.unsolved],
                "unresolved_unifvars": list(t.report.unresolved_unifvars),
                "errors": [
                    {"path": list(p), "message": m} for p, m in t.report.step_errors
                ],
            }
            for t in report.theorems
        ],
    }
    return (EXIT_OK if ok else EXIT_INCOMPLETE), payload


def cmd_check(args) -> int:
    worst = EXIT_OK
    results = []
    for path in args.paths:
        code, payload = _check_file(path, args.fuel, args.strict_unused_unifvars)
        worst = max(worst, code)
        results.append(payload)
    if args.json:
        print(json.dumps({"files": results}, ensure_ascii=False, sort_keys=True))
        return worst
    for payload in results:
        if "error" in payload:
            print(f"{payload['path']}: error: {payload['error']}", file=sys.stderr)
            continue
        counts = payload["counts"]
        print(
            f"{payload['path']}: {counts['theorems']} theorems, "
            f"{counts['complete']} complete"
        )
        for t in payload["theorems"]:
            if t["status"] == "complete":
                continue
            detail = ""
            if t["unsolved"]:
                detail = f" ({len(t['unsolved'])} open goals)"
            if t["unresolved_unifvars"]:
                detail += (
                    f" ({len(t['unresolved_unifvars'])} unresolved metavariables)"
                )
            print(f"  {t['name']}: {t['status']}{detail}", file=sys.stderr)
            for err in t["errors"]:
                print(f"    at {err['path']}: {err['message']}", file=sys.stderr)
    return worst


def cmd_fmt(args) -> int:
    path = Path(args.path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        print(f"{args.path}: cannot read: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        doc = parse_document(data)
    except DocumentError as exc:
        print(f"{args.path}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    canonical = serialize_document(doc)
    if canonical != data:
        path.write_bytes(canonical)
    return EXIT_OK


def cmd_serve(args) -> int:
    if args.listen is None:
        serve_stream(sys.stdin.buffer, sys.stdout.buffer, args.fuel)
        return EXIT_OK

    fuel = args.fuel

    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:  # one session per connection
            serve_stream(self.rfile, self.wfile, fuel)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server(("127.0.0.1", args.listen), Handler) as server:
        host, port = server.server_address
        print(f"listening on {host}:{port}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbt", description="Check, format, and serve .hbt proof documents."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="replay every proof in the documents")
    check.add_argument("paths", nargs="+", help=".hbt files to check")
    check.add_argument("--json", action="store_true", help="machine-readable report")
    check.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="β-step budget")
    check.add_argument(
        "--strict-unused-unifvars",
        action="store_true",
        help="fail when a solved proof leaves unification variables undetermined",
    )
    check.set_defaults(fn=cmd_check)

    fmt = sub.add_parser("fmt", help="rewrite a document in canonical form")
    fmt.add_argument("path", help=".hbt file to format")
    fmt.set_defaults(fn=cmd_fmt)

    serve = sub.add_parser("serve", help="speak the session protocol")
    transport = serve.add_mutually_exclusive_group()
    transport.add_argument(
        "--stdio", action="store_true", help="frames on stdin/stdout (default)"
    )
    transport.add_argument("--listen", type=int, help="TCP port on localhost")
    serve.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="β-step budget")
    serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
