"""Command line entry points: batch checking, an interactive loop, a server.

    genlog check FILE...      check development files, report per theorem
    genlog repl [FILE...]     load files, then prove theorems interactively
    genlog serve --port N     speak the line-delimited JSON protocol on TCP

Exit status: 0 when everything checks, 1 on a proof or language error,
2 on an internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import elab, server
from .frontend import SourceError, parse_theorem_arg
from .kernel import KernelError
from .session import LoadError, Session, SessionError
from .tactics import DEFAULT_DEPTH, TacticError

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="genlog",
        description="A proof assistant for a logic with generic reasoning.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check development files")
    c.add_argument("paths", nargs="+", metavar="FILE")
    c.add_argument("--json", action="store_true",
                   help="report results as JSON on stdout")
    c.add_argument("--depth", type=int, default=DEFAULT_DEPTH,
                   help="default search depth (default %(default)s)")
    c.add_argument("--trace", action="store_true",
                   help="print every rule application")

    r = sub.add_parser("repl", help="prove theorems interactively")
    r.add_argument("paths", nargs="*", metavar="FILE",
                   help="development files to load first")
    r.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    r.add_argument("--trace", action="store_true")

    s = sub.add_parser("serve", help="serve the JSON protocol over TCP")
    s.add_argument("--port", type=int, default=7415)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    return p


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def _cmd_check(args) -> int:
    report = {"ok": True, "files": []}
    for path in args.paths:
        entry = {"path": path, "theorems": [], "error": None}
        report["files"].append(entry)
        log = (lambda s: print(s)) if args.trace and not args.json else None
        session = Session(depth=args.depth, log=log)
        if not args.json:
            print(path)
        try:
            results = session.load_file(path)
        except (LoadError, SessionError) as e:
            entry["error"] = str(e)
            report["ok"] = False
            if not args.json:
                print(f"  error: {e}")
            continue
        for r in results:
            entry["theorems"].append(
                {"name": r.name, "seconds": round(r.seconds, 3),
                 "rules": r.rules})
            if not args.json:
                print(f"  {r.name:<32} proved"
                      f"  ({r.seconds:6.2f}s, {r.rules} rules)")
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        total = sum(len(f["theorems"]) for f in report["files"])
        failed = [f["path"] for f in report["files"] if f["error"]]
        if failed:
            print(f"\n{total} theorems proved; "
                  f"failed: {', '.join(failed)}")
        else:
            print(f"\n{total} theorems proved")
    return 0 if report["ok"] else 1


# ---------------------------------------------------------------------------
# repl
# ---------------------------------------------------------------------------

def _show(session: Session) -> None:
    if session.proof is None:
        return
    if session.proof.done():
        print(f"Proof completed; Qed records {session.thm_name}.")
    else:
        print(session.subgoal_text())


def _repl_line(session: Session, line: str) -> None:
    word = line.split(None, 1)[0].rstrip(".")
    if session.proof is not None:
        match word:
            case "undo":
                session.undo()
                _show(session)
            case "abort":
                session.abort()
                print("Proof aborted.")
            case "Qed":
                print(f"Theorem {session.qed()} recorded.")
            case _:
                from .frontend import parse_tactic
                msg = session.tactic(parse_tactic(line))
                print(msg)
                _show(session)
        return
    if word == "Theorem":
        name, ast = parse_theorem_arg(line.split(None, 1)[1])
        session.begin(name, elab.elab_formula(session.sig, ast))
        _show(session)
        return
    for r in session.run_source(line):
        print(f"  {r.name} proved ({r.seconds:.2f}s, {r.rules} rules)")


def _cmd_repl(args) -> int:
    session = Session(depth=args.depth,
                      log=(lambda s: print(s)) if args.trace else None)
    for path in args.paths:
        try:
            for r in session.load_file(path):
                print(f"  {r.name} proved ({r.seconds:.2f}s, {r.rules} rules)")
        except (LoadError, SessionError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    print("Welcome.  Type a declaration, a Theorem, or quit.")
    while True:
        prompt = (f"{session.thm_name}> " if session.proof is not None
                  else "genlog> ")
        try:
            line = input(prompt).strip()
        except EOFError:
            print()
            if session.proof is not None:
                print(f"discarding the open proof of {session.thm_name}",
                      file=sys.stderr)
            return 0
        if not line:
            continue
        if line.rstrip(".") in ("quit", "exit"):
            return 0
        try:
            _repl_line(session, line)
        except (SourceError, LoadError, SessionError, TacticError,
                KernelError) as e:
            print(f"error: {e}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        match args.command:
            case "check":
                return _cmd_check(args)
            case "repl":
                return _cmd_repl(args)
            case "serve":
                server.serve(args.port, args.depth, args.host)
                return 0
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
