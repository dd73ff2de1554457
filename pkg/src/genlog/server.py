"""A line-delimited JSON protocol for driving proofs from other programs.

Each connection owns an isolated Session.  Requests and responses are
single lines of JSON.  A request looks like

    {"id": 7, "cmd": "tactic", "arg": "case H1"}

and every response carries the request id, a status of "ok", "proved",
or "error", a message, and the open subgoals in structured form:

    {"id": 7, "status": "ok", "message": "1 subgoal remaining",
     "subgoals": [{"id": 4, "variables": [...], "supp": [...],
                   "hypotheses": [{"name": "H1", "formula": "..."}],
                   "goal": "..."}]}

Commands: load (check a development file), theorem ("name : formula"),
tactic, undo, abort, and state.  Malformed input yields an error
response and leaves the session untouched.
"""

from __future__ import annotations

import json
import socketserver

from . import elab
from .frontend import SourceError, parse_tactic, parse_theorem_arg
from .kernel import KernelError
from .session import LoadError, Session, SessionError
from .tactics import TacticError

__all__ = ["handle_line", "serve"]


def _dispatch(session: Session, cmd, arg) -> str:
    match cmd:
        case "load":
            results = session.load_file(arg)
            n = len(results)
            return f"checked {n} theorem{'s' if n != 1 else ''} from {arg}"
        case "theorem":
            name, ast = parse_theorem_arg(arg)
            session.begin(name, elab.elab_formula(session.sig, ast))
            return f"proving {name}"
        case "tactic":
            return session.tactic(parse_tactic(arg))
        case "undo":
            session.undo()
            return "undone"
        case "abort":
            session.abort()
            return "aborted"
        case "state":
            return session.status()
        case _:
            raise ValueError(f"unknown command {cmd!r}")


def handle_line(session: Session, line: str) -> dict:
    """One request line to one response object; never raises."""
    rid = None
    try:
        req = json.loads(line)
        if not isinstance(req, dict):
            raise ValueError("request is not an object")
        rid = req.get("id")
        message = _dispatch(session, req.get("cmd"), req.get("arg", ""))
        proved = session.proof is not None and session.proof.done()
        return {"id": rid, "status": "proved" if proved else "ok",
                "message": message, "subgoals": session.subgoals_json()}
    except (json.JSONDecodeError, ValueError) as e:
        return {"id": rid, "status": "error", "message": f"bad request: {e}",
                "subgoals": []}
    except (SourceError, LoadError, SessionError, TacticError,
            KernelError) as e:
        return {"id": rid, "status": "error", "message": str(e),
                "subgoals": session.subgoals_json()}


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session(depth=self.server.session_depth)
        for raw in self.rfile:
            line = raw.decode("utf-8", "replace").strip()
            if not line:
                continue
            out = json.dumps(handle_line(session, line))
            self.wfile.write(out.encode() + b"\n")
            self.wfile.flush()


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve(port: int, depth: int, host: str = "127.0.0.1") -> None:
    """Listen until interrupted; each client gets its own session."""
    with _Server((host, port), _Handler) as srv:
        srv.session_depth = depth
        actual = srv.server_address[1]
        print(f"listening on {host}:{actual}", flush=True)
        try:
            srv.serve_forever()
        except KeyboardInterrupt:
            pass
