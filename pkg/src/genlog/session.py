"""Proof sessions: load developments, run scripts, drive proofs step by step.

A Session owns the signature, the definitions, and the proved lemmas of
one development, plus at most one proof in progress.  The same object
backs the batch checker, the interactive loop, and the wire protocol.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from . import elab
from .frontend import (
    DClauseAst, DDefine, DImport, DKind, DSpec, DTheorem, DType,
    SApply, SAssert, SCase, SExists, SInduction, SIntros, SLeft, SRight,
    SSearch, SSkip, SSplit, SUnfold, SourceError,
    parse_development,
)
from .kernel import KernelError, ProofState, initial_state
from .logic import Sequent, view
from .pretty import nominal_name, pp_sequent, pp_term, pp_type
from .terms import Arrow, Nominal, NT, OTY
from . import tactics as T
from .tactics import TacticError

__all__ = ["Session", "SessionError", "LoadError", "TheoremResult"]


class SessionError(Exception):
    """A request that does not make sense in the current session state."""


class LoadError(Exception):
    """A positioned error, annotated with the file it came from."""

    def __init__(self, path: str, err: SourceError):
        super().__init__(f"{path}:{err}")
        self.path = path
        self.err = err


@dataclass
class TheoremResult:
    name: str
    seconds: float
    rules: int


class Session:
    def __init__(self, depth: int = T.DEFAULT_DEPTH, log=None):
        self.sig = elab.new_signature()
        self.defs: dict = {}
        self.lemmas: list = []
        self.depth = depth
        self.log = log
        self.proof: ProofState | None = None
        self.thm_name: str | None = None
        self.thm_formula = None
        self.undo_stack: list = []
        self._loaded: set = set()
        self._loading: set = set()

    # -- loading developments ----------------------------------------------

    def load_file(self, path: str | Path) -> list[TheoremResult]:
        """Check one development file, returning per-theorem timings.

        Imports are resolved relative to the importing file and loaded at
        most once.  The first failure aborts with a LoadError carrying
        the offending file and position.
        """
        p = Path(path).resolve()
        if p in self._loaded:
            return []
        if p in self._loading:
            raise SessionError(f"circular import of {path}")
        try:
            text = p.read_text()
        except OSError as e:
            raise SessionError(f"cannot read {path}: {e.strerror}") from None
        self._loading.add(p)
        try:
            items = parse_development(text)
            return self._run_items(items, p)
        except SourceError as e:
            raise LoadError(str(path), e) from None
        finally:
            self._loading.discard(p)
            self._loaded.add(p)

    def run_source(self, text: str,
                   path: str | Path = "./input") -> list[TheoremResult]:
        """Run development items given as text, as the interactive loop does."""
        return self._run_items(parse_development(text), Path(path))

    def _run_items(self, items, path: Path) -> list[TheoremResult]:
        results = []
        for it in items:
            match it:
                case DKind():
                    elab.declare_kind(self.sig, it)
                case DType():
                    elab.declare_type(self.sig, it)
                case DDefine():
                    self.defs = elab.add_definition(self.sig, self.defs, it)
                case DSpec():
                    self.defs = elab.compile_spec(self.sig, self.defs, it)
                case DImport(rel, pos):
                    target = rel if rel.endswith(".g") else rel + ".g"
                    sub = path.parent / target
                    if not sub.is_file():
                        raise SourceError(f"cannot find {target}", *pos)
                    try:
                        results.extend(self.load_file(sub))
                    except SessionError as e:
                        raise SourceError(str(e), *pos) from None
                case DTheorem():
                    results.append(self._run_theorem(it))
        return results

    def _run_theorem(self, it: DTheorem) -> TheoremResult:
        start = time.perf_counter()
        formula = elab.elab_formula(self.sig, it.formula)
        self.begin(it.name, formula)
        for stmt in it.script:
            try:
                self.tactic(stmt)
            except (TacticError, KernelError, SessionError) as e:
                self.abort()
                raise SourceError(f"in the proof of {it.name}: {e}",
                                  *stmt.pos) from None
        if not self.proof.done():
            self.abort()
            raise SourceError(
                f"the proof of {it.name} is incomplete at Qed", *it.pos)
        rules = len(self.proof.trace)
        self._commit()
        return TheoremResult(it.name, time.perf_counter() - start, rules)

    # -- one proof at a time ------------------------------------------------

    def begin(self, name: str, formula) -> None:
        """Start proving formula under the given lemma name."""
        if self.proof is not None and self.proof.done():
            self._commit()
        if self.proof is not None:
            raise SessionError(
                f"a proof of {self.thm_name} is already in progress")
        for n, _ in self.lemmas:
            if n == name:
                raise SessionError(f"the name {name} is already used")
        self.proof = initial_state(self.defs, tuple(self.lemmas), formula)
        self.thm_name = name
        self.thm_formula = formula
        self.undo_stack = []

    def _commit(self) -> None:
        self.lemmas.append((self.thm_name, self.thm_formula))
        self.proof = None
        self.thm_name = None
        self.thm_formula = None
        self.undo_stack = []

    def tactic(self, stmt) -> str:
        if self.proof is None:
            raise SessionError("no proof in progress")
        if self.proof.done():
            raise SessionError("the proof is already complete")
        tac = self._to_tactic(stmt)
        before = self.proof
        self.proof, msg = T.run_tactic(self.proof, tac)
        self.undo_stack.append(before)
        if self.log is not None:
            for entry in self.proof.trace[len(before.trace):]:
                self.log(f"  [{entry.rule}] goal {entry.goal}")
        return msg

    def qed(self) -> str:
        """Record the completed proof as a lemma, returning its name."""
        if self.proof is None:
            raise SessionError("no proof in progress")
        if not self.proof.done():
            raise SessionError(f"the proof of {self.thm_name} is incomplete")
        name = self.thm_name
        self._commit()
        return name

    def undo(self) -> None:
        if self.proof is None:
            raise SessionError("no proof in progress")
        if not self.undo_stack:
            raise SessionError("nothing to undo")
        self.proof = self.undo_stack.pop()

    def abort(self) -> None:
        if self.proof is None:
            raise SessionError("no proof in progress")
        self.proof = None
        self.thm_name = None
        self.thm_formula = None
        self.undo_stack = []

    # -- tactic statements to tactic values ----------------------------------

    def _focused(self) -> Sequent:
        return self.proof.goals[0][1]

    def _to_tactic(self, s):
        seq = self._focused()
        match s:
            case SIntros():
                return T.Intros()
            case SCase(hyp, nominal):
                nom = None
                if nominal is not None:
                    try:
                        f = seq.hyp(hyp)
                    except KeyError:
                        raise TacticError(f"no hypothesis named {hyp}") \
                            from None
                    match view(f):
                        case ("nabla", ty, _):
                            nom = Nominal(int(nominal[1:]), ty)
                        case _:
                            raise TacticError(
                                "a nominal argument applies to a nabla "
                                "hypothesis")
                return T.Case(hyp, nom)
            case SUnfold(clause, choice):
                return T.Unfold(None if clause is None else clause - 1,
                                0 if choice is None else choice - 1)
            case SExists(ast):
                expected = None
                match view(seq.goal):
                    case ("exists", ty, _):
                        expected = ty
                return T.ExistsTac(
                    elab.elab_tactic_term(self.sig, seq, ast, expected))
            case SSplit():
                return T.Split()
            case SLeft():
                return T.Left()
            case SRight():
                return T.Right()
            case SApply(lemma, hyps, withs):
                ew = tuple(
                    (n, elab.elab_tactic_term(self.sig, seq, ast))
                    for n, ast in withs)
                return T.Apply(lemma, hyps, ew)
            case SAssert(ast):
                return T.Assert(
                    elab.elab_tactic_term(self.sig, seq, ast, OTY))
            case SInduction(hyp, inv):
                einv = None
                if inv is not None:
                    einv = elab.elab_tactic_term(self.sig, seq, inv,
                                                 Arrow(NT, OTY))
                return T.Induction(hyp, einv)
            case SSearch(depth):
                return T.Search(self.depth if depth is None else depth)
            case SSkip():
                return T.Skip()

    # -- rendering ------------------------------------------------------------

    def status(self) -> str:
        if self.proof is None:
            return "no proof in progress"
        n = len(self.proof.goals)
        if n == 0:
            return f"theorem {self.thm_name} is proved"
        if n == 1:
            return "1 subgoal remains"
        return f"{n} subgoals remain"

    def subgoal_text(self) -> str:
        """The focused subgoal, as printed after each interactive step."""
        if self.proof is None or self.proof.done():
            return ""
        gid, seq = self.proof.goals[0]
        more = len(self.proof.goals) - 1
        head = f"Subgoal {gid}" + (f" (of {len(self.proof.goals)})"
                                   if more else "")
        return f"{head}:\n\n{pp_sequent(seq)}\n"

    def subgoals_json(self) -> list[dict]:
        """All open subgoals as plain data for the wire protocol."""
        if self.proof is None:
            return []
        out = []
        for gid, seq in self.proof.goals:
            out.append({
                "id": gid,
                "variables": [
                    {"name": v.name, "type": pp_type(v.ty)}
                    for v in seq.vars],
                "supp": [
                    {"name": nominal_name(c), "type": pp_type(c.ty)}
                    for c in sorted(seq.supp(),
                                    key=lambda c: (c.index, pp_type(c.ty)))],
                "hypotheses": [
                    {"name": n, "formula": pp_term(f)}
                    for n, f in seq.hyps],
                "goal": pp_term(seq.goal),
            })
        return out
