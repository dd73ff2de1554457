"""Surface syntax: lexer and parser for development files and proof scripts.

A development file is a sequence of period-terminated items: Kind and Type
declarations, Define blocks, a Specification block, Theorem items whose
proof script runs up to Qed, and import directives.  Comments run from %
to end of line.  The grammar is documented in docs/syntax.md; this module
produces a positioned syntax tree and elaboration lives in elab.py.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .pretty import NOMINAL_RE

__all__ = [
    "SourceError", "Tok", "lex", "RESERVED",
    "TName", "TApp", "TOp", "TQuant", "TLam", "TBrace", "TSeqGoal",
    "Binder", "TyName", "TyArrow",
    "DKind", "DType", "DDefine", "DSpec", "DTheorem", "DImport", "DClauseAst",
    "SIntros", "SCase", "SUnfold", "SExists", "SSplit", "SLeft", "SRight",
    "SApply", "SAssert", "SInduction", "SSearch", "SSkip",
    "parse_development", "parse_term", "parse_tactic", "parse_theorem_arg",
]


class SourceError(Exception):
    """Syntax or elaboration error carrying a source position."""

    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tok:
    kind: str  # ident | num | str | punct | eof
    text: str
    line: int
    col: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.line, self.col)

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else f"'{self.text}'"


_TOKEN_RE = re.compile(
    r"""
      (?P<skip>[\ \t\r]+|%[^\n]*)
    | (?P<nl>\n)
    | (?P<ident>[a-zA-Z][a-zA-Z0-9_']*)
    | (?P<num>[0-9]+)
    | (?P<str>"[^"\n]*")
    | (?P<punct>:=|::|\|-|->|=>|/\\|\\/|[(){},.;:=\\_])
    """,
    re.VERBOSE,
)

RESERVED = {
    "Kind", "Type", "Define", "Specification", "Theorem", "Qed",
    "import", "by", "forall", "exists", "nabla",
}

QUANTS = ("forall", "exists", "nabla")


def lex(text: str) -> list[Tok]:
    toks: list[Tok] = []
    line = 1
    bol = 0  # offset of the current line start
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SourceError(f"unexpected character {text[pos]!r}",
                              line, pos - bol + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            bol = m.end()
        elif kind != "skip":
            toks.append(Tok(kind, m.group(), line, m.start() - bol + 1))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - bol + 1))
    return toks


# ---------------------------------------------------------------------------
# syntax trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TName:
    name: str
    pos: tuple


@dataclass(frozen=True)
class TApp:
    fn: object
    arg: object
    pos: tuple


@dataclass(frozen=True)
class TOp:
    op: str
    left: object
    right: object
    pos: tuple


@dataclass(frozen=True)
class Binder:
    name: str
    ty: object  # type tree or None when the type is to be inferred
    pos: tuple


@dataclass(frozen=True)
class TQuant:
    tag: str
    binders: tuple
    body: object
    pos: tuple


@dataclass(frozen=True)
class TLam:
    name: str
    body: object
    pos: tuple


@dataclass(frozen=True)
class TBrace:
    arg: object
    pos: tuple


@dataclass(frozen=True)
class TSeqGoal:
    """ctx |- goal, sugar for an existentially bounded seq derivation."""

    ctx: object
    goal: object
    pos: tuple


@dataclass(frozen=True)
class TyName:
    name: str
    pos: tuple


@dataclass(frozen=True)
class TyArrow:
    left: object
    right: object
    pos: tuple


@dataclass(frozen=True)
class DKind:
    names: tuple
    pos: tuple


@dataclass(frozen=True)
class DType:
    names: tuple
    ty: object
    pos: tuple


@dataclass(frozen=True)
class DClauseAst:
    nabla: tuple  # Binders scoped over the head
    head: object
    body: object  # None for a fact clause
    pos: tuple


@dataclass(frozen=True)
class DDefine:
    name: str
    ty: object
    clauses: tuple
    pos: tuple


@dataclass(frozen=True)
class DSpec:
    clauses: tuple
    pos: tuple


@dataclass(frozen=True)
class DTheorem:
    name: str
    formula: object
    script: tuple
    pos: tuple


@dataclass(frozen=True)
class DImport:
    path: str
    pos: tuple


@dataclass(frozen=True)
class SIntros:
    pos: tuple


@dataclass(frozen=True)
class SCase:
    hyp: str
    nominal: str | None
    pos: tuple


@dataclass(frozen=True)
class SUnfold:
    clause: int | None  # 1-based clause number
    choice: int | None  # 1-based unifier number
    pos: tuple


@dataclass(frozen=True)
class SExists:
    witness: object
    pos: tuple


@dataclass(frozen=True)
class SSplit:
    pos: tuple


@dataclass(frozen=True)
class SLeft:
    pos: tuple


@dataclass(frozen=True)
class SRight:
    pos: tuple


@dataclass(frozen=True)
class SApply:
    lemma: str
    hyps: tuple  # hypothesis names, "_" leaving a premise open
    withs: tuple  # (name, term) explicit instantiations
    pos: tuple


@dataclass(frozen=True)
class SAssert:
    formula: object
    pos: tuple


@dataclass(frozen=True)
class SInduction:
    hyp: str
    invariant: object  # None to synthesise one
    pos: tuple


@dataclass(frozen=True)
class SSearch:
    depth: int | None
    pos: tuple


@dataclass(frozen=True)
class SSkip:
    pos: tuple


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, msg: str, tok: Tok | None = None):
        t = tok or self.peek()
        raise SourceError(msg, t.line, t.col)

    def at_punct(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def at_ident(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text == text

    def expect_punct(self, text: str) -> Tok:
        if not self.at_punct(text):
            self.fail(f"expected '{text}' but found {self.peek().describe()}")
        return self.next()

    def expect_ident(self, what: str) -> Tok:
        t = self.peek()
        if t.kind != "ident":
            self.fail(f"expected {what} but found {t.describe()}")
        return self.next()

    def expect_keyword(self, text: str):
        if not self.at_ident(text):
            self.fail(f"expected '{text}' but found {self.peek().describe()}")
        self.next()

    def end_stmt(self):
        """A period, or the end of input for one-line commands."""
        if self.at_punct("."):
            self.next()
        elif self.peek().kind != "eof":
            self.fail(f"expected '.' but found {self.peek().describe()}")

    # -- names ------------------------------------------------------------

    def decl_name(self, what: str) -> str:
        t = self.expect_ident(f"a {what} name")
        if t.text in RESERVED:
            self.fail(f"'{t.text}' is a reserved word", t)
        if NOMINAL_RE.fullmatch(t.text):
            self.fail(f"'{t.text}' is reserved for nominal constants", t)
        return t.text

    def binder_name(self) -> tuple[str, tuple]:
        t = self.expect_ident("a binder name")
        if t.text in RESERVED:
            self.fail(f"'{t.text}' is a reserved word", t)
        if NOMINAL_RE.fullmatch(t.text):
            self.fail(f"'{t.text}' is reserved for nominal constants", t)
        return t.text, t.pos

    def binders(self) -> tuple:
        out: list[Binder] = []
        while True:
            t = self.peek()
            if t.kind == "ident" and t.text not in RESERVED:
                name, pos = self.binder_name()
                out.append(Binder(name, None, pos))
            elif self.at_punct("("):
                self.next()
                names = [self.binder_name()]
                while self.peek().kind == "ident":
                    names.append(self.binder_name())
                self.expect_punct(":")
                ty = self.type_expr()
                self.expect_punct(")")
                out.extend(Binder(n, ty, p) for n, p in names)
            else:
                break
        if not out:
            self.fail(f"expected a binder but found {self.peek().describe()}")
        return tuple(out)

    # -- types ------------------------------------------------------------

    def type_expr(self):
        left = self.type_atom()
        if self.at_punct("->"):
            self.next()
            return TyArrow(left, self.type_expr(), left.pos)
        return left

    def type_atom(self):
        if self.at_punct("("):
            self.next()
            ty = self.type_expr()
            self.expect_punct(")")
            return ty
        t = self.expect_ident("a sort name")
        return TyName(t.text, t.pos)

    # -- terms ------------------------------------------------------------

    def term(self):
        return self.imp_term()

    def imp_term(self):
        left = self.seq_term()
        if self.at_punct("=>"):
            pos = self.next().pos
            return TOp("=>", left, self.imp_term(), pos)
        return left

    def seq_term(self):
        left = self.disj_term()
        if self.at_punct("|-"):
            pos = self.next().pos
            return TSeqGoal(left, self.disj_term(), pos)
        return left

    def disj_term(self):
        left = self.conj_term()
        while self.at_punct("\\/"):
            pos = self.next().pos
            left = TOp("\\/", left, self.conj_term(), pos)
        return left

    def conj_term(self):
        left = self.eq_term()
        while self.at_punct("/\\"):
            pos = self.next().pos
            left = TOp("/\\", left, self.eq_term(), pos)
        return left

    def eq_term(self):
        left = self.cons_term()
        if self.at_punct("="):
            pos = self.next().pos
            return TOp("=", left, self.cons_term(), pos)
        return left

    def cons_term(self):
        left = self.app_term()
        if self.at_punct("::"):
            pos = self.next().pos
            return TOp("::", left, self.cons_term(), pos)
        return left

    def _starts_prim(self) -> bool:
        t = self.peek()
        if t.kind == "ident":
            return t.text not in RESERVED or t.text in QUANTS
        return t.kind == "punct" and t.text in ("(", "{")

    def app_term(self):
        out = self.prim_term()
        while self._starts_prim():
            arg = self.prim_term()
            out = TApp(out, arg, arg.pos)
        return out

    def prim_term(self):
        t = self.peek()
        if t.kind == "ident":
            if t.text in QUANTS:
                self.next()
                bs = self.binders()
                self.expect_punct(",")
                return TQuant(t.text, bs, self.term(), t.pos)
            if t.text in RESERVED:
                self.fail(f"unexpected keyword '{t.text}'")
            if self.peek(1).kind == "punct" and self.peek(1).text == "\\":
                name, pos = self.binder_name()
                self.next()
                return TLam(name, self.term(), pos)
            self.next()
            return TName(t.text, t.pos)
        if self.at_punct("("):
            self.next()
            inner = self.term()
            self.expect_punct(")")
            return inner
        if self.at_punct("{"):
            pos = self.next().pos
            inner = self.term()
            self.expect_punct("}")
            return TBrace(inner, pos)
        self.fail(f"expected a term but found {t.describe()}")

    # -- items ------------------------------------------------------------

    def development(self) -> list:
        items = []
        while self.peek().kind != "eof":
            items.append(self.item())
        return items

    def item(self):
        t = self.peek()
        if t.kind == "ident":
            handler = {
                "Kind": self.kind_decl,
                "Type": self.type_decl,
                "Define": self.define,
                "Specification": self.spec,
                "Theorem": self.theorem,
                "import": self.import_decl,
            }.get(t.text)
            if handler is not None:
                return handler()
        self.fail("expected Kind, Type, Define, Specification, Theorem, "
                  f"or import but found {t.describe()}")

    def kind_decl(self):
        pos = self.next().pos
        names = [self.decl_name("sort")]
        while self.at_punct(","):
            self.next()
            names.append(self.decl_name("sort"))
        self.expect_keyword("type")
        self.expect_punct(".")
        return DKind(tuple(names), pos)

    def const_name(self) -> str:
        if self.at_punct("::"):
            self.next()
            return "::"
        if self.at_punct("{"):
            self.next()
            self.expect_punct("}")
            return "{}"
        return self.decl_name("constant")

    def type_decl(self):
        pos = self.next().pos
        names = [self.const_name()]
        while self.at_punct(","):
            self.next()
            names.append(self.const_name())
        ty = self.type_expr()
        self.expect_punct(".")
        return DType(tuple(names), ty, pos)

    def def_clause(self):
        pos = self.peek().pos
        nb: tuple = ()
        if self.at_ident("nabla"):
            self.next()
            nb = self.binders()
            self.expect_punct(",")
        head = self.term()
        body = None
        if self.at_punct(":="):
            self.next()
            body = self.term()
        return DClauseAst(nb, head, body, pos)

    def define(self):
        pos = self.next().pos
        name = self.decl_name("predicate")
        self.expect_punct(":")
        ty = self.type_expr()
        self.expect_keyword("by")
        clauses = [self.def_clause()]
        while self.at_punct(";"):
            self.next()
            clauses.append(self.def_clause())
        self.expect_punct(".")
        return DDefine(name, ty, tuple(clauses), pos)

    def spec_clause(self):
        pos = self.peek().pos
        head = self.term()
        body = None
        if self.at_punct(":="):
            self.next()
            body = self.term()
        return DClauseAst((), head, body, pos)

    def spec(self):
        pos = self.next().pos
        clauses = [self.spec_clause()]
        while self.at_punct(";"):
            self.next()
            clauses.append(self.spec_clause())
        self.expect_punct(".")
        return DSpec(tuple(clauses), pos)

    def import_decl(self):
        pos = self.next().pos
        t = self.peek()
        if t.kind != "str":
            self.fail(f"expected a quoted file name but found {t.describe()}")
        self.next()
        self.expect_punct(".")
        return DImport(t.text[1:-1], pos)

    def theorem(self):
        pos = self.next().pos
        name = self.decl_name("theorem")
        self.expect_punct(":")
        formula = self.term()
        self.expect_punct(".")
        script = []
        while not self.at_ident("Qed"):
            if self.peek().kind == "eof":
                self.fail("unexpected end of input inside a proof "
                          "(missing Qed)")
            script.append(self.tactic_stmt())
        self.next()
        self.expect_punct(".")
        return DTheorem(name, formula, tuple(script), pos)

    # -- tactic statements --------------------------------------------------

    def hyp_name(self) -> str:
        t = self.expect_ident("a hypothesis name")
        if t.text in RESERVED:
            self.fail(f"'{t.text}' is a reserved word", t)
        return t.text

    def opt_num(self) -> int | None:
        if self.peek().kind == "num":
            return int(self.next().text)
        return None

    def tactic_stmt(self):
        t = self.expect_ident("a tactic")
        pos = t.pos
        out = None
        match t.text:
            case "intros":
                out = SIntros(pos)
            case "case":
                hyp = self.hyp_name()
                nominal = None
                if self.at_ident("with"):
                    self.next()
                    n = self.next()
                    if n.kind != "ident" or not NOMINAL_RE.fullmatch(n.text):
                        self.fail("expected a nominal constant such as n1",
                                  n)
                    nominal = n.text
                out = SCase(hyp, nominal, pos)
            case "unfold":
                clause = self.opt_num()
                choice = self.opt_num() if clause is not None else None
                out = SUnfold(clause, choice, pos)
            case "exists":
                out = SExists(self.term(), pos)
            case "split":
                out = SSplit(pos)
            case "left":
                out = SLeft(pos)
            case "right":
                out = SRight(pos)
            case "apply":
                lemma = self.hyp_name()
                hyps: list[str] = []
                withs: list[tuple] = []
                if self.at_ident("to"):
                    self.next()
                    while True:
                        if self.at_punct("_"):
                            self.next()
                            hyps.append("_")
                        elif (self.peek().kind == "ident"
                              and not self.at_ident("with")):
                            hyps.append(self.hyp_name())
                        else:
                            break
                    if not hyps:
                        self.fail("expected hypothesis names after 'to'")
                if self.at_ident("with"):
                    self.next()
                    while True:
                        wname = self.expect_ident("a variable name").text
                        self.expect_punct("=")
                        withs.append((wname, self.term()))
                        if self.at_punct(","):
                            self.next()
                        else:
                            break
                out = SApply(lemma, tuple(hyps), tuple(withs), pos)
            case "assert":
                out = SAssert(self.term(), pos)
            case "induction":
                self.expect_keyword("on")
                hyp = self.hyp_name()
                inv = None
                if self.at_ident("with"):
                    self.next()
                    inv = self.term()
                out = SInduction(hyp, inv, pos)
            case "search":
                out = SSearch(self.opt_num(), pos)
            case "skip":
                out = SSkip(pos)
            case _:
                self.fail(f"unknown tactic '{t.text}'", t)
        self.end_stmt()
        return out


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def _finish(p: _Parser, out):
    if p.at_punct("."):
        p.next()
    if p.peek().kind != "eof":
        p.fail(f"unexpected {p.peek().describe()} after the end")
    return out


def parse_development(text: str) -> list:
    """Parse a development file into a list of positioned items."""
    return _Parser(lex(text)).development()


def parse_term(text: str):
    """Parse a single term or formula."""
    p = _Parser(lex(text))
    return _finish(p, p.term())


def parse_tactic(text: str):
    """Parse one tactic statement, as entered at a prompt."""
    p = _Parser(lex(text))
    out = p.tactic_stmt()
    if p.peek().kind != "eof":
        p.fail(f"unexpected {p.peek().describe()} after the tactic")
    return out


def parse_theorem_arg(text: str):
    """Parse a 'name : formula' theorem declaration."""
    p = _Parser(lex(text))
    name = p.decl_name("theorem")
    p.expect_punct(":")
    return _finish(p, (name, p.term()))
