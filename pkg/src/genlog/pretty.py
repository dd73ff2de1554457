"""Deterministic text rendering of types, terms, and sequents.

The output is valid surface syntax: quantifier binders are annotated
with their types, so printing followed by parsing reproduces the same
term without relying on type inference.
"""

from __future__ import annotations

from . import terms
from .terms import (
    App, Base, Bound, Const, Lam, Nominal, SimpleType, Term, Var,
    fresh_name, spine,
)
from .logic import QUANT_TAGS, Sequent, ensure_lam, view

__all__ = ["pp_type", "pp_term", "pp_sequent", "nominal_name",
           "INFIX", "APP_PREC", "INJECT", "NOMINAL_RE"]

# higher binds tighter; associativity drives parenthesisation; the parser
# shares this table so the two stay in sync
INFIX = {
    "=>": (1, "right"),
    "\\/": (2, "left"),
    "/\\": (3, "left"),
    "=": (4, "none"),
    "::": (5, "right"),
}
APP_PREC = 6

# name of the atom-injection constant, rendered {a} rather than applied form
INJECT = "{}"

# binders avoid the nominal lexical class, and the parser resolves
# matching identifiers to nominal constants
NOMINAL_RE = terms.NOMINAL_RE


def nominal_name(c: Nominal) -> str:
    return f"n{c.index}"


def pp_type(ty: SimpleType) -> str:
    match ty:
        case Base(name):
            return name
        case _:
            left = pp_type(ty.left)
            if not isinstance(ty.left, Base):
                left = f"({left})"
            return f"{left} -> {pp_type(ty.right)}"


def _names_in(t: Term, acc: set) -> None:
    match t:
        case Var(name, _) | Const(name, _):
            acc.add(name)
        case Nominal():
            acc.add(nominal_name(t))
        case App(f, a):
            _names_in(f, acc)
            _names_in(a, acc)
        case Lam(_, b, _):
            _names_in(b, acc)


def _binder_name(hint: str, taken: set) -> str:
    # a hint may itself read as a nominal constant; push it off that class
    hint = hint or "x"
    if NOMINAL_RE.fullmatch(hint):
        hint = hint.rstrip("0123456789")
    return fresh_name(hint, taken)


class _Printer:
    def __init__(self, taken: set):
        self.taken = taken
        self.env: list[str] = []

    def term(self, t: Term, prec: int) -> str:
        match t:
            case Bound(k):
                return self.env[k]
            case Var(name, _) | Const(name, _):
                return name
            case Nominal():
                return nominal_name(t)
            case Lam():
                return self._lam(t, prec)
        head, args = spine(t)
        match head:
            case Const(name, _) if name in INFIX and len(args) == 2:
                return self._infix(name, args[0], args[1], prec)
            case Const(tag, ty) if tag in QUANT_TAGS and len(args) == 1:
                return self._quant(tag, ensure_lam(args[0], ty.left.left), prec)
            case Const(name, _) if name == INJECT and len(args) == 1:
                return "{" + self.term(args[0], 0) + "}"
        inner = " ".join([self.term(head, APP_PREC)]
                         + [self.term(a, APP_PREC + 1) for a in args])
        return f"({inner})" if prec > APP_PREC else inner

    def _infix(self, name: str, a: Term, b: Term, prec: int) -> str:
        level, assoc = INFIX[name]
        la = level if assoc == "left" else level + 1
        ra = level if assoc == "right" else level + 1
        out = f"{self.term(a, la)} {name} {self.term(b, ra)}"
        return f"({out})" if prec > level else out

    def _open(self, lam: Lam) -> str:
        name = _binder_name(lam.hint, self.taken)
        self.taken.add(name)
        self.env.insert(0, name)
        return name

    def _close(self, name: str) -> None:
        self.env.pop(0)
        self.taken.discard(name)

    def _quant(self, tag: str, lam: Lam, prec: int) -> str:
        names: list[str] = []
        bindings: list[str] = []
        while True:
            name = self._open(lam)
            names.append(name)
            bindings.append(f"({name} : {pp_type(lam.arg_ty)})")
            head, args = spine(lam.body)
            match head:
                case Const(t2, _) if t2 == tag and len(args) == 1 \
                        and isinstance(args[0], Lam):
                    lam = args[0]
                case _:
                    break
        out = f"{tag} {' '.join(bindings)}, {self.term(lam.body, 0)}"
        for name in reversed(names):
            self._close(name)
        return f"({out})" if prec > 0 else out

    def _lam(self, lam: Lam, prec: int) -> str:
        name = self._open(lam)
        out = f"{name}\\ {self.term(lam.body, 0)}"
        self._close(name)
        return f"({out})" if prec > 0 else out


def pp_term(t: Term, taken: set | None = None) -> str:
    names: set = set(taken or ())
    _names_in(t, names)
    return _Printer(names).term(t, 0)


def pp_sequent(seq: Sequent) -> str:
    """Render a sequent for display.

    Layout: a Variables line, a Nominals line, one line per named
    hypothesis with trivial tt hypotheses elided, a separator, then the
    goal.  A sequent with no context at all prints the goal alone.
    """
    taken = set(seq.var_names())
    for _, f in seq.hyps:
        _names_in(f, taken)
    _names_in(seq.goal, taken)

    lines = []
    if seq.vars:
        lines.append("Variables: " + " ".join(v.name for v in seq.vars))
    noms = sorted(seq.supp(), key=lambda c: (c.index, pp_type(c.ty)))
    if noms:
        display = list(dict.fromkeys(nominal_name(c) for c in noms))
        lines.append("Nominals: " + " ".join(display))
    for name, f in seq.hyps:
        if view(f) != ("tt",):
            lines.append(f"{name}: {pp_term(f, taken)}")
    goal = pp_term(seq.goal, taken)
    if not lines:
        return goal
    lines.append("=" * 28)
    lines.append(goal)
    return "\n".join(lines)
