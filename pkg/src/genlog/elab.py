"""Elaboration of surface syntax into kernel terms, clauses, and definitions.

Types are inferred: binder annotations are optional wherever the context
pins the type down.  Capitalised identifiers inside definition and
specification clauses become implicitly quantified clause variables.
A Specification block compiles object-level clauses into the prog
predicate consumed by a seq encoding already in scope.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    App, Arrow, Base, Bound, Const, Lam, Nominal, Term, Var, NT, OTY,
    arrow, mk_app, normalize, shift, spine, type_contains_o,
)
from .logic import (
    AND, FF, IMP, NAT, OR, S, TT, Z,
    Clause, DefError, Definition, Sequent, StratificationError,
    check_clause, check_restriction, conj, infer_levels, quant_const,
)
from .frontend import (
    Binder, DClauseAst, DDefine, DKind, DSpec, DType, SourceError,
    TApp, TBrace, TLam, TName, TOp, TQuant, TSeqGoal, TyArrow, TyName,
)
from .pretty import INJECT, NOMINAL_RE

__all__ = [
    "Signature", "new_signature", "elab_type", "Elab",
    "elab_formula", "elab_tactic_term", "elab_def_clause",
    "declare_kind", "declare_type", "add_definition", "compile_spec",
    "BUILTIN_CONSTS", "BUILTIN_SORTS",
]

BUILTIN_SORTS = {"o", "nt"}
BUILTIN_CONSTS = {"z": Z, "s": S, "nat": NAT, "tt": TT, "ff": FF}


@dataclass
class Signature:
    """Declared sorts and constants of a development."""

    sorts: set
    consts: dict


def new_signature() -> Signature:
    return Signature(set(BUILTIN_SORTS), {})


# ---------------------------------------------------------------------------
# type inference
# ---------------------------------------------------------------------------

class TMeta:
    """An undetermined type, solved by unification during elaboration."""

    __slots__ = ("ref", "pos", "what")

    def __init__(self, pos: tuple, what: str):
        self.ref = None
        self.pos = pos
        self.what = what


def tfind(ty):
    while isinstance(ty, TMeta) and ty.ref is not None:
        ty = ty.ref
    return ty


def _show_ty(ty) -> str:
    ty = tfind(ty)
    if isinstance(ty, TMeta):
        return "_"
    if isinstance(ty, Base):
        return ty.name
    left = _show_ty(ty.left)
    if isinstance(tfind(ty.left), Arrow):
        left = f"({left})"
    return f"{left} -> {_show_ty(ty.right)}"


def _occurs(m: TMeta, ty) -> bool:
    ty = tfind(ty)
    if ty is m:
        return True
    if isinstance(ty, Arrow):
        return _occurs(m, ty.left) or _occurs(m, ty.right)
    return False


def tunify(a, b, pos: tuple) -> None:
    a = tfind(a)
    b = tfind(b)
    if a is b:
        return
    if isinstance(a, TMeta):
        if _occurs(a, b):
            raise SourceError("circular type constraint", *pos)
        a.ref = b
        return
    if isinstance(b, TMeta):
        tunify(b, a, pos)
        return
    if isinstance(a, Base) and isinstance(b, Base) and a.name == b.name:
        return
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        tunify(a.left, b.left, pos)
        tunify(a.right, b.right, pos)
        return
    raise SourceError(f"type mismatch between {_show_ty(a)} and {_show_ty(b)}",
                      *pos)


def elab_type(sig: Signature, ast, auto: bool = False):
    """A surface type tree to a simple type.

    With auto set, unknown capitalised sort names are declared on first
    use, so signatures may be stated over opaque sorts.
    """
    match ast:
        case TyName(name, pos):
            if name in sig.sorts:
                return Base(name)
            if auto and name[0].isupper():
                sig.sorts.add(name)
                return Base(name)
            raise SourceError(f"unknown sort {name}", *pos)
        case TyArrow(left, right, _):
            return Arrow(elab_type(sig, left, auto), elab_type(sig, right, auto))


# ---------------------------------------------------------------------------
# term elaboration
# ---------------------------------------------------------------------------

class Elab:
    """One inference context: tracks binders, metas, and clause variables."""

    def __init__(self, sig: Signature, clause_vars: bool = False,
                 locals_: dict | None = None):
        self.sig = sig
        self.clause_vars = clause_vars
        self.locals = dict(locals_ or {})  # name -> Var or Nominal
        self.uvars: dict[str, Var] = {}
        self.uvar_pos: dict[str, tuple] = {}
        self.scope: list = []  # (name, type), innermost first

    def meta(self, pos: tuple, what: str) -> TMeta:
        return TMeta(pos, what)

    def _name(self, name: str, pos: tuple, expected) -> Term:
        for k, (n, ty) in enumerate(self.scope):
            if n == name:
                tunify(expected, ty, pos)
                return Bound(k)
        if name in self.locals:
            t = self.locals[name]
            tunify(expected, t.ty, pos)
            return t
        if NOMINAL_RE.fullmatch(name):
            ty = self.meta(pos, f"the nominal constant {name}")
            tunify(expected, ty, pos)
            return Nominal(int(name[1:]), ty)
        c = self.sig.consts.get(name) or BUILTIN_CONSTS.get(name)
        if c is not None:
            tunify(expected, c.ty, pos)
            return c
        if self.clause_vars and name[0].isupper():
            v = self.uvars.get(name)
            if v is None:
                v = Var(name, self.meta(pos, f"the variable {name}"))
                self.uvars[name] = v
                self.uvar_pos[name] = pos
            tunify(expected, v.ty, pos)
            return v
        raise SourceError(f"unknown identifier {name}", *pos)

    def elab(self, a, expected) -> Term:
        match a:
            case TName(name, pos):
                return self._name(name, pos, expected)
            case TApp(f, x, pos):
                fm = self.meta(pos, "an application head")
                ef = self.elab(f, fm)
                fty = tfind(fm)
                if isinstance(fty, TMeta):
                    dom = self.meta(pos, "an argument")
                    rng = self.meta(pos, "an application result")
                    fty.ref = Arrow(dom, rng)
                elif isinstance(fty, Arrow):
                    dom, rng = fty.left, fty.right
                else:
                    raise SourceError(
                        "this term is applied to too many arguments", *pos)
                ex = self.elab(x, dom)
                tunify(expected, rng, pos)
                return App(ef, ex)
            case TOp("=", left, right, pos):
                m = self.meta(pos, "an equation")
                el = self.elab(left, m)
                er = self.elab(right, m)
                tunify(expected, OTY, pos)
                return mk_app(Const("=", arrow(m, m, OTY)), el, er)
            case TOp("/\\" | "\\/" | "=>" as op, left, right, pos):
                el = self.elab(left, OTY)
                er = self.elab(right, OTY)
                tunify(expected, OTY, pos)
                return mk_app({"/\\": AND, "\\/": OR, "=>": IMP}[op], el, er)
            case TOp("::", left, right, pos):
                c = self.sig.consts.get("::")
                if c is None or not isinstance(c.ty, Arrow) \
                        or not isinstance(c.ty.right, Arrow):
                    raise SourceError(
                        "no list constructor :: has been declared", *pos)
                el = self.elab(left, c.ty.left)
                er = self.elab(right, c.ty.right.left)
                tunify(expected, c.ty.right.right, pos)
                return mk_app(c, el, er)
            case TBrace(arg, pos):
                c = self.sig.consts.get(INJECT)
                if c is None or not isinstance(c.ty, Arrow):
                    raise SourceError(
                        "no atom injection {} has been declared", *pos)
                ea = self.elab(arg, c.ty.left)
                tunify(expected, c.ty.right, pos)
                return App(c, ea)
            case TSeqGoal(ctx, goal, pos):
                c = self.sig.consts.get("seq")
                ok = (c is not None and isinstance(c.ty, Arrow)
                      and c.ty.left == NT
                      and isinstance(c.ty.right, Arrow)
                      and isinstance(c.ty.right.right, Arrow)
                      and c.ty.right.right.right == OTY)
                if not ok:
                    raise SourceError(
                        "the |- notation needs seq : nt -> _ -> _ -> o "
                        "in scope", *pos)
                el = self.elab(ctx, c.ty.right.left)
                eg = self.elab(goal, c.ty.right.right.left)
                tunify(expected, OTY, pos)
                body = conj(App(NAT, Bound(0)),
                            mk_app(c, Bound(0), shift(el, 1), shift(eg, 1)))
                return App(quant_const("exists", NT), Lam(NT, body, "n"))
            case TQuant(tag, binders, body, pos):
                tunify(expected, OTY, pos)
                tys = []
                for b in binders:
                    ty = (elab_type(self.sig, b.ty) if b.ty is not None
                          else self.meta(b.pos, f"the binder {b.name}"))
                    tys.append(ty)
                    self.scope.insert(0, (b.name, ty))
                eb = self.elab(body, OTY)
                for b, ty in zip(reversed(binders), reversed(tys)):
                    self.scope.pop(0)
                    eb = App(quant_const(tag, ty), Lam(ty, eb, b.name))
                return eb
            case TLam(name, body, pos):
                dom = self.meta(pos, f"the binder {name}")
                rng = self.meta(pos, "a function body")
                self.scope.insert(0, (name, dom))
                eb = self.elab(body, rng)
                self.scope.pop(0)
                tunify(expected, Arrow(dom, rng), pos)
                return Lam(dom, eb, name)

    # -- resolving inferred types ----------------------------------------

    def zty(self, ty):
        ty = tfind(ty)
        if isinstance(ty, TMeta):
            raise SourceError(f"cannot infer the type of {ty.what}", *ty.pos)
        if isinstance(ty, Arrow):
            return Arrow(self.zty(ty.left), self.zty(ty.right))
        return ty

    def zterm(self, t: Term) -> Term:
        match t:
            case Bound():
                return t
            case Var(name, ty):
                return Var(name, self.zty(ty))
            case Const(name, ty):
                return Const(name, self.zty(ty))
            case Nominal(index, ty):
                return Nominal(index, self.zty(ty))
            case App(f, a):
                return App(self.zterm(f), self.zterm(a))
            case Lam(ty, body, hint):
                return Lam(self.zty(ty), self.zterm(body), hint)

    def finish(self, t: Term) -> Term:
        return normalize(self.zterm(t))


def _checked_formula(f: Term, pos: tuple) -> Term:
    try:
        check_restriction(f)
    except DefError as e:
        raise SourceError(str(e), *pos) from None
    return f


def elab_formula(sig: Signature, ast, locals_: dict | None = None) -> Term:
    """Elaborate a closed formula, as stated by a theorem."""
    el = Elab(sig, locals_=locals_)
    return _checked_formula(el.finish(el.elab(ast, OTY)), ast.pos)


def elab_tactic_term(sig: Signature, seq: Sequent, ast, expected=None) -> Term:
    """Elaborate a tactic argument against the focused sequent.

    Eigenvariables of the sequent are in scope, and nominal constants in
    its support resolve at their recorded types when that is unambiguous.
    """
    locals_ = {v.name: v for v in seq.vars}
    by_name: dict[str, list] = {}
    for c in sorted(seq.supp(), key=lambda c: c.index):
        by_name.setdefault(f"n{c.index}", []).append(c)
    for name, cs in by_name.items():
        if len(cs) == 1:
            locals_.setdefault(name, cs[0])
    el = Elab(sig, locals_=locals_)
    if expected is None:
        expected = el.meta(getattr(ast, "pos", (0, 0)), "this argument")
    t = el.finish(el.elab(ast, expected))
    if tfind(expected) == OTY:
        return _checked_formula(t, ast.pos)
    return t


# ---------------------------------------------------------------------------
# declarations and definitions
# ---------------------------------------------------------------------------

def _check_const_name(name: str, pos: tuple) -> None:
    if name in ("::", INJECT):
        return
    if name[0].isupper():
        raise SourceError(
            f"constant names start with a lowercase letter (capitalised "
            f"names such as {name} act as clause variables)", *pos)


def declare_kind(sig: Signature, item: DKind) -> None:
    for name in item.names:
        if name in sig.sorts:
            raise SourceError(f"the sort {name} is already declared",
                              *item.pos)
        sig.sorts.add(name)


def _check_arg_types(ty, what: str, pos: tuple) -> None:
    while isinstance(ty, Arrow):
        if type_contains_o(ty.left):
            raise SourceError(
                f"{what} cannot take an argument whose type involves o", *pos)
        ty = ty.right


def declare_type(sig: Signature, item: DType) -> None:
    ty = elab_type(sig, item.ty, auto=True)
    _check_arg_types(ty, "a constant", item.pos)
    for name in item.names:
        _check_const_name(name, item.pos)
        if name in BUILTIN_CONSTS or name in sig.consts:
            raise SourceError(f"the constant {name} is already declared",
                              *item.pos)
        sig.consts[name] = Const(name, ty)


def elab_def_clause(sig: Signature, pred: str, cl: DClauseAst) -> Clause:
    el = Elab(sig, clause_vars=True)
    zvars = []
    for b in cl.nabla:
        if b.name in el.locals:
            raise SourceError(f"duplicate nabla binder {b.name}", *b.pos)
        ty = (elab_type(sig, b.ty) if b.ty is not None
              else el.meta(b.pos, f"the binder {b.name}"))
        v = Var(b.name, ty)
        el.locals[b.name] = v
        zvars.append(v)
    head = el.elab(cl.head, OTY)
    head_vars = set(el.uvars)
    body = el.elab(cl.body, OTY) if cl.body is not None else TT
    for name in el.uvars:
        if name not in head_vars:
            raise SourceError(
                f"the variable {name} occurs only in the clause body; "
                f"quantify it explicitly there", *el.uvar_pos[name])
    clause = Clause(
        pred,
        tuple(Var(n, el.zty(v.ty)) for n, v in el.uvars.items()),
        tuple(Var(v.name, el.zty(v.ty)) for v in zvars),
        el.finish(head), el.finish(body))
    try:
        check_clause(clause)
    except DefError as e:
        raise SourceError(str(e), *cl.pos) from None
    return clause


def add_definition(sig: Signature, defs: dict, item: DDefine) -> dict:
    ty = elab_type(sig, item.ty, auto=True)
    res = ty
    while isinstance(res, Arrow):
        res = res.right
    if res != OTY:
        raise SourceError("a predicate type must end in o", *item.pos)
    _check_arg_types(ty, "a predicate", item.pos)
    _check_const_name(item.name, item.pos)
    if item.name in BUILTIN_CONSTS or item.name in sig.consts:
        raise SourceError(f"the constant {item.name} is already declared",
                          *item.pos)
    sig.consts[item.name] = Const(item.name, ty)
    clauses = tuple(elab_def_clause(sig, item.name, cl)
                    for cl in item.clauses)
    out = dict(defs)
    out[item.name] = Definition(item.name, ty, clauses)
    try:
        return infer_levels(out)
    except StratificationError as e:
        raise SourceError(str(e), *item.pos) from None


# ---------------------------------------------------------------------------
# specification compilation
# ---------------------------------------------------------------------------

def _spec_signature(sig: Signature, pos: tuple):
    missing = [n for n in ("prog", "and", "imp", "all", INJECT)
               if n not in sig.consts]
    if missing:
        raise SourceError(
            "a Specification block needs the declared constants "
            f"{', '.join(missing)} (import the seq development)", *pos)
    progc = sig.consts["prog"]
    andc = sig.consts["and"]
    impc = sig.consts["imp"]
    allc = sig.consts["all"]
    injc = sig.consts[INJECT]
    try:
        atm = progc.ty.left
        obj = progc.ty.right.left
        dom = allc.ty.left.left
        well_formed = (progc.ty.right.right == OTY
                       and injc.ty == Arrow(atm, obj)
                       and andc.ty == arrow(obj, obj, obj)
                       and impc.ty == arrow(atm, obj, obj)
                       and allc.ty == Arrow(Arrow(dom, obj), obj))
    except AttributeError:
        well_formed = False
    if not well_formed:
        raise SourceError(
            "the declared types of prog, and, imp, all, and {} do not "
            "form an object-goal signature", *pos)
    return progc, andc, impc, allc, injc, atm, obj, dom


def _spec_clause(sig: Signature, cl: DClauseAst, parts) -> Clause:
    progc, andc, impc, allc, injc, atm, obj, dom = parts
    el = Elab(sig, clause_vars=True)
    if cl.body is not None:
        head_ast, goal_ast = cl.head, cl.body
    else:
        match cl.head:
            case TOp("=>", g, a, _):
                head_ast, goal_ast = a, g
            case _:
                head_ast, goal_ast = cl.head, None

    def goal(a) -> Term:
        match a:
            case TOp("/\\", left, right, _):
                return mk_app(andc, goal(left), goal(right))
            case TOp("=>", left, right, _):
                return mk_app(impc, el.elab(left, atm), goal(right))
            case TQuant("forall", binders, body, _):
                for b in binders:
                    if b.ty is not None and elab_type(sig, b.ty) != dom:
                        raise SourceError(
                            "object-level quantification ranges over "
                            f"{dom.name}", *b.pos)
                    el.scope.insert(0, (b.name, dom))
                g = goal(body)
                for b in reversed(binders):
                    el.scope.pop(0)
                    g = App(allc, Lam(dom, g, b.name))
                return g
            case TQuant(tag, _, _, pos):
                raise SourceError(
                    f"{tag} cannot appear in a specification goal", *pos)
            case TOp(op, _, _, pos):
                raise SourceError(
                    f"{op} cannot appear in a specification goal", *pos)
            case TBrace(arg, _):
                return App(injc, el.elab(arg, atm))
            case TLam(_, _, pos) | TSeqGoal(_, _, pos):
                raise SourceError(
                    "this term is outside the specification fragment", *pos)
            case _:
                return App(injc, el.elab(a, atm))

    head = el.elab(head_ast, atm)
    if goal_ast is not None:
        g = goal(goal_ast)
    else:
        # a fact backchains through a goal that always succeeds: assuming
        # the head atom and then asking for it again
        g = mk_app(impc, head, App(injc, head))
    full = el.finish(mk_app(progc, head, g))
    hh, _ = spine(el.finish(head))
    if not isinstance(hh, Const):
        raise SourceError(
            "the head of a specification clause must be an atom with a "
            "declared predicate", *cl.pos)
    clause = Clause("prog",
                    tuple(Var(n, el.zty(v.ty)) for n, v in el.uvars.items()),
                    (), full, TT)
    try:
        check_clause(clause)
    except DefError as e:
        raise SourceError(str(e), *cl.pos) from None
    return clause


def compile_spec(sig: Signature, defs: dict, item: DSpec) -> dict:
    """Compile object-level clauses into the prog definition."""
    if "prog" in defs:
        raise SourceError("prog is already defined", *item.pos)
    parts = _spec_signature(sig, item.pos)
    clauses = tuple(_spec_clause(sig, cl, parts) for cl in item.clauses)
    out = dict(defs)
    out["prog"] = Definition("prog", parts[0].ty, clauses)
    return infer_levels(out)
