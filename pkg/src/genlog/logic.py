"""Formulas, sequents, and recursive definitions.

Formulas are terms of type o.  Connectives are constants applied to their
operands; quantifiers carry their domain type and take a single abstraction
argument, so binding is inherited from the term language.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .terms import (
    App, Arrow, Bound, Const, Lam, Nominal, Permutation, SimpleType, Term,
    Var, NT, OTY,
    abstract_over, apply_subst, arrow, free_vars, instantiate, mk_app,
    nominals_of, normalize, permute, raise_over, shift, spine, supp,
    type_contains_o, type_of, var_terms,
)
from .unify import all_permutations_of

__all__ = [
    "TT", "FF", "AND", "OR", "IMP", "Z", "S", "NAT",
    "conj", "disj", "imp", "eq", "eq_const", "quant_const", "quantify",
    "forall", "exists", "nabla", "view", "atom_pred",
    "Sequent", "Clause", "Definition", "DefError", "StratificationError",
    "check_clause", "check_restriction", "formula_level", "infer_levels",
    "raise_sequent", "raise_clause", "eq_mod_perm",
]

TT = Const("tt", OTY)
FF = Const("ff", OTY)
AND = Const("/\\", arrow(OTY, OTY, OTY))
OR = Const("\\/", arrow(OTY, OTY, OTY))
IMP = Const("=>", arrow(OTY, OTY, OTY))

Z = Const("z", NT)
S = Const("s", arrow(NT, NT))
NAT = Const("nat", arrow(NT, OTY))

QUANT_TAGS = ("forall", "exists", "nabla")


def conj(a: Term, b: Term) -> Term:
    return mk_app(AND, a, b)


def disj(a: Term, b: Term) -> Term:
    return mk_app(OR, a, b)


def imp(a: Term, b: Term) -> Term:
    return mk_app(IMP, a, b)


def eq_const(ty: SimpleType) -> Const:
    return Const("=", arrow(ty, ty, OTY))


def eq(a: Term, b: Term) -> Term:
    return mk_app(eq_const(type_of(a)), a, b)


def quant_const(tag: str, ty: SimpleType) -> Const:
    return Const(tag, arrow(arrow(ty, OTY), OTY))


def quantify(tag: str, v: Var, body: Term) -> Term:
    return mk_app(quant_const(tag, v.ty), abstract_over(body, v))


def forall(v: Var, body: Term) -> Term:
    return quantify("forall", v, body)


def exists(v: Var, body: Term) -> Term:
    return quantify("exists", v, body)


def nabla(v: Var, body: Term) -> Term:
    return quantify("nabla", v, body)


def ensure_lam(abs_: Term, ty: SimpleType) -> Lam:
    """Present a quantifier argument as an abstraction, expanding eta-short forms."""
    if isinstance(abs_, Lam):
        return abs_
    return Lam(ty, normalize(App(shift(abs_, 1), Bound(0))), "x")


def view(f: Term):
    """Decompose a formula into a tagged tuple for match statements.

    Returns one of ("tt",), ("ff",), ("and", a, b), ("or", a, b),
    ("imp", a, b), ("eq", a, b), ("forall"|"exists"|"nabla", ty, lam),
    or ("atom", head, args).
    """
    head, args = spine(f)
    match head:
        case Const("tt", _):
            return ("tt",)
        case Const("ff", _):
            return ("ff",)
        case Const("/\\", _) if len(args) == 2:
            return ("and", args[0], args[1])
        case Const("\\/", _) if len(args) == 2:
            return ("or", args[0], args[1])
        case Const("=>", _) if len(args) == 2:
            return ("imp", args[0], args[1])
        case Const("=", _) if len(args) == 2:
            return ("eq", args[0], args[1])
        case Const(tag, ty) if tag in QUANT_TAGS and len(args) == 1:
            dom = ty.left.left
            return (tag, dom, ensure_lam(args[0], dom))
        case _:
            return ("atom", head, args)


def atom_pred(f: Term) -> str | None:
    """Predicate name when f is an atom headed by a constant."""
    match view(f):
        case ("atom", Const(name, _), _):
            return name
        case _:
            return None


def _show_type(ty: SimpleType) -> str:
    if isinstance(ty, Arrow):
        left = _show_type(ty.left)
        if isinstance(ty.left, Arrow):
            left = f"({left})"
        return f"{left} -> {_show_type(ty.right)}"
    return ty.name


def check_restriction(f: Term) -> None:
    """Reject quantifiers and equations whose type involves o.

    Quantifying a formula variable (or equating formulas) would let a
    goal stand for arbitrary formulas, including ones that unfold to
    its own negation, so formula formation keeps o out of quantifier
    domains and equation types.
    """
    match view(f):
        case ("tt",) | ("ff",) | ("atom", _, _):
            return
        case ("and" | "or" | "imp", a, b):
            check_restriction(a)
            check_restriction(b)
        case ("eq", a, _):
            ty = type_of(a)
            if type_contains_o(ty):
                raise DefError(
                    f"equality at type {_show_type(ty)} is not allowed")
        case (tag, ty, abs_):
            if type_contains_o(ty):
                raise DefError(
                    f"cannot {tag}-quantify over type {_show_type(ty)}")
            check_restriction(instantiate(abs_, Var("_", ty)))


# ---------------------------------------------------------------------------
# sequents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sequent:
    """vars : hyps |- goal, with named antecedents."""

    vars: tuple[Var, ...]
    hyps: tuple[tuple[str, Term], ...]
    goal: Term

    def hyp(self, name: str) -> Term:
        for n, f in self.hyps:
            if n == name:
                return f
        raise KeyError(f"no hypothesis named {name}")

    def hyp_names(self) -> list[str]:
        return [n for n, _ in self.hyps]

    def var_names(self) -> set[str]:
        return {v.name for v in self.vars}

    def supp(self) -> frozenset[Nominal]:
        s = supp(self.goal)
        for _, f in self.hyps:
            s |= supp(f)
        return s

    def fresh_hyp_names(self, count: int, base: str = "H") -> list[str]:
        taken = {n for n, _ in self.hyps}
        out: list[str] = []
        i = 1
        while len(out) < count:
            cand = f"{base}{i}"
            i += 1
            if cand not in taken:
                taken.add(cand)
                out.append(cand)
        return out

    def add_hyps(self, formulas, names=None, base: str = "H"):
        if names is None:
            names = self.fresh_hyp_names(len(formulas), base)
        new = self.hyps + tuple(zip(names, formulas))
        return replace(self, hyps=new), list(names)

    def remove_hyps(self, names) -> "Sequent":
        gone = set(names)
        return replace(self, hyps=tuple((n, f) for n, f in self.hyps
                                        if n not in gone))

    def replace_hyp(self, name: str, formula: Term) -> "Sequent":
        self.hyp(name)
        return replace(self, hyps=tuple((n, formula if n == name else f)
                                        for n, f in self.hyps))

    def with_goal(self, goal: Term) -> "Sequent":
        return replace(self, goal=goal)

    def add_vars(self, new) -> "Sequent":
        have = self.var_names()
        added = tuple(v for v in new if v.name not in have)
        return replace(self, vars=self.vars + added)

    def apply(self, theta: dict[str, Term]) -> "Sequent":
        """Instantiate eigenvariables, extending the signature with any
        variables the instantiation introduces."""
        if not theta:
            return self
        kept = [v for v in self.vars if v.name not in theta]
        have = {v.name for v in kept}
        for v in self.vars:
            if v.name not in theta:
                continue
            for nv in sorted(var_terms(theta[v.name]), key=lambda u: u.name):
                if nv.name not in have:
                    have.add(nv.name)
                    kept.append(nv)
        hyps = tuple((n, apply_subst(theta, f)) for n, f in self.hyps)
        return Sequent(tuple(kept), hyps, apply_subst(theta, self.goal))

    def permute(self, pi: Permutation) -> "Sequent":
        hyps = tuple((n, permute(pi, f)) for n, f in self.hyps)
        return Sequent(self.vars, hyps, permute(pi, self.goal))


# ---------------------------------------------------------------------------
# definitions
# ---------------------------------------------------------------------------

class DefError(Exception):
    """Ill-formed definition."""


class StratificationError(DefError):
    """Levels admit no consistent assignment."""


@dataclass(frozen=True)
class Clause:
    """forall uvars, nabla zvars, head := body."""

    pred: str
    uvars: tuple[Var, ...]
    zvars: tuple[Var, ...]
    head: Term
    body: Term


@dataclass(frozen=True)
class Definition:
    pred: str
    ty: SimpleType
    clauses: tuple[Clause, ...]
    level: int = 0


def check_clause(cl: Clause) -> None:
    where = f"clause for {cl.pred}"
    if nominals_of(cl.head) or nominals_of(cl.body):
        raise DefError(f"nominal constant in {where}")
    hh, _ = spine(cl.head)
    if not (isinstance(hh, Const) and hh.name == cl.pred):
        raise DefError(f"head of {where} must be a {cl.pred} atom")
    if type_of(cl.head) != OTY:
        raise DefError(f"head of {where} is not fully applied")
    if type_of(cl.body) != OTY:
        raise DefError(f"body of {where} is not a formula")
    un = {v.name for v in cl.uvars}
    zn = {v.name for v in cl.zvars}
    if un & zn:
        raise DefError(f"variable bound twice in {where}")
    hv = free_vars(cl.head)
    if hv - zn != un:
        raise DefError(f"universal variables of {where} must be exactly "
                       f"the non-nabla head variables")
    bv = free_vars(cl.body)
    if bv & zn:
        raise DefError(f"nabla-bound variable of {where} occurs in the body")
    if not bv <= un:
        raise DefError(f"body of {where} mentions unbound variables "
                       f"{sorted(bv - un)}")
    for v in cl.uvars + cl.zvars:
        if type_contains_o(v.ty):
            raise DefError(f"variable {v.name} of {where} ranges over "
                           f"type {_show_type(v.ty)}, which involves o")
    check_restriction(cl.body)


def formula_level(f: Term, levels: dict[str, int]) -> int:
    """Implication depth of a formula; quantifiers are transparent."""
    match view(f):
        case ("tt",) | ("ff",) | ("eq", _, _):
            return 0
        case ("and", a, b) | ("or", a, b):
            return max(formula_level(a, levels), formula_level(b, levels))
        case ("imp", a, b):
            return max(formula_level(a, levels) + 1, formula_level(b, levels))
        case (tag, _, abs_) if tag in QUANT_TAGS:
            return formula_level(abs_.body, levels)
        case ("atom", Const(name, _), _):
            return levels.get(name, 0)
        case _:
            return 0


def _imp_count(t: Term) -> int:
    match t:
        case Const("=>", _):
            return 1
        case App(fn, arg):
            return _imp_count(fn) + _imp_count(arg)
        case Lam(_, body, _):
            return _imp_count(body)
        case _:
            return 0


def infer_levels(defs: dict[str, Definition]) -> dict[str, Definition]:
    """Least consistent level assignment, or StratificationError."""
    levels = {p: d.level for p, d in defs.items()}
    cap = sum(_imp_count(cl.body) for d in defs.values()
              for cl in d.clauses) + max(levels.values(), default=0)
    while True:
        changed = False
        for p, d in defs.items():
            m = levels[p]
            for cl in d.clauses:
                m = max(m, formula_level(cl.body, levels))
            if m != levels[p]:
                levels[p] = m
                changed = True
        if not changed:
            break
        bad = sorted(p for p, lv in levels.items() if lv > cap)
        if bad:
            raise StratificationError(
                f"definition of {', '.join(bad)} is not stratified: "
                f"the predicate occurs to the left of an implication "
                f"in its own unfolding")
    return {p: replace(d, level=levels[p]) for p, d in defs.items()}


# ---------------------------------------------------------------------------
# raising
# ---------------------------------------------------------------------------

def _raise_vars(vs, cbar, avoid):
    sigma: dict[str, Term] = {}
    new_vars: list[Var] = []
    for v in vs:
        nv, image = raise_over(v.name, v.ty, cbar, avoid)
        avoid.add(nv.name)
        sigma[v.name] = image
        new_vars.append(nv)
    return new_vars, sigma


def raise_sequent(seq: Sequent, cbar) -> tuple[Sequent, dict[str, Term]]:
    """Raise every eigenvariable over the nominals cbar."""
    if not cbar:
        return seq, {}
    avoid = set(seq.var_names())
    new_vars, sigma = _raise_vars(seq.vars, list(cbar), avoid)
    hyps = tuple((n, apply_subst(sigma, f)) for n, f in seq.hyps)
    return Sequent(tuple(new_vars), hyps, apply_subst(sigma, seq.goal)), sigma


def raise_clause(cl: Clause, abar, avoid: set[str]) -> Clause:
    """Freshen the clause's universal variables, raised over the nominals abar."""
    avoid = set(avoid) | {z.name for z in cl.zvars} | {v.name for v in cl.uvars}
    new_uvars, sigma = _raise_vars(cl.uvars, list(abar), avoid)
    return replace(cl, uvars=tuple(new_uvars),
                   head=apply_subst(sigma, cl.head),
                   body=apply_subst(sigma, cl.body))


# ---------------------------------------------------------------------------
# equality modulo a permutation of nominal constants
# ---------------------------------------------------------------------------

def eq_mod_perm(s: Term, t: Term) -> Permutation | None:
    """A permutation pi with pi.s = t, if one exists."""
    s = normalize(s)
    t = normalize(t)
    if s == t:
        return Permutation.identity()
    if supp(s) == supp(t) == frozenset():
        return None
    for pi in all_permutations_of(sorted(supp(s) | supp(t),
                                         key=lambda c: (repr(c.ty), c.index))):
        if pi.is_identity():
            continue
        if permute(pi, s) == t:
            return pi
    return None
