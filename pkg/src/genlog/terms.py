"""Simply typed lambda-terms over three kinds of atoms.

Terms distinguish global constants, nominal constants, and eigenvariables
(named free variables).  Bound variables are de Bruijn indices, so
alpha-equivalence is structural equality.  Every operation that builds a
term returns it in beta-normal, eta-short form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

__all__ = [
    "SimpleType", "Base", "Arrow", "OTY", "NT",
    "Term", "Const", "Nominal", "Var", "Bound", "Lam", "App",
    "arrow", "arg_types", "target_type",
    "mk_app", "mk_lam", "spine", "normalize", "instantiate",
    "apply_subst", "free_vars", "supp", "supp_list", "nominals_of",
    "Permutation", "permute", "type_of", "TypeError_",
    "fresh_nominal", "fresh_nominals", "fresh_name", "raise_over",
    "NOMINAL_RE",
]

# lexical class reserved for nominal constants; generated variable names
# stay out of it so that displays and scripts never confuse the two
NOMINAL_RE = re.compile(r"n[0-9]+")


# ---------------------------------------------------------------- types

class SimpleType:
    """Base sorts and arrows; o is the sort of formulas, nt of naturals."""
    __slots__ = ()


@dataclass(frozen=True)
class Base(SimpleType):
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow(SimpleType):
    left: SimpleType
    right: SimpleType

    def __repr__(self) -> str:
        l = f"({self.left!r})" if isinstance(self.left, Arrow) else repr(self.left)
        return f"{l} -> {self.right!r}"


OTY = Base("o")
NT = Base("nt")


def arrow(*tys: SimpleType) -> SimpleType:
    """arrow(a, b, c) is a -> b -> c (right associated)."""
    out = tys[-1]
    for ty in reversed(tys[:-1]):
        out = Arrow(ty, out)
    return out


def arg_types(ty: SimpleType) -> list[SimpleType]:
    out = []
    while isinstance(ty, Arrow):
        out.append(ty.left)
        ty = ty.right
    return out


def target_type(ty: SimpleType) -> SimpleType:
    while isinstance(ty, Arrow):
        ty = ty.right
    return ty


def type_contains_o(ty: SimpleType) -> bool:
    if isinstance(ty, Arrow):
        return type_contains_o(ty.left) or type_contains_o(ty.right)
    return ty == OTY


# ---------------------------------------------------------------- terms

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    """Global constant; logical and user-declared constants live here."""
    name: str
    ty: SimpleType

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Nominal(Term):
    """Nominal constant; each type has its own infinite supply n1, n2, ..."""
    index: int
    ty: SimpleType

    def __repr__(self) -> str:
        return f"n{self.index}"


@dataclass(frozen=True)
class Var(Term):
    """Eigenvariable: a named free variable listed in a sequent signature."""
    name: str
    ty: SimpleType

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Bound(Term):
    """de Bruijn index referring to an enclosing Lam."""
    index: int

    def __repr__(self) -> str:
        return f"#{self.index}"


@dataclass(frozen=True)
class Lam(Term):
    arg_ty: SimpleType
    body: Term
    hint: str = field(default="x", compare=False, hash=False)

    def __repr__(self) -> str:
        return f"(\\{self.hint}. {self.body!r})"


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term

    def __repr__(self) -> str:
        return f"({self.fn!r} {self.arg!r})"


def mk_app(head: Term, *args: Term) -> Term:
    out = head
    for a in args:
        out = App(out, a)
    return out


def mk_lam(tys: list[SimpleType], body: Term, hints: list[str] | None = None) -> Term:
    out = body
    for i, ty in enumerate(reversed(tys)):
        hint = hints[len(tys) - 1 - i] if hints else "x"
        out = Lam(ty, out, hint)
    return out


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split nested applications into head and argument list."""
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


# ------------------------------------------------------- normalization

def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    match t:
        case Bound(k):
            return Bound(k + by) if k >= cutoff else t
        case App(f, a):
            return App(shift(f, by, cutoff), shift(a, by, cutoff))
        case Lam(ty, b, h):
            return Lam(ty, shift(b, by, cutoff + 1), h)
        case _:
            return t


def _subst_bound(t: Term, arg: Term, depth: int = 0) -> Term:
    match t:
        case Bound(k):
            if k == depth:
                return shift(arg, depth)
            return Bound(k - 1) if k > depth else t
        case App(f, a):
            return App(_subst_bound(f, arg, depth), _subst_bound(a, arg, depth))
        case Lam(ty, b, h):
            return Lam(ty, _subst_bound(b, arg, depth + 1), h)
        case _:
            return t


def _bound_free_in(t: Term, idx: int) -> bool:
    match t:
        case Bound(k):
            return k == idx
        case App(f, a):
            return _bound_free_in(f, idx) or _bound_free_in(a, idx)
        case Lam(_, b):
            return _bound_free_in(b, idx + 1)
        case _:
            return False


@lru_cache(maxsize=200_000)
def normalize(t: Term) -> Term:
    """Beta-normal, eta-short form."""
    match t:
        case App(f, a):
            fn = normalize(f)
            if isinstance(fn, Lam):
                return normalize(_subst_bound(fn.body, a))
            return App(fn, normalize(a))
        case Lam(ty, b, h):
            body = normalize(b)
            # eta: \x. f x  ==>  f   when x is not free in f
            if isinstance(body, App) and body.arg == Bound(0) \
                    and not _bound_free_in(body.fn, 0):
                return shift(body.fn, -1)
            return Lam(ty, body, h)
        case _:
            return t


def instantiate(abstraction: Term, *args: Term) -> Term:
    """Apply an abstraction to arguments and normalize."""
    return normalize(mk_app(abstraction, *args))


# ------------------------------------------------------- substitution

def apply_subst(theta: dict[str, Term], t: Term) -> Term:
    """Replace eigenvariables by name and renormalize.

    Replacement terms must be standalone (no dangling de Bruijn indices),
    so no shifting is needed when descending under binders.
    """
    if not theta:
        return normalize(t)
    return normalize(_replace(theta, t))


def _replace(theta: dict[str, Term], t: Term) -> Term:
    match t:
        case Var(name, _):
            return theta.get(name, t)
        case App(f, a):
            return App(_replace(theta, f), _replace(theta, a))
        case Lam(ty, b, h):
            return Lam(ty, _replace(theta, b), h)
        case _:
            return t


def free_vars(t: Term) -> set[str]:
    out: set[str] = set()
    _collect_vars(t, out)
    return out


def _collect_vars(t: Term, out: set[str]) -> None:
    match t:
        case Var(name, _):
            out.add(name)
        case App(f, a):
            _collect_vars(f, out)
            _collect_vars(a, out)
        case Lam(_, b):
            _collect_vars(b, out)


# ------------------------------------------------------------- support

def supp(t: Term) -> frozenset[Nominal]:
    """Nominal constants occurring in the normal form of t."""
    return frozenset(supp_list(t))


def supp_list(t: Term) -> list[Nominal]:
    """Support in left-to-right first-occurrence order."""
    out: list[Nominal] = []
    _collect_nominals(normalize(t), out)
    return out


def nominals_of(t: Term) -> list[Nominal]:
    """Nominals of t as written, without normalizing first."""
    out: list[Nominal] = []
    _collect_nominals(t, out)
    return out


def _collect_nominals(t: Term, out: list[Nominal]) -> None:
    match t:
        case Nominal():
            if t not in out:
                out.append(t)
        case App(f, a):
            _collect_nominals(f, out)
            _collect_nominals(a, out)
        case Lam(_, b):
            _collect_nominals(b, out)


# -------------------------------------------------------- permutations

@dataclass(frozen=True)
class Permutation:
    """Finite type-preserving bijection on nominal constants."""
    mapping: tuple[tuple[Nominal, Nominal], ...]

    @staticmethod
    def of(pairs: dict[Nominal, Nominal]) -> Permutation:
        items = tuple(sorted(((a, b) for a, b in pairs.items() if a != b),
                             key=lambda ab: (repr(ab[0].ty), ab[0].index)))
        p = Permutation(items)
        p.validate()
        return p

    @staticmethod
    def identity() -> Permutation:
        return Permutation(())

    def validate(self) -> None:
        dom = [a for a, _ in self.mapping]
        rng = [b for _, b in self.mapping]
        if len(set(dom)) != len(dom) or len(set(rng)) != len(rng):
            raise ValueError("permutation is not a bijection")
        if set(dom) != set(rng):
            raise ValueError("permutation must map its domain onto itself")
        for a, b in self.mapping:
            if a.ty != b.ty:
                raise ValueError("permutation must preserve types")

    def __call__(self, c: Nominal) -> Nominal:
        for a, b in self.mapping:
            if a == c:
                return b
        return c

    def inverse(self) -> Permutation:
        return Permutation.of({b: a for a, b in self.mapping})

    def compose(self, other: Permutation) -> Permutation:
        """self after other."""
        dom = {a for a, _ in self.mapping} | {a for a, _ in other.mapping}
        return Permutation.of({a: self(other(a)) for a in dom})

    def is_identity(self) -> bool:
        return not self.mapping

    def __repr__(self) -> str:
        if not self.mapping:
            return "(id)"
        return "(" + ", ".join(f"{a!r}->{b!r}" for a, b in self.mapping) + ")"


def permute(pi: Permutation, t: Term) -> Term:
    """Homomorphic extension of pi to terms."""
    if pi.is_identity():
        return t
    return _permute(pi, t)


def _permute(pi: Permutation, t: Term) -> Term:
    match t:
        case Nominal():
            return pi(t)
        case App(f, a):
            return App(_permute(pi, f), _permute(pi, a))
        case Lam(ty, b, h):
            return Lam(ty, _permute(pi, b), h)
        case _:
            return t


# --------------------------------------------------------------- typing

class TypeError_(Exception):
    pass


def type_of(t: Term, env: tuple[SimpleType, ...] = ()) -> SimpleType:
    """Type of t; env lists binder types innermost first."""
    match t:
        case Const(_, ty) | Nominal(_, ty) | Var(_, ty):
            return ty
        case Bound(k):
            if k >= len(env):
                raise TypeError_(f"dangling index {k}")
            return env[k]
        case Lam(ty, b, _):
            return Arrow(ty, type_of(b, (ty,) + env))
        case App(f, a):
            fty = type_of(f, env)
            if not isinstance(fty, Arrow):
                raise TypeError_(f"applying non-function {f!r}")
            aty = type_of(a, env)
            if fty.left != aty:
                raise TypeError_(
                    f"argument type mismatch: {a!r} : {aty!r}, expected {fty.left!r}")
            return fty.right
    raise TypeError_(f"unknown term {t!r}")


# ------------------------------------------------------------ freshness

def fresh_nominal(ty: SimpleType, avoid: frozenset[Nominal] | set[Nominal]) -> Nominal:
    """Least-index nominal of the given type not in avoid."""
    taken = {c.index for c in avoid if c.ty == ty}
    i = 1
    while i in taken:
        i += 1
    return Nominal(i, ty)


def fresh_nominals(tys: list[SimpleType], avoid: set[Nominal]) -> list[Nominal]:
    out: list[Nominal] = []
    pool = set(avoid)
    for ty in tys:
        c = fresh_nominal(ty, pool)
        pool.add(c)
        out.append(c)
    return out


def fresh_name(base: str, avoid: set[str]) -> str:
    base = base.rstrip("0123456789") or "h"
    if base not in avoid:
        return base
    if NOMINAL_RE.fullmatch(f"{base}1"):
        # numbered forms of this base would look like nominal constants
        base += "'"
        if base not in avoid:
            return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def raise_over(name: str, ty: SimpleType, cbar: list[Nominal],
               avoid: set[str]) -> tuple[Var, Term]:
    """New variable h' with h' c1 ... cn standing for the raised h."""
    hty = arrow(*[c.ty for c in cbar], ty)
    h = Var(fresh_name(name, avoid), hty)
    return h, mk_app(h, *cbar)


def abstract_over(t: Term, v: Var, hint: str | None = None) -> Lam:
    """The abstraction \\v. t, capturing occurrences of the eigenvariable v."""
    def go(u: Term, depth: int) -> Term:
        match u:
            case Var() if u == v:
                return Bound(depth)
            case Lam(ty, body, h):
                return Lam(ty, go(body, depth + 1), h)
            case App(fn, arg):
                return App(go(fn, depth), go(arg, depth))
            case _:
                return u
    return Lam(v.ty, go(normalize(t), 0), hint or v.name)


def var_terms(t: Term) -> frozenset[Var]:
    """All eigenvariables occurring in t, with their types."""
    out: set[Var] = set()

    def go(u: Term) -> None:
        match u:
            case Var():
                out.add(u)
            case Lam(_, body, _):
                go(body)
            case App(fn, arg):
                go(fn)
                go(arg)
            case _:
                pass
    go(t)
    return frozenset(out)


def var_terms_ordered(t: Term) -> list[Var]:
    """Eigenvariables of t in first-occurrence order."""
    out: list[Var] = []
    seen: set[str] = set()

    def go(u: Term) -> None:
        match u:
            case Var():
                if u.name not in seen:
                    seen.add(u.name)
                    out.append(u)
            case Lam(_, body, _):
                go(body)
            case App(fn, arg):
                go(fn)
                go(arg)
            case _:
                pass
    go(t)
    return out
