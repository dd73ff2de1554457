"""Higher-order pattern unification with nominal constants.

A term is flexible when its head is an eigenvariable open to instantiation.
Flexible heads must be applied to distinct bound variables or distinct
nominal constants (the pattern fragment); such problems have a single most
general unifier when solvable.  With forbid_nominals set, no instantiation
may mention a nominal constant, so nominals behave exactly like extra
binders of the unification problem.
"""

from __future__ import annotations

import itertools

from .terms import (
    App, Bound, Lam, Nominal, Permutation, Term, Var,
    apply_subst, arg_types, arrow, free_vars, mk_app, mk_lam, nominals_of,
    normalize, permute, shift, spine, fresh_name,
)

__all__ = [
    "UnifyError", "NonPattern", "Clash", "OccursCheck", "NominalEscape",
    "pattern_unify", "perm_unifiers", "all_permutations_of",
]


class UnifyError(Exception):
    """No unifier within the implemented fragment."""

    def __init__(self, msg: str, s: Term | None = None, t: Term | None = None):
        super().__init__(msg)
        self.s = s
        self.t = t


class NonPattern(UnifyError):
    """A flexible head is applied to non-pattern arguments."""


class Clash(UnifyError):
    """Rigid heads differ, or a rigid atom escapes its scope."""


class OccursCheck(UnifyError):
    """A variable would occur in its own instantiation."""


class NominalEscape(UnifyError):
    """A solution would place a nominal constant in the substitution range."""


class _Unifier:
    def __init__(self, open_vars: set[str], avoid: set[str], forbid: bool):
        self.theta: dict[str, Term] = {}
        self.open = set(open_vars)
        self.avoid = set(avoid) | set(open_vars)
        self.forbid = forbid

    # ------------------------------------------------------------ api

    def unify(self, s: Term, t: Term) -> None:
        self._eq(self._resolve(s), self._resolve(t))

    def result(self) -> dict[str, Term]:
        return dict(self.theta)

    # ------------------------------------------------------ machinery

    def _resolve(self, t: Term) -> Term:
        return apply_subst(self.theta, t)

    def _is_flex(self, h: Term) -> bool:
        return isinstance(h, Var) and h.name in self.open

    def _eq(self, s: Term, t: Term) -> None:
        if s == t:
            return
        if isinstance(s, Lam) and isinstance(t, Lam):
            self._eq(s.body, t.body)
            return
        # extensionality at function type: eta-expand the bare side
        if isinstance(s, Lam):
            self._eq(s.body, normalize(App(shift(t, 1), Bound(0))))
            return
        if isinstance(t, Lam):
            self._eq(normalize(App(shift(s, 1), Bound(0))), t.body)
            return
        hs, sargs = spine(s)
        ht, targs = spine(t)
        # a head may have been instantiated by a sibling equation
        if isinstance(hs, Var) and hs.name in self.theta:
            self._eq(self._resolve(s), self._resolve(t))
            return
        if isinstance(ht, Var) and ht.name in self.theta:
            self._eq(self._resolve(s), self._resolve(t))
            return
        sflex = self._is_flex(hs)
        tflex = self._is_flex(ht)
        if sflex and tflex:
            if hs == ht:
                self._flex_same(hs, sargs, targs)
            else:
                self._flex_flex(hs, sargs, ht, targs)
        elif sflex:
            self._flex_rigid(hs, sargs, t)
        elif tflex:
            self._flex_rigid(ht, targs, s)
        else:
            if hs != ht or len(sargs) != len(targs):
                raise Clash(f"cannot unify {s!r} with {t!r}", s, t)
            for a, b in zip(sargs, targs):
                self._eq(self._resolve(a), self._resolve(b))

    # ------------------------------------------------- flex cases

    def _pattern_args(self, h: Var, args: list[Term]) -> list[Term]:
        seen: list[Term] = []
        for a in args:
            if not isinstance(a, (Bound, Nominal)) or a in seen:
                raise NonPattern(
                    f"{h.name} is applied to non-pattern arguments", mk_app(h, *args))
            seen.append(a)
        return seen

    def _fresh_var(self, base: str, ty) -> Var:
        name = fresh_name(base, self.avoid)
        self.avoid.add(name)
        self.open.add(name)
        return Var(name, ty)

    def _bind(self, v: Var, value: Term) -> None:
        value = self._resolve(value)
        if v.name in free_vars(value):
            raise OccursCheck(f"{v.name} occurs in its own instantiation", v, value)
        if self.forbid and nominals_of(value):
            raise NominalEscape(
                f"instantiation of {v.name} would capture a nominal constant",
                v, value)
        single = {v.name: value}
        self.theta = {k: apply_subst(single, r) for k, r in self.theta.items()}
        self.theta[v.name] = value

    def _flex_rigid(self, h: Var, args: list[Term], t: Term) -> None:
        patt = self._pattern_args(h, args)
        body = self._invert(h, patt, t, 0)
        self._bind(h, mk_lam(arg_types(h.ty)[:len(patt)], body))

    def _flex_same(self, h: Var, args1: list[Term], args2: list[Term]) -> None:
        patt1 = self._pattern_args(h, args1)
        patt2 = self._pattern_args(h, args2)
        n = len(patt1)
        tys = arg_types(h.ty)[:n]
        keep = [j for j in range(n) if patt1[j] == patt2[j]]
        hn = self._fresh_var(h.name, _restricted_ty(h.ty, n, keep))
        body = mk_app(hn, *[Bound(n - 1 - j) for j in keep])
        self._bind(h, mk_lam(tys, body))

    def _flex_flex(self, h1: Var, args1: list[Term], h2: Var,
                   args2: list[Term]) -> None:
        patt1 = self._pattern_args(h1, args1)
        patt2 = self._pattern_args(h2, args2)
        if patt1 == patt2:
            # identical argument lists: keep the left head, so that the
            # variables of a sequent survive unification by name
            n = len(patt2)
            self._bind(h2, mk_lam(arg_types(h2.ty)[:n],
                                  mk_app(h1, *[Bound(n - 1 - k)
                                               for k in range(n)])))
            return
        common = [(j, patt2.index(a)) for j, a in enumerate(patt1) if a in patt2]
        n1, n2 = len(patt1), len(patt2)
        keep1 = [j for j, _ in common]
        z = self._fresh_var(h1.name, _restricted_ty(h1.ty, n1, keep1))
        self._bind(h1, mk_lam(arg_types(h1.ty)[:n1],
                              mk_app(z, *[Bound(n1 - 1 - j) for j, _ in common])))
        self._bind(h2, mk_lam(arg_types(h2.ty)[:n2],
                              mk_app(z, *[Bound(n2 - 1 - k) for _, k in common])))

    # ------------------------------------------------- inversion

    def _invert(self, h: Var, patt: list[Term], t: Term, depth: int) -> Term:
        """Rewrite t as a body for \\patt. _, pruning flexible subterms."""
        n = len(patt)
        match t:
            case Lam(ty, b, hint):
                return Lam(ty, self._invert(h, patt, b, depth + 1), hint)
            case Bound(k):
                if k < depth:
                    return t
                outer = Bound(k - depth)
                if outer in patt:
                    return Bound(depth + n - 1 - patt.index(outer))
                raise Clash(f"bound variable escapes instantiation of {h.name}", t)
            case Nominal():
                if t in patt:
                    return Bound(depth + n - 1 - patt.index(t))
                if self.forbid:
                    raise NominalEscape(
                        f"nominal {t!r} escapes instantiation of {h.name}", t)
                return t
            case Var(name, _):
                if name == h.name:
                    raise OccursCheck(f"{h.name} occurs in its own instantiation", t)
                if name in self.theta:
                    return self._invert(h, patt, self._resolve(t), depth)
                if name in self.open:
                    return self._prune(h, patt, t, [], depth)
                return t
            case App():
                head, args = spine(t)
                if isinstance(head, Var):
                    if head.name == h.name:
                        raise OccursCheck(
                            f"{h.name} occurs in its own instantiation", t)
                    if head.name in self.theta:
                        return self._invert(h, patt, self._resolve(t), depth)
                    if head.name in self.open:
                        return self._prune(h, patt, head, args, depth)
                inv_head = self._invert(h, patt, head, depth)
                return mk_app(inv_head,
                              *[self._invert(h, patt, a, depth) for a in args])
            case _:
                return t

    def _prune(self, h: Var, patt: list[Term], y: Var, yargs: list[Term],
               depth: int) -> Term:
        """Restrict flexible subterm y(yargs) to arguments h may depend on."""
        ypatt = self._pattern_args(y, [normalize(a) for a in yargs])
        n = len(patt)
        keep: list[int] = []
        images: list[Term] = []
        for j, a in enumerate(ypatt):
            if isinstance(a, Bound):
                if a.index < depth:
                    keep.append(j)
                    images.append(a)
                    continue
                outer = Bound(a.index - depth)
                if outer in patt:
                    keep.append(j)
                    images.append(Bound(depth + n - 1 - patt.index(outer)))
                continue
            if a in patt:
                keep.append(j)
                images.append(Bound(depth + n - 1 - patt.index(a)))
            elif not self.forbid:
                keep.append(j)
                images.append(a)
        if len(keep) == len(ypatt):
            return mk_app(y, *images)
        m = len(ypatt)
        yn = self._fresh_var(y.name, _restricted_ty(y.ty, m, keep))
        self._bind(y, mk_lam(arg_types(y.ty)[:m],
                             mk_app(yn, *[Bound(m - 1 - j) for j in keep])))
        return mk_app(yn, *images)


def _restricted_ty(ty, n: int, keep: list[int]):
    tys = arg_types(ty)
    target = ty
    for _ in range(n):
        target = target.right
    kept = [tys[j] for j in keep]
    return arrow(*kept, target) if kept else target


# ----------------------------------------------------------------- api

def pattern_unify(eqs: list[tuple[Term, Term]], open_vars: set[str],
                  avoid: set[str] = frozenset(),
                  forbid_nominals: bool = True) -> dict[str, Term]:
    """Most general unifier of the equations, instantiating only open_vars.

    Eigenvariables outside open_vars are rigid, which makes this double as
    matching when one side's variables are all closed.  Raises a UnifyError
    subclass when no unifier exists in the pattern fragment.
    """
    u = _Unifier(open_vars, set(avoid), forbid_nominals)
    for s, t in eqs:
        u.unify(s, t)
    return u.result()


def all_permutations_of(noms: list[Nominal]) -> list[Permutation]:
    """Every type-preserving permutation of the given nominals, identity first."""
    by_ty: dict[str, list[Nominal]] = {}
    for c in sorted(set(noms), key=lambda c: (repr(c.ty), c.index)):
        by_ty.setdefault(repr(c.ty), []).append(c)
    groups = [list(itertools.permutations(g)) for g in by_ty.values()]
    out = []
    for combo in itertools.product(*groups):
        mapping = {}
        for base, image in zip(by_ty.values(), combo):
            mapping.update(zip(base, image))
        out.append(Permutation.of(mapping))
    return out


def perm_unifiers(a: Term, h: Term, movable: list[Nominal],
                  open_vars: set[str], avoid: set[str] = frozenset(),
                  forbid_nominals: bool = True) -> list[tuple[Permutation, dict[str, Term]]]:
    """All (pi, theta) with (pi.h) theta = a theta, pi ranging over movable.

    Examines every permutation of the movable nominals in a deterministic
    order with the identity first.  NonPattern propagates: a problem
    outside the decidable fragment must not be mistaken for a failure.
    """
    out = []
    for pi in all_permutations_of(movable):
        try:
            theta = pattern_unify([(a, permute(pi, h))], open_vars, avoid,
                                  forbid_nominals)
        except NonPattern:
            raise
        except UnifyError:
            continue
        out.append((pi, theta))
    return out
