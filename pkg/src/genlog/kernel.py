"""The trusted rule engine.

Every inference step is a checked transformation of an immutable
ProofState; nothing else in the system may change a proof's obligations.
Completed proofs carry a trace of rule applications that replays
deterministically to the same final state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .terms import (
    App, Bound, Const, Lam, Nominal, Term, TypeError_, Var,
    NT, OTY,
    apply_subst, arg_types, arrow, free_vars, fresh_name, fresh_nominal,
    fresh_nominals, instantiate, mk_app, mk_lam, normalize, permute,
    spine, supp, supp_list, type_contains_o, type_of, var_terms_ordered,
)
from .logic import (
    Clause, DefError, Sequent,
    NAT, S, TT, Z,
    atom_pred, check_restriction, eq_const, eq_mod_perm, raise_clause,
    raise_sequent, view,
)
from .unify import NonPattern, all_permutations_of, perm_unifiers
from .pretty import pp_term

__all__ = [
    "KernelError", "NoPermutation", "NoMatch", "RuleApp", "ProofState",
    "initial_state", "replay",
    "apply_id", "apply_cut", "tt_r", "ff_l", "and_l", "and_r", "or_l",
    "or_r", "imp_l", "imp_r", "all_l", "all_r", "exists_l", "exists_r",
    "nabla_l", "nabla_r", "contract", "def_l", "def_r", "nat_l", "nat_r",
    "use_lemma", "focus",
]


class KernelError(Exception):
    """A rule was applied outside its preconditions."""


class NoPermutation(KernelError):
    """No permutation of nominal constants equates hypothesis and goal."""


class NoMatch(KernelError):
    """No definitional clause matches the goal atom."""


@dataclass(frozen=True)
class RuleApp:
    """One rule application: args replay it, info records derived choices."""

    rule: str
    goal: int
    args: tuple = ()
    info: tuple = ()


@dataclass(frozen=True)
class ProofState:
    defs: dict
    lemmas: tuple
    goals: tuple
    trace: tuple = ()
    next_id: int = 1

    def done(self) -> bool:
        return not self.goals

    def goal_ids(self) -> list[int]:
        return [gid for gid, _ in self.goals]

    def goal(self, gid: int) -> Sequent:
        for g, seq in self.goals:
            if g == gid:
                return seq
        raise KernelError(f"no open subgoal {gid}")

    def lemma(self, name: str) -> Term:
        for n, f in self.lemmas:
            if n == name:
                return f
        raise KernelError(f"no lemma named {name}")


def initial_state(defs: dict, lemmas, formula: Term) -> ProofState:
    formula = normalize(formula)
    if free_vars(formula):
        raise KernelError(
            f"theorem statement has free variables {sorted(free_vars(formula))}")
    if type_of(formula) != OTY:
        raise KernelError("theorem statement is not a formula")
    try:
        check_restriction(formula)
    except DefError as e:
        raise KernelError(str(e)) from None
    seq = Sequent((), (), formula)
    return ProofState(defs, tuple(lemmas), ((0, seq),), (), 1)


def _step(state: ProofState, gid: int, premises, ra: RuleApp) -> ProofState:
    out = []
    nid = state.next_id
    for g, seq in state.goals:
        if g != gid:
            out.append((g, seq))
            continue
        for p in premises:
            out.append((nid, p))
            nid += 1
    return replace(state, goals=tuple(out), trace=state.trace + (ra,),
                   next_id=nid)


def _napp(f: Term, *args: Term) -> Term:
    out = f
    for a in args:
        out = App(out, a)
    return normalize(out)


def _check_witness(seq: Sequent, t: Term, ty) -> Term:
    t = normalize(t)
    try:
        actual = type_of(t)
    except TypeError_ as e:
        raise KernelError(f"ill-typed witness {pp_term(t)}: {e}")
    if actual != ty:
        raise KernelError(f"witness {pp_term(t)} has type {actual}, expected {ty}")
    if type_contains_o(ty):
        raise KernelError(f"cannot quantify over type {ty} containing o")
    stray = free_vars(t) - seq.var_names()
    if stray:
        raise KernelError(f"witness {pp_term(t)} mentions unknown variables {sorted(stray)}")
    return t


def _close_signature(seq: Sequent) -> Sequent:
    have = seq.var_names()
    extra = []
    for f in [f for _, f in seq.hyps] + [seq.goal]:
        for v in var_terms_ordered(f):
            if v.name not in have:
                have.add(v.name)
                extra.append(v)
    return seq.add_vars(extra) if extra else seq


# ---------------------------------------------------------------------------
# Fig. 1: core rules
# ---------------------------------------------------------------------------

def apply_id(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    pi = eq_mod_perm(seq.hyp(hyp), seq.goal)
    if pi is None:
        raise NoPermutation(
            f"hypothesis {hyp} does not match the goal under any permutation")
    return _step(state, gid, [], RuleApp("id", gid, (hyp,), (pi,)))


def apply_cut(state: ProofState, gid: int, formula: Term) -> ProofState:
    seq = state.goal(gid)
    formula = normalize(formula)
    try:
        if type_of(formula) != OTY:
            raise KernelError(f"cut formula {pp_term(formula)} is not of type o")
    except TypeError_ as e:
        raise KernelError(f"ill-typed cut formula: {e}")
    try:
        check_restriction(formula)
    except DefError as e:
        raise KernelError(str(e)) from None
    stray = free_vars(formula) - seq.var_names()
    if stray:
        raise KernelError(f"cut formula mentions unknown variables {sorted(stray)}")
    left = seq.with_goal(formula)
    right, names = seq.add_hyps([formula])
    return _step(state, gid, [left, right],
                 RuleApp("cut", gid, (formula,), (names[0],)))


def tt_r(state: ProofState, gid: int) -> ProofState:
    seq = state.goal(gid)
    if view(seq.goal) != ("tt",):
        raise KernelError("goal is not tt")
    return _step(state, gid, [], RuleApp("tt_r", gid))


def ff_l(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    if view(seq.hyp(hyp)) != ("ff",):
        raise KernelError(f"hypothesis {hyp} is not ff")
    return _step(state, gid, [], RuleApp("ff_l", gid, (hyp,)))


def and_l(state: ProofState, gid: int, hyp: str, side: int) -> ProofState:
    seq = state.goal(gid)
    match view(seq.hyp(hyp)), side:
        case ("and", a, _), 0:
            keep = a
        case ("and", _, b), 1:
            keep = b
        case ("and", *_), _:
            raise KernelError("side must be 0 or 1")
        case _:
            raise KernelError(f"hypothesis {hyp} is not a conjunction")
    return _step(state, gid, [seq.replace_hyp(hyp, keep)],
                 RuleApp("and_l", gid, (hyp, side)))


def and_r(state: ProofState, gid: int) -> ProofState:
    seq = state.goal(gid)
    match view(seq.goal):
        case ("and", a, b):
            return _step(state, gid, [seq.with_goal(a), seq.with_goal(b)],
                         RuleApp("and_r", gid))
    raise KernelError("goal is not a conjunction")


def or_l(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    match view(seq.hyp(hyp)):
        case ("or", a, b):
            return _step(state, gid,
                         [seq.replace_hyp(hyp, a), seq.replace_hyp(hyp, b)],
                         RuleApp("or_l", gid, (hyp,)))
    raise KernelError(f"hypothesis {hyp} is not a disjunction")


def or_r(state: ProofState, gid: int, side: int) -> ProofState:
    seq = state.goal(gid)
    match view(seq.goal), side:
        case ("or", a, _), 0:
            goal = a
        case ("or", _, b), 1:
            goal = b
        case ("or", *_), _:
            raise KernelError("side must be 0 or 1")
        case _:
            raise KernelError("goal is not a disjunction")
    return _step(state, gid, [seq.with_goal(goal)], RuleApp("or_r", gid, (side,)))


def imp_l(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    match view(seq.hyp(hyp)):
        case ("imp", a, b):
            left = seq.with_goal(a)
            right = seq.replace_hyp(hyp, b)
            return _step(state, gid, [left, right], RuleApp("imp_l", gid, (hyp,)))
    raise KernelError(f"hypothesis {hyp} is not an implication")


def imp_r(state: ProofState, gid: int) -> ProofState:
    seq = state.goal(gid)
    match view(seq.goal):
        case ("imp", a, b):
            s2, names = seq.add_hyps([a])
            return _step(state, gid, [s2.with_goal(b)],
                         RuleApp("imp_r", gid, (), (names[0],)))
    raise KernelError("goal is not an implication")


def all_l(state: ProofState, gid: int, hyp: str, witness: Term) -> ProofState:
    seq = state.goal(gid)
    match view(seq.hyp(hyp)):
        case ("forall", ty, abs_):
            t = _check_witness(seq, witness, ty)
            return _step(state, gid,
                         [seq.replace_hyp(hyp, instantiate(abs_, t))],
                         RuleApp("all_l", gid, (hyp, t)))
    raise KernelError(f"hypothesis {hyp} is not universally quantified")


def exists_r(state: ProofState, gid: int, witness: Term) -> ProofState:
    seq = state.goal(gid)
    match view(seq.goal):
        case ("exists", ty, abs_):
            t = _check_witness(seq, witness, ty)
            return _step(state, gid, [seq.with_goal(instantiate(abs_, t))],
                         RuleApp("exists_r", gid, (t,)))
    raise KernelError("goal is not existentially quantified")


def _raised_var(seq: Sequent, ty, abs_: Lam):
    """Fresh eigenvariable raised over the support of the abstraction."""
    cbar = supp_list(abs_)
    h = Var(fresh_name(abs_.hint, seq.var_names()),
            arrow(*[c.ty for c in cbar], ty))
    return h, mk_app(h, *cbar), cbar


def all_r(state: ProofState, gid: int) -> ProofState:
    seq = state.goal(gid)
    match view(seq.goal):
        case ("forall", ty, abs_):
            h, ht, cbar = _raised_var(seq, ty, abs_)
            s2 = seq.add_vars([h]).with_goal(instantiate(abs_, ht))
            return _step(state, gid, [s2],
                         RuleApp("all_r", gid, (), (h.name, tuple(cbar))))
    raise KernelError("goal is not universally quantified")


def exists_l(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    match view(seq.hyp(hyp)):
        case ("exists", ty, abs_):
            h, ht, cbar = _raised_var(seq, ty, abs_)
            s2 = seq.add_vars([h]).replace_hyp(hyp, instantiate(abs_, ht))
            return _step(state, gid, [s2],
                         RuleApp("exists_l", gid, (hyp,), (h.name, tuple(cbar))))
    raise KernelError(f"hypothesis {hyp} is not existentially quantified")


def _pick_nominal(seq: Sequent, ty, abs_: Lam, nominal: Nominal | None) -> Nominal:
    if nominal is None:
        return fresh_nominal(ty, seq.supp())
    if not isinstance(nominal, Nominal) or nominal.ty != ty:
        raise KernelError(f"{pp_term(nominal)} is not a nominal constant of type {ty}")
    if nominal in supp(abs_):
        raise KernelError(f"nominal {pp_term(nominal)} already occurs in the body")
    return nominal


def nabla_r(state: ProofState, gid: int, nominal: Nominal | None = None) -> ProofState:
    seq = state.goal(gid)
    match view(seq.goal):
        case ("nabla", ty, abs_):
            a = _pick_nominal(seq, ty, abs_, nominal)
            return _step(state, gid, [seq.with_goal(instantiate(abs_, a))],
                         RuleApp("nabla_r", gid, (a,)))
    raise KernelError("goal is not nabla quantified")


def nabla_l(state: ProofState, gid: int, hyp: str,
            nominal: Nominal | None = None) -> ProofState:
    seq = state.goal(gid)
    match view(seq.hyp(hyp)):
        case ("nabla", ty, abs_):
            a = _pick_nominal(seq, ty, abs_, nominal)
            return _step(state, gid, [seq.replace_hyp(hyp, instantiate(abs_, a))],
                         RuleApp("nabla_l", gid, (hyp, a)))
    raise KernelError(f"hypothesis {hyp} is not nabla quantified")


def contract(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    f = seq.hyp(hyp)
    s2, names = seq.add_hyps([f])
    return _step(state, gid, [s2], RuleApp("c_l", gid, (hyp,), (names[0],)))


def use_lemma(state: ProofState, gid: int, name: str) -> ProofState:
    seq = state.goal(gid)
    f = state.lemma(name)
    s2, names = seq.add_hyps([f])
    return _step(state, gid, [s2], RuleApp("lemma", gid, (name,), (names[0],)))


def focus(state: ProofState, gid: int) -> ProofState:
    """Move a subgoal to the front of the queue; proof content unchanged."""
    seq = state.goal(gid)
    rest = tuple((g, s) for g, s in state.goals if g != gid)
    return replace(state, goals=((gid, seq),) + rest,
                   trace=state.trace + (RuleApp("focus", gid),))


# ---------------------------------------------------------------------------
# Fig. 2: rules for definitions
# ---------------------------------------------------------------------------

def _nat_clauses() -> list[Clause]:
    n = Var("N", NT)
    return [
        Clause("nat", (), (), mk_app(NAT, Z), TT),
        Clause("nat", (n,), (), mk_app(NAT, mk_app(S, n)), mk_app(NAT, n)),
    ]


def _eq_clauses(a: Term) -> list[Clause]:
    ty = type_of(a)
    x = Var("x", ty)
    return [Clause("=", (x,), (), mk_app(eq_const(ty), x, x), TT)]


def _clauses_for(defs: dict, atom: Term) -> list[Clause]:
    match view(atom):
        case ("eq", a, _):
            return _eq_clauses(a)
        case ("atom", Const("nat", _), [_]):
            return _nat_clauses()
        case ("atom", Const(name, _), _) if name in defs:
            return list(defs[name].clauses)
    pred = atom_pred(atom)
    if pred is not None:
        raise KernelError(f"{pred} is not a defined predicate")
    raise KernelError(f"{pp_term(atom)} is not an atom with a defined predicate")


def _prep_clause(seq: Sequent, a_orig: Term, cl: Clause):
    """Shared raising pipeline of defL/defR for one clause."""
    cbar = fresh_nominals([z.ty for z in cl.zvars], seq.supp())
    seq_r, _ = raise_sequent(seq, cbar)
    abar = supp_list(a_orig)
    cl_r = raise_clause(cl, abar, seq_r.var_names() | seq.var_names())
    zmap = {z.name: c for z, c in zip(cl.zvars, cbar)}
    head = apply_subst(zmap, cl_r.head)
    return cbar, seq_r, cl_r, head, abar + cbar


def _occurrences(t: Term, vname: str, out: list) -> None:
    match t:
        case Lam(_, body, _):
            _occurrences(body, vname, out)
        case App():
            head, args = spine(t)
            if isinstance(head, Var) and head.name == vname:
                out.append(args)
            for a in args:
                _occurrences(a, vname, out)
        case Var(name, _) if name == vname:
            out.append([])
        case _:
            pass


def _peel(v: Var, pos: int, avoid: set[str]) -> tuple[Var, Term]:
    tys = arg_types(v.ty)
    m = len(tys)
    target = v.ty
    for _ in range(m):
        target = target.right
    v2 = Var(fresh_name(v.name, avoid),
             arrow(*[tys[k] for k in range(m) if k != pos], target))
    body = mk_app(v2, *[Bound(m - 1 - k) for k in range(m) if k != pos])
    return v2, mk_lam(tys, body)


def _unraise(seq: Sequent, cbar) -> Sequent:
    """Peel raising arguments whose nominal the premise never needed.

    A nominal c can be dropped when its every occurrence is as one fixed
    argument position of eigenvariables; those variables are replaced by
    versions without that argument.
    """
    changed = True
    while changed:
        changed = False
        for c in cbar:
            if c not in seq.supp():
                continue
            all_terms = [f for _, f in seq.hyps] + [seq.goal]
            theta: dict[str, Term] = {}
            avoid = set(seq.var_names())
            for v in seq.vars:
                occs: list = []
                for f in all_terms:
                    _occurrences(f, v.name, occs)
                if not occs:
                    continue
                width = min(len(a) for a in occs)
                for j in range(width):
                    if all(a[j] == c for a in occs):
                        v2, lam = _peel(v, j, avoid)
                        avoid.add(v2.name)
                        theta[v.name] = lam
                        break
            if not theta:
                continue
            s2 = seq.apply(theta)
            if c not in s2.supp():
                seq = s2
                changed = True
    return seq


def _canonical_key(seq: Sequent, cbar) -> tuple:
    """Premise identity modulo permutations of cbar and eigenvariable names."""
    best = None
    for pi in all_permutations_of(list(cbar)):
        s2 = seq.permute(pi)
        order: list[Var] = []
        seen: set[str] = set()
        for f in [f for _, f in s2.hyps] + [s2.goal]:
            for v in var_terms_ordered(f):
                if v.name not in seen:
                    seen.add(v.name)
                    order.append(v)
        ren = {v.name: Var(f"_v{k}", v.ty) for k, v in enumerate(order)}
        key = (tuple(repr(apply_subst(ren, f)) for _, f in s2.hyps),
               repr(apply_subst(ren, s2.goal)),
               tuple(repr(v.ty) for v in order))
        if best is None or key < best:
            best = key
    return best


def _theta_items(theta: dict) -> tuple:
    return tuple(sorted(theta.items()))


def def_l(state: ProofState, gid: int, hyp: str) -> ProofState:
    seq = state.goal(gid)
    atom = seq.hyp(hyp)
    clauses = _clauses_for(state.defs, atom)
    premises = []
    infos = []
    keys = set()
    for cidx, cl in enumerate(clauses):
        cbar, seq_r, cl_r, head, movable = _prep_clause(seq, atom, cl)
        opens = seq_r.var_names() | {u.name for u in cl_r.uvars}
        try:
            pairs = perm_unifiers(seq_r.hyp(hyp), head, movable, opens,
                                  opens | seq.var_names(), forbid_nominals=True)
        except NonPattern as e:
            raise KernelError(f"case analysis on {hyp} left the pattern "
                              f"fragment at clause {cidx}: {e}")
        for pi, theta in pairs:
            p = seq_r.replace_hyp(hyp, permute(pi, cl_r.body)).apply(theta)
            p = _close_signature(p)
            p = _unraise(p, cbar)
            key = _canonical_key(p, cbar)
            if key in keys:
                continue
            keys.add(key)
            premises.append(p)
            infos.append((cidx, pi, _theta_items(theta)))
    return _step(state, gid, premises,
                 RuleApp("def_l", gid, (hyp,), tuple(infos)))


def def_r(state: ProofState, gid: int, clause: int | None = None,
          choice: int = 0) -> ProofState:
    seq = state.goal(gid)
    atom = seq.goal
    clauses = _clauses_for(state.defs, atom)
    if clause is not None and not (0 <= clause < len(clauses)):
        raise KernelError(f"no clause {clause} for {atom_pred(atom)}")
    indices = [clause] if clause is not None else range(len(clauses))
    found = []
    for cidx in indices:
        cl = clauses[cidx]
        cbar, seq_r, cl_r, head, movable = _prep_clause(seq, atom, cl)
        opens = {u.name for u in cl_r.uvars}
        try:
            pairs = perm_unifiers(seq_r.goal, head, movable, opens,
                                  opens | seq_r.var_names() | seq.var_names(),
                                  forbid_nominals=True)
        except NonPattern as e:
            raise KernelError(f"unfolding the goal left the pattern "
                              f"fragment at clause {cidx}: {e}")
        for pi, theta in pairs:
            found.append((cidx, cbar, seq_r, cl_r, pi, theta))
            if len(found) > choice:
                break
        if len(found) > choice:
            break
    if len(found) <= choice:
        raise NoMatch(f"no definitional clause matches {atom}")
    cidx, cbar, seq_r, cl_r, pi, theta = found[choice]
    p = seq_r.with_goal(apply_subst(theta, permute(pi, cl_r.body)))
    p = _close_signature(p)
    p = _unraise(p, cbar)
    return _step(state, gid, [p],
                 RuleApp("def_r", gid, (clause, choice),
                         (cidx, pi, _theta_items(theta))))


# ---------------------------------------------------------------------------
# Fig. 3: rules for natural number induction
# ---------------------------------------------------------------------------

def _nat_arg(f: Term) -> Term | None:
    match view(f):
        case ("atom", Const("nat", _), [n]):
            return n
    return None


def nat_r(state: ProofState, gid: int) -> ProofState:
    seq = state.goal(gid)
    n = _nat_arg(seq.goal)
    if n is None:
        raise KernelError("goal is not a nat atom")
    if n == Z:
        return _step(state, gid, [], RuleApp("nat_r", gid))
    match spine(n):
        case (Const("s", _), [m]):
            return _step(state, gid, [seq.with_goal(mk_app(NAT, m))],
                         RuleApp("nat_r", gid))
    raise KernelError(f"nat argument {n} is neither z nor a successor")


def nat_l(state: ProofState, gid: int, hyp: str, invariant: Term) -> ProofState:
    seq = state.goal(gid)
    n = _nat_arg(seq.hyp(hyp))
    if n is None:
        raise KernelError(f"hypothesis {hyp} is not a nat atom")
    inv = normalize(invariant)
    try:
        if type_of(inv) != arrow(NT, OTY):
            raise KernelError(
                f"induction invariant must have type nt -> o, got {type_of(inv)}")
    except TypeError_ as e:
        raise KernelError(f"ill-typed induction invariant: {e}")
    try:
        check_restriction(_napp(inv, Z))
    except DefError as e:
        raise KernelError(str(e)) from None
    if free_vars(inv):
        raise KernelError(f"induction invariant mentions eigenvariables "
                          f"{sorted(free_vars(inv))}")
    base = Sequent((), (), _napp(inv, Z))
    hint = inv.hint if isinstance(inv, Lam) and inv.hint else "x"
    x = Var(fresh_name(hint, set()), NT)
    step_seq = Sequent((x,), (("IH", _napp(inv, x)),),
                       _napp(inv, mk_app(S, x)))
    main = seq.replace_hyp(hyp, _napp(inv, n))
    return _step(state, gid, [base, step_seq, main],
                 RuleApp("nat_l", gid, (hyp, inv)))


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

_OPS = {
    "id": apply_id,
    "cut": apply_cut,
    "tt_r": tt_r,
    "ff_l": ff_l,
    "and_l": and_l,
    "and_r": and_r,
    "or_l": or_l,
    "or_r": or_r,
    "imp_l": imp_l,
    "imp_r": imp_r,
    "all_l": all_l,
    "all_r": all_r,
    "exists_l": exists_l,
    "exists_r": exists_r,
    "nabla_l": nabla_l,
    "nabla_r": nabla_r,
    "c_l": contract,
    "def_l": def_l,
    "def_r": def_r,
    "nat_l": nat_l,
    "nat_r": nat_r,
    "lemma": use_lemma,
    "focus": focus,
}


def replay(state: ProofState, trace) -> ProofState:
    """Re-run a recorded trace; deterministic rules reproduce the proof."""
    for ra in trace:
        state = _OPS[ra.rule](state, ra.goal, *ra.args)
    return state
