"""User-level proof steps over the rule engine.

Each tactic compiles to a sequence of checked kernel operations, so the
recorded trace alone certifies the proof.  Tactics act on the focused
(first) subgoal; a failed tactic raises and leaves the state untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    Const, Lam, Nominal, Term, Var,
    NT,
    abstract_over, apply_subst, free_vars, fresh_name, fresh_nominal,
    instantiate, mk_app, normalize, spine, type_of, var_terms,
)
from .logic import Sequent, S, Z, conj, forall, imp, view
from . import kernel as K
from .kernel import KernelError, NoMatch, NoPermutation, ProofState
from .unify import NonPattern, UnifyError, pattern_unify

__all__ = [
    "TacticError", "Tactic",
    "Intros", "Case", "Unfold", "ExistsTac", "Split", "Left", "Right",
    "Apply", "Assert", "Induction", "Search", "Skip",
    "run_tactic", "synthesize_invariant", "search",
]

DEFAULT_DEPTH = 5


class TacticError(Exception):
    """A tactic could not be applied; the proof state is unchanged."""


# ---------------------------------------------------------------------------
# the tactic language
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Intros:
    pass


@dataclass(frozen=True)
class Case:
    hyp: str
    nominal: Nominal | None = None


@dataclass(frozen=True)
class Unfold:
    clause: int | None = None
    choice: int = 0


@dataclass(frozen=True)
class ExistsTac:
    witness: Term


@dataclass(frozen=True)
class Split:
    pass


@dataclass(frozen=True)
class Left:
    pass


@dataclass(frozen=True)
class Right:
    pass


@dataclass(frozen=True)
class Apply:
    lemma: str
    hyps: tuple[str, ...] = ()
    withs: tuple[tuple[str, Term], ...] = ()


@dataclass(frozen=True)
class Assert:
    formula: Term


@dataclass(frozen=True)
class Induction:
    hyp: str
    invariant: Term | None = None


@dataclass(frozen=True)
class Search:
    depth: int = DEFAULT_DEPTH


@dataclass(frozen=True)
class Skip:
    pass


Tactic = (Intros | Case | Unfold | ExistsTac | Split | Left | Right
          | Apply | Assert | Induction | Search | Skip)


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def _focused(state: ProofState) -> int:
    if state.done():
        raise TacticError("no open subgoals")
    return state.goals[0][0]


def _new_ids(before: ProofState, after: ProofState) -> list[int]:
    old = {g for g, _ in before.goals}
    return [g for g, _ in after.goals if g not in old]


def _only_new(before: ProofState, after: ProofState) -> int:
    ids = _new_ids(before, after)
    assert len(ids) == 1
    return ids[0]


def _report(state: ProofState) -> str:
    if state.done():
        return "proof completed"
    n = len(state.goals)
    return f"{n} subgoal{'' if n == 1 else 's'} remaining"


def _conj_many(fs: list[Term]) -> Term:
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = conj(f, out)
    return out


def _conj_parts(f: Term) -> list[Term]:
    match view(f):
        case ("and", a, b):
            return _conj_parts(a) + _conj_parts(b)
    return [f]


def _split_conj_hyp(state: ProofState, gid: int,
                    hyp: str) -> tuple[ProofState, int]:
    """Replace a conjunctive hypothesis by one hypothesis per conjunct."""
    seq = state.goal(gid)
    match view(seq.hyp(hyp)):
        case ("and", _, _):
            pass
        case _:
            return state, gid
    st = K.contract(state, gid, hyp)
    copy = st.trace[-1].info[0]
    gid = _only_new(state, st)
    prev, st = st, K.and_l(st, gid, hyp, 0)
    gid = _only_new(prev, st)
    prev, st = st, K.and_l(st, gid, copy, 1)
    gid = _only_new(prev, st)
    st, gid = _split_conj_hyp(st, gid, hyp)
    return _split_conj_hyp(st, gid, copy)


# ---------------------------------------------------------------------------
# individual tactics
# ---------------------------------------------------------------------------

def _intros(state: ProofState, gid: int) -> ProofState:
    while True:
        seq = state.goal(gid)
        match view(seq.goal):
            case ("forall", _, _):
                prev, state = state, K.all_r(state, gid)
            case ("nabla", _, _):
                prev, state = state, K.nabla_r(state, gid)
            case ("imp", _, _):
                prev, state = state, K.imp_r(state, gid)
                name = state.trace[-1].info[0]
                gid = _only_new(prev, state)
                state, gid = _split_conj_hyp(state, gid, name)
                continue
            case _:
                return state
        gid = _only_new(prev, state)


def _case(state: ProofState, gid: int, hyp: str,
          nominal: Nominal | None) -> ProofState:
    seq = state.goal(gid)
    f = seq.hyp(hyp)
    match view(f):
        case ("ff",):
            return K.ff_l(state, gid, hyp)
        case ("and", _, _):
            return _split_conj_hyp(state, gid, hyp)[0]
        case ("or", _, _):
            return K.or_l(state, gid, hyp)
        case ("exists", _, _):
            return K.exists_l(state, gid, hyp)
        case ("nabla", _, _):
            return K.nabla_l(state, gid, hyp, nominal)
        case ("eq", _, _) | ("atom", _, _):
            return K.def_l(state, gid, hyp)
    raise TacticError(f"case cannot analyse hypothesis {hyp}")


def _discharge(st: ProofState, g: int, formula: Term, names: list[str],
               lemma: str) -> ProofState:
    """Close the premise subgoal g against the named hypotheses.

    A conjunctive premise is split so each conjunct can match its own
    hypothesis; slots given as "_" stay open for the user.
    """
    if all(h == "_" for h in names):
        return st
    match view(formula):
        case ("and", a, b):
            k = len(_conj_parts(a))
            prev, st = st, K.and_r(st, g)
            ga, gb = _new_ids(prev, st)
            st = _discharge(st, ga, a, names[:k], lemma)
            return _discharge(st, gb, b, names[k:], lemma)
    try:
        return K.apply_id(st, g, names[0])
    except NoPermutation:
        raise TacticError(
            f"hypothesis {names[0]} does not match a premise of {lemma}")


def _apply(state: ProofState, gid: int, t: Apply) -> ProofState:
    seq = state.goal(gid)
    try:
        stmt = seq.hyp(t.lemma)
        from_hyp = True
    except KeyError:
        stmt = state.lemma(t.lemma)
        from_hyp = False

    # Split the statement into quantifiers and premises, standing in a
    # fresh placeholder variable for each quantified position.  Each
    # premise contributes one hypothesis slot per conjunct.
    taken = set(seq.var_names()) | {u.name for u in var_terms(stmt)}
    items: list = []
    placeholders: dict[str, Var] = {}
    slots: list[Term] = []
    f = stmt
    while True:
        match view(f):
            case ("forall", ty, abs_):
                ph = Var(fresh_name(abs_.hint or "X", taken), ty)
                taken.add(ph.name)
                placeholders[ph.name] = ph
                items.append(("all", ph))
                f = normalize(instantiate(abs_, ph))
            case ("imp", a, b):
                items.append(("imp", a, len(_conj_parts(a))))
                slots += _conj_parts(a)
                f = b
            case _:
                break
    if len(t.hyps) > len(slots):
        raise TacticError(
            f"{t.lemma} takes {len(slots)} hypotheses, got {len(t.hyps)}")
    given = list(t.hyps) + ["_"] * (len(slots) - len(t.hyps))

    # Infer the instantiation by matching premise slots against the
    # named hypotheses, seeded with any explicit bindings.
    eqs = []
    for name, term in t.withs:
        if name not in placeholders:
            raise TacticError(f"{t.lemma} has no quantified variable {name}")
        eqs.append((placeholders[name], normalize(term)))
    for part, h in zip(slots, given):
        if h != "_":
            eqs.append((part, seq.hyp(h)))
    try:
        theta = pattern_unify(eqs, set(placeholders), taken,
                              forbid_nominals=False)
    except NonPattern as e:
        raise TacticError(f"cannot infer an instantiation for {t.lemma} "
                          f"(outside the pattern fragment): {e}")
    except UnifyError as e:
        raise TacticError(f"{t.lemma} does not apply to those hypotheses: {e}")

    # Drive the kernel: bring the statement in as a working copy,
    # instantiate the quantifiers, discharge each premise against its
    # hypotheses.
    if from_hyp:
        st = K.contract(state, gid, t.lemma)
    else:
        st = K.use_lemma(state, gid, t.lemma)
    hname = st.trace[-1].info[0]
    cur = _only_new(state, st)
    gi = iter(given)
    for item in items:
        match item:
            case ("all", ph):
                w = normalize(apply_subst(theta, ph))
                if free_vars(w) - seq.var_names():
                    raise TacticError(
                        f"cannot infer {ph.name} for {t.lemma}; "
                        f"add 'with {ph.name} = ...'")
                prev, st = st, K.all_l(st, cur, hname, w)
                cur = _only_new(prev, st)
            case ("imp", a, width):
                names = [next(gi) for _ in range(width)]
                prev, st = st, K.imp_l(st, cur, hname)
                prem_gid, cont_gid = _new_ids(prev, st)
                st = _discharge(st, prem_gid, normalize(apply_subst(theta, a)),
                                names, t.lemma)
                cur = cont_gid
    return st


def synthesize_invariant(seq: Sequent, hyp: str) -> Lam:
    """Build an induction invariant from the sequent itself.

    The invariant generalizes the sequent with the nat hypothesis
    deleted and its argument abstracted: every other eigenvariable is
    universally quantified and the remaining hypotheses become
    antecedents of the goal.
    """
    match view(seq.hyp(hyp)):
        case ("atom", Const("nat", _), [n]):
            pass
        case _:
            raise TacticError(f"hypothesis {hyp} is not a nat atom")
    if not isinstance(n, Var):
        raise TacticError(
            f"cannot synthesize an invariant: nat is applied to a compound "
            f"term; supply one explicitly")
    others = [g for name, g in seq.hyps if name != hyp]
    body = imp(_conj_many(others), seq.goal) if others else seq.goal
    for v in reversed([v for v in seq.vars if v.name != n.name]):
        body = forall(v, body)
    return abstract_over(body, n, hint="n")


def _induction(state: ProofState, gid: int, t: Induction) -> ProofState:
    seq = state.goal(gid)
    if t.invariant is not None:
        return K.nat_l(state, gid, t.hyp, t.invariant)

    inv = synthesize_invariant(seq, t.hyp)
    others = [name for name, _ in seq.hyps if name != t.hyp]
    n = spine(seq.hyp(t.hyp))[1][0]
    ys = [v for v in seq.vars if v.name != n.name]

    st = K.nat_l(state, gid, t.hyp, inv)
    base, step, main = _new_ids(state, st)

    # The generalized statement instantiated at the original variables
    # gives back exactly this sequent, so the third premise closes
    # mechanically: instantiate, split the implication, match up.
    cur = main
    for y in ys:
        prev, st = st, K.all_l(st, cur, t.hyp, y)
        cur = _only_new(prev, st)
    if others:
        prev, st = st, K.imp_l(st, cur, t.hyp)
        prem, cont = _new_ids(prev, st)
        todo = [(prem, others)]
        while todo:
            g, names = todo.pop()
            if len(names) == 1:
                st = K.apply_id(st, g, names[0])
                continue
            prev, st = st, K.and_r(st, g)
            ga, gb = _new_ids(prev, st)
            todo.append((gb, names[1:]))
            todo.append((ga, names[:1]))
        st = K.apply_id(st, cont, t.hyp)
    else:
        st = K.apply_id(st, cur, t.hyp)

    # Base and step reduce to the familiar obligations once introduced;
    # the inductive hypothesis keeps its IH name.
    st = _intros(st, base)
    st = _intros(st, step)
    return st


# ---------------------------------------------------------------------------
# bounded proof search
# ---------------------------------------------------------------------------

def _nat_tower(limit: int) -> list[Term]:
    out = [Z]
    t = Z
    for _ in range(limit):
        t = mk_app(S, t)
        out.append(t)
    return out


def _ground_subterms(seq: Sequent, ty) -> list[Term]:
    out: list[Term] = []

    def walk(t: Term) -> None:
        head, args = spine(t)
        if not isinstance(head, Lam) and not free_vars(t):
            try:
                if type_of(t) == ty and t not in out:
                    out.append(t)
            except Exception:
                pass
        for a in args:
            walk(a)
        if isinstance(head, Lam):
            walk(head.body)

    for _, f in seq.hyps:
        walk(f)
    walk(seq.goal)
    return out


def _witnesses(seq: Sequent, ty, depth: int) -> list[Term]:
    cands: list[Term] = [v for v in seq.vars if v.ty == ty]
    cands += sorted((c for c in seq.supp() if c.ty == ty),
                    key=lambda c: c.index)
    cands.append(fresh_nominal(ty, seq.supp()))
    if ty == NT:
        # successors of variables in scope cover index-measure bumps
        cands += [mk_app(S, v) for v in seq.vars if v.ty == NT]
        cands += _nat_tower(depth)
    cands += _ground_subterms(seq, ty)
    seen: list[Term] = []
    for c in cands:
        if c not in seen:
            seen.append(c)
    return seen


def _solve_all(state: ProofState, gids, depth: int) -> ProofState | None:
    for g in gids:
        nxt = _solve(state, g, depth)
        if nxt is None:
            return None
        state = nxt
    return state


def _attempt(state: ProofState, gid: int, depth: int, op) -> ProofState | None:
    try:
        nxt = op(state)
    except KernelError:
        return None
    return _solve_all(nxt, _new_ids(state, nxt), depth - 1)


def _solve(state: ProofState, gid: int, depth: int) -> ProofState | None:
    """Close subgoal gid within the given height bound, or return None."""
    if depth <= 0:
        return None
    seq = state.goal(gid)

    # immediate closers
    if view(seq.goal) == ("tt",):
        return K.tt_r(state, gid)
    for name, f in seq.hyps:
        if view(f) == ("ff",):
            return K.ff_l(state, gid, name)
    for name, _ in seq.hyps:
        try:
            return K.apply_id(state, gid, name)
        except NoPermutation:
            pass

    # invertible simplifications of hypotheses, committed when found
    for name, f in seq.hyps:
        match view(f):
            case ("and", _, _):
                nxt, g2 = _split_conj_hyp(state, gid, name)
                return _solve(nxt, g2, depth - 1)
            case ("exists", _, _):
                return _attempt(state, gid, depth,
                                lambda s: K.exists_l(s, gid, name))
            case ("nabla", _, _):
                return _attempt(state, gid, depth,
                                lambda s: K.nabla_l(s, gid, name))
            case ("eq", _, _):
                return _attempt(state, gid, depth,
                                lambda s: K.def_l(s, gid, name))
            case ("or", _, _):
                return _attempt(state, gid, depth,
                                lambda s: K.or_l(s, gid, name))

    # right rules
    match view(seq.goal):
        case ("and", _, _):
            return _attempt(state, gid, depth, lambda s: K.and_r(s, gid))
        case ("imp", _, _):
            return _attempt(state, gid, depth, lambda s: K.imp_r(s, gid))
        case ("forall", _, _):
            return _attempt(state, gid, depth, lambda s: K.all_r(s, gid))
        case ("nabla", _, _):
            return _attempt(state, gid, depth, lambda s: K.nabla_r(s, gid))
        case ("or", _, _):
            for side in (0, 1):
                res = _attempt(state, gid, depth,
                               lambda s, side=side: K.or_r(s, gid, side))
                if res is not None:
                    return res
        case ("exists", ty, _):
            for w in _witnesses(seq, ty, depth):
                res = _attempt(state, gid, depth,
                               lambda s, w=w: K.exists_r(s, gid, w))
                if res is not None:
                    return res
        case ("eq", _, _):
            res = _attempt(state, gid, depth, lambda s: K.def_r(s, gid))
            if res is not None:
                return res
        case ("atom", Const("nat", _), _):
            res = _attempt(state, gid, depth, lambda s: K.nat_r(s, gid))
            if res is not None:
                return res
        case ("atom", _, _):
            choice = 0
            while True:
                try:
                    nxt = K.def_r(state, gid, choice=choice)
                except KernelError:
                    break
                res = _solve_all(nxt, _new_ids(state, nxt), depth - 1)
                if res is not None:
                    return res
                choice += 1

    # case analysis on defined hypotheses, fewest cases first
    options = []
    for name, f in seq.hyps:
        match view(f):
            case ("atom", _, _):
                try:
                    nxt = K.def_l(state, gid, name)
                except KernelError:
                    continue
                ids = _new_ids(state, nxt)
                if len(ids) <= 4:
                    options.append((len(ids), name, nxt, ids))
    options.sort(key=lambda o: (o[0], o[1]))
    for _, _, nxt, ids in options:
        res = _solve_all(nxt, ids, depth - 1)
        if res is not None:
            return res
    return None


def search(state: ProofState, depth: int = DEFAULT_DEPTH) -> ProofState:
    """Bounded backtracking search; closes the subgoals it can."""
    if depth < 1:
        raise TacticError("search depth must be at least 1")
    for gid in list(state.goal_ids()):
        res = _solve(state, gid, depth)
        if res is not None:
            state = res
    return state


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def run_tactic(state: ProofState, t: Tactic) -> tuple[ProofState, str]:
    """Apply one tactic to the focused subgoal."""
    gid = _focused(state)
    try:
        match t:
            case Intros():
                out = _intros(state, gid)
                if out is state:
                    raise TacticError("nothing to introduce")
            case Case(hyp, nominal):
                out = _case(state, gid, hyp, nominal)
            case Unfold(clause, choice):
                out = K.def_r(state, gid, clause, choice)
            case ExistsTac(w):
                out = K.exists_r(state, gid, w)
            case Split():
                out = K.and_r(state, gid)
            case Left():
                out = K.or_r(state, gid, 0)
            case Right():
                out = K.or_r(state, gid, 1)
            case Apply():
                out = _apply(state, gid, t)
            case Assert(f):
                out = K.apply_cut(state, gid, f)
            case Induction():
                out = _induction(state, gid, t)
            case Search(depth):
                if depth < 1:
                    raise TacticError("search depth must be at least 1")
                res = _solve(state, gid, depth)
                if res is None:
                    raise TacticError(f"search (depth {depth}) found no proof")
                out = res
            case Skip():
                if len(state.goals) < 2:
                    raise TacticError("no other subgoal to skip to")
                out = K.focus(state, state.goals[1][0])
            case _:
                raise TacticError(f"unknown tactic {t!r}")
    except (KernelError, KeyError) as e:
        raise TacticError(str(e).strip("'"))
    return out, _report(out)
