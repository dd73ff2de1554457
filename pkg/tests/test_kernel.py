"""Tests for the rule engine.

The first section walks a complete proof of a freshness judgement through
case analysis and unfolding, checking every intermediate sequent against
the expected raising, pruning, and permutation behaviour.
"""

import pytest

from genlog.terms import (
    Base, Bound, Const, Lam, Nominal, Var,
    NT, OTY,
    arrow, mk_app, normalize, supp,
)
from genlog.logic import (
    Clause, Definition, Sequent,
    FF, NAT, S, TT, Z,
    conj, disj, eq, exists, forall, imp, nabla,
)
from genlog import kernel as K
from genlog.kernel import (
    KernelError, NoMatch, NoPermutation, ProofState,
)

TM = Base("tm")
LS = Base("ls")

CNS = Const("cns", arrow(TM, TM, TM))
APP = Const("app", arrow(TM, TM, TM))
NIL = Const("nil", LS)
CS = Const("cs", arrow(TM, LS, LS))
FRESH = Const("fresh", arrow(TM, TM, OTY))
NAME = Const("name", arrow(TM, OTY))
ELEM = Const("element", arrow(NT, TM, LS, OTY))
P1 = Const("p", arrow(TM, OTY))
Q1 = Const("q", arrow(TM, OTY))
R1 = Const("r", arrow(TM, OTY))
D2 = Const("d", arrow(TM, TM, OTY))
F1 = Const("f", arrow(TM, TM))
A0 = Const("a", TM)
B0 = Const("b0", TM)

n1 = Nominal(1, TM)
n2 = Nominal(2, TM)


def fresh_def() -> Definition:
    # fresh X E holds when X is a nominal not occurring in E:
    #   forall E, nabla x, fresh x E := tt
    e = Var("E", TM)
    zx = Var("x", TM)
    cl = Clause("fresh", (e,), (zx,), mk_app(FRESH, zx, e), TT)
    return Definition("fresh", arrow(TM, TM, OTY), (cl,))


def name_def() -> Definition:
    # name X holds when X is a nominal:  nabla x, name x := tt
    zx = Var("x", TM)
    cl = Clause("name", (), (zx,), mk_app(NAME, zx), TT)
    return Definition("name", arrow(TM, OTY), (cl,))


def element_def() -> Definition:
    # element I X L: X sits at position I of the list L.
    b, l = Var("B", TM), Var("L", LS)
    c, n = Var("C", TM), Var("N", NT)
    c1 = Clause("element", (b, l), (),
                mk_app(ELEM, Z, b, mk_app(CS, b, l)), TT)
    c2 = Clause("element", (n, b, c, l), (),
                mk_app(ELEM, mk_app(S, n), b, mk_app(CS, c, l)),
                mk_app(ELEM, n, b, l))
    return Definition("element", arrow(NT, TM, LS, OTY), (c1, c2))


def state_for(seq: Sequent, defs=None, lemmas=()) -> ProofState:
    return ProofState(defs or {}, tuple(lemmas), ((0, seq),), (), 1)


def check_replay(final: ProofState, initial: ProofState) -> None:
    """Every recorded trace must replay to the same goals from scratch."""
    again = K.replay(initial, final.trace)
    assert again.goals == final.goals
    assert again.trace == final.trace


# ---------------------------------------------------------------------------
# a complete freshness proof, step by step
# ---------------------------------------------------------------------------

def test_freshness_proof_walkthrough():
    # x, b, l : fresh x (cns b l) |- fresh x b
    x, b, l = Var("x", TM), Var("b", TM), Var("l", TM)
    seq = Sequent((x, b, l),
                  (("H1", mk_app(FRESH, x, mk_app(CNS, b, l))),),
                  mk_app(FRESH, x, b))
    defs = {"fresh": fresh_def()}
    st0 = state_for(seq, defs)

    # Case analysis on H1.  The sequent is raised over a fresh nominal n1,
    # the lone unifier sends x to that nominal and prunes it out of b and l,
    # leaving fresh n1 b2 to prove for a generic n1.
    st1 = K.def_l(st0, 0, "H1")
    assert len(st1.goals) == 1
    gid1, p1 = st1.goals[0]
    b2, l2 = Var("b2", TM), Var("l2", TM)
    assert p1 == Sequent((b2, l2), (("H1", TT),), mk_app(FRESH, n1, b2))

    # Unfolding the goal raises again over n2 and matches the clause head
    # under the swap of n1 and n2; the raised b and l survive unused.
    st2 = K.def_r(st1, gid1)
    gid2, p2 = st2.goals[0]
    br, lr = Var("b", arrow(TM, TM)), Var("l", arrow(TM, TM))
    assert p2 == Sequent((br, lr), (("H1", TT),), TT)
    info_cidx, info_pi, info_theta = st2.trace[-1].info
    assert info_cidx == 0
    assert info_pi(n1) == n2 and info_pi(n2) == n1

    st3 = K.tt_r(st2, gid2)
    assert st3.done()
    assert [ra.rule for ra in st3.trace] == ["def_l", "def_r", "tt_r"]
    check_replay(st3, st0)


def test_freshness_cascades_through_lists():
    # The same proof goes through when the list has two elements: two
    # rounds of case analysis keep whittling the cons down.
    x, a, b, l = Var("x", TM), Var("a", TM), Var("b", TM), Var("l", TM)
    seq = Sequent((x, a, b, l),
                  (("H1", mk_app(FRESH, x,
                                 mk_app(CNS, a, mk_app(CNS, b, l)))),),
                  mk_app(FRESH, x, b))
    st = state_for(seq, {"fresh": fresh_def()})
    st = K.def_l(st, 0, "H1")
    assert len(st.goals) == 1
    _, p = st.goals[0]
    assert p.goal == mk_app(FRESH, n1, Var("b2", TM))
    st = K.def_r(st, st.goals[0][0])
    st = K.tt_r(st, st.goals[0][0])
    assert st.done()


# ---------------------------------------------------------------------------
# definition rules: case analysis (left)
# ---------------------------------------------------------------------------

def test_def_l_impossible_case_closes():
    # name (app M N) can never hold: a nominal is not an application.
    m, n = Var("M", TM), Var("N", TM)
    seq = Sequent((m, n), (("H1", mk_app(NAME, mk_app(APP, m, n))),), FF)
    st = K.def_l(state_for(seq, {"name": name_def()}), 0, "H1")
    assert st.done()
    check_replay(st, state_for(seq, {"name": name_def()}))


def test_def_l_variable_stays_open():
    # name X has exactly one case: X becomes a fresh nominal.
    xv = Var("X", TM)
    seq = Sequent((xv,), (("H1", mk_app(NAME, xv)),), mk_app(P1, xv))
    st = K.def_l(state_for(seq, {"name": name_def()}), 0, "H1")
    assert len(st.goals) == 1
    _, p = st.goals[0]
    assert p == Sequent((), (("H1", TT),), mk_app(P1, n1))


def test_def_l_instantiates_matching_variables():
    # element z B (cs q nil) forces B to be q.
    q = Const("q0", TM)
    bv = Var("B", TM)
    seq = Sequent((bv,),
                  (("H1", mk_app(ELEM, Z, bv, mk_app(CS, q, NIL))),),
                  eq(bv, q))
    st = K.def_l(state_for(seq, {"element": element_def()}), 0, "H1")
    assert len(st.goals) == 1
    _, p = st.goals[0]
    assert p.goal == eq(q, q)
    assert p.hyp("H1") == TT
    assert p.vars == ()


def test_def_l_multiple_cases():
    # element N X (cs a (cs b0 nil)) splits into the head case and the
    # tail case, instantiating N to z and s N1 respectively.
    nv, xv = Var("N", NT), Var("X", TM)
    lst = mk_app(CS, A0, mk_app(CS, B0, NIL))
    seq = Sequent((nv, xv), (("H1", mk_app(ELEM, nv, xv, lst)),),
                  mk_app(P1, xv))
    st = K.def_l(state_for(seq, {"element": element_def()}), 0, "H1")
    assert len(st.goals) == 2
    (_, pa), (_, pb) = st.goals
    assert pa.hyp("H1") == TT and pa.goal == mk_app(P1, A0)
    n1v = Var("N1", NT)
    assert pb.hyp("H1") == mk_app(ELEM, n1v, Var("X", TM),
                                  mk_app(CS, B0, NIL))
    assert pb.goal == mk_app(P1, Var("X", TM))
    assert set(pb.vars) == {n1v, Var("X", TM)}


def test_def_l_dedups_symmetric_cases():
    # With the clause (nabla x y, d x y := tt), a hypothesis d U V has two
    # unifiers that differ only by which fresh nominal plays which role;
    # they describe the same obligation and collapse to one premise.
    u, v = Var("U", TM), Var("V", TM)
    zx, zy = Var("x", TM), Var("y", TM)
    cl = Clause("d", (), (zx, zy), mk_app(D2, zx, zy), TT)
    defs = {"d": Definition("d", arrow(TM, TM, OTY), (cl,))}
    seq = Sequent((u, v), (("H1", mk_app(D2, u, v)),), mk_app(R1, u))
    st = K.def_l(state_for(seq, defs), 0, "H1")
    assert len(st.goals) == 1
    _, p = st.goals[0]
    assert p.hyp("H1") == TT
    assert p.goal in (mk_app(R1, n1), mk_app(R1, n2))


def test_def_l_empty_definition_closes():
    defs = {"void": Definition("void", arrow(TM, OTY), ())}
    xv = Var("X", TM)
    seq = Sequent((xv,), (("H1", mk_app(Const("void", arrow(TM, OTY)), xv)),), FF)
    st = K.def_l(state_for(seq, defs), 0, "H1")
    assert st.done()


def test_def_l_on_equality():
    # An equality hypothesis X = f W unifies the two sides.
    xv, wv = Var("X", TM), Var("W", TM)
    seq = Sequent((xv, wv), (("H1", eq(xv, mk_app(F1, wv))),),
                  mk_app(P1, xv))
    st = K.def_l(state_for(seq), 0, "H1")
    assert len(st.goals) == 1
    _, p = st.goals[0]
    assert p.hyp("H1") == TT
    assert p.goal == mk_app(P1, mk_app(F1, wv))
    assert p.vars == (wv,)


def test_def_l_on_clashing_equality_closes():
    seq = Sequent((), (("H1", eq(A0, B0)),), FF)
    st = K.def_l(state_for(seq), 0, "H1")
    assert st.done()


def test_def_l_on_nat_is_case_analysis():
    nv = Var("N", NT)
    seq = Sequent((nv,), (("H1", mk_app(NAT, nv)),), mk_app(NAT, nv))
    st = K.def_l(state_for(seq), 0, "H1")
    assert len(st.goals) == 2
    (_, pz), (_, ps) = st.goals
    assert pz.hyp("H1") == TT and pz.goal == mk_app(NAT, Z)
    n1v = Var("N1", NT)
    assert ps.hyp("H1") == mk_app(NAT, n1v)
    assert ps.goal == mk_app(NAT, mk_app(S, n1v))


def test_def_l_requires_defined_atom():
    seq = Sequent((), (("H1", mk_app(P1, A0)),), FF)
    with pytest.raises(KernelError, match="not a defined predicate"):
        K.def_l(state_for(seq), 0, "H1")


def test_def_l_requires_atom():
    seq = Sequent((), (("H1", conj(TT, TT)),), FF)
    with pytest.raises(KernelError):
        K.def_l(state_for(seq), 0, "H1")


# ---------------------------------------------------------------------------
# definition rules: unfolding (right)
# ---------------------------------------------------------------------------

def test_def_r_matches_under_permutation():
    # Proving name c for a pre-existing nominal c needs the swap with the
    # newly raised one.
    seq = Sequent((), (), mk_app(NAME, n1))
    st0 = state_for(seq, {"name": name_def()})
    st = K.def_r(st0, 0)
    assert len(st.goals) == 1
    assert st.goals[0][1].goal == TT
    st = K.tt_r(st, st.goals[0][0])
    assert st.done()
    check_replay(st, st0)


def test_def_r_no_match():
    seq = Sequent((), (), mk_app(NAME, mk_app(APP, A0, B0)))
    with pytest.raises(NoMatch):
        K.def_r(state_for(seq, {"name": name_def()}), 0)


def test_def_r_unfolds_recursive_clause():
    # element (s z) b0 (cs a (cs b0 nil)) unfolds to element z b0 (cs b0 nil).
    lst = mk_app(CS, A0, mk_app(CS, B0, NIL))
    seq = Sequent((), (), mk_app(ELEM, mk_app(S, Z), B0, lst))
    st0 = state_for(seq, {"element": element_def()})
    st = K.def_r(st0, 0)
    assert st.goals[0][1].goal == mk_app(ELEM, Z, B0, mk_app(CS, B0, NIL))
    st = K.def_r(st, st.goals[0][0])
    assert st.goals[0][1].goal == TT
    st = K.tt_r(st, st.goals[0][0])
    assert st.done()
    check_replay(st, st0)


def test_def_r_clause_selection():
    # Two clauses match p X for a variable goal argument; the clause
    # argument picks which one unfolds.
    xv = Var("X", TM)
    c1 = Clause("pd", (xv,), (), mk_app(Const("pd", arrow(TM, OTY)), xv), TT)
    c2 = Clause("pd", (xv,), (), mk_app(Const("pd", arrow(TM, OTY)), xv), FF)
    defs = {"pd": Definition("pd", arrow(TM, OTY), (c1, c2))}
    goal = mk_app(Const("pd", arrow(TM, OTY)), A0)
    seq = Sequent((), (), goal)
    st = K.def_r(state_for(seq, defs), 0)
    assert st.goals[0][1].goal == TT
    st = K.def_r(state_for(seq, defs), 0, clause=1)
    assert st.goals[0][1].goal == FF
    st = K.def_r(state_for(seq, defs), 0, choice=1)
    assert st.goals[0][1].goal == FF
    with pytest.raises(NoMatch):
        K.def_r(state_for(seq, defs), 0, choice=2)
    with pytest.raises(KernelError):
        K.def_r(state_for(seq, defs), 0, clause=7)


def test_def_r_on_equality_and_nat():
    seq = Sequent((), (), eq(mk_app(F1, A0), mk_app(F1, A0)))
    st = K.def_r(state_for(seq), 0)
    assert st.goals[0][1].goal == TT
    seq = Sequent((), (), eq(A0, B0))
    with pytest.raises(NoMatch):
        K.def_r(state_for(seq), 0)
    seq = Sequent((), (), mk_app(NAT, mk_app(S, Z)))
    st = K.def_r(state_for(seq), 0)
    assert st.goals[0][1].goal == mk_app(NAT, Z)


def test_def_r_keeps_goal_variables_rigid():
    # Unfolding name X for an eigenvariable X must fail: the clause head
    # only covers nominals and X may be instantiated to anything.
    xv = Var("X", TM)
    seq = Sequent((xv,), (), mk_app(NAME, xv))
    with pytest.raises(NoMatch):
        K.def_r(state_for(seq, {"name": name_def()}), 0)


# ---------------------------------------------------------------------------
# core rules
# ---------------------------------------------------------------------------

def test_id_mod_permutation():
    h = mk_app(FRESH, n1, mk_app(F1, n2))
    g = mk_app(FRESH, n2, mk_app(F1, n1))
    seq = Sequent((), (("H1", h),), g)
    st = K.apply_id(state_for(seq), 0, "H1")
    assert st.done()


def test_id_requires_permutation():
    seq = Sequent((), (("H1", mk_app(P1, n1)),), mk_app(Q1, n1))
    with pytest.raises(NoPermutation):
        K.apply_id(state_for(seq), 0, "H1")


def test_cut():
    xv = Var("X", TM)
    seq = Sequent((xv,), (("H1", mk_app(P1, xv)),), mk_app(Q1, xv))
    st = K.apply_cut(state_for(seq), 0, mk_app(R1, xv))
    assert len(st.goals) == 2
    (_, left), (_, right) = st.goals
    assert left == Sequent((xv,), (("H1", mk_app(P1, xv)),), mk_app(R1, xv))
    assert right.hyp("H2") == mk_app(R1, xv)
    assert right.goal == mk_app(Q1, xv)


def test_cut_validates_formula():
    seq = Sequent((), (), TT)
    with pytest.raises(KernelError, match="not of type o"):
        K.apply_cut(state_for(seq), 0, A0)
    with pytest.raises(KernelError, match="unknown variables"):
        K.apply_cut(state_for(seq), 0, mk_app(P1, Var("Y", TM)))


def test_propositional_rules():
    seq = Sequent((), (("H1", conj(mk_app(P1, A0), mk_app(Q1, A0))),),
                  disj(mk_app(Q1, A0), FF))
    st = state_for(seq)
    st = K.and_l(st, 0, "H1", 1)
    st = K.or_r(st, st.goals[0][0], 0)
    st = K.apply_id(st, st.goals[0][0], "H1")
    assert st.done()

    seq = Sequent((), (("H1", disj(FF, TT)),), TT)
    st = K.or_l(state_for(seq), 0, "H1")
    assert len(st.goals) == 2
    st = K.ff_l(st, st.goals[0][0], "H1")
    st = K.tt_r(st, st.goals[0][0])
    assert st.done()

    seq = Sequent((), (), conj(TT, TT))
    st = K.and_r(state_for(seq), 0)
    assert len(st.goals) == 2


def test_implication_rules():
    pa, qa = mk_app(P1, A0), mk_app(Q1, A0)
    seq = Sequent((), (("H1", imp(pa, qa)), ("H2", pa)), qa)
    st = K.imp_l(state_for(seq), 0, "H1")
    (_, left), (_, right) = st.goals
    assert left.goal == pa and left.hyp("H1") == imp(pa, qa)
    assert right.hyp("H1") == qa
    st = K.apply_id(st, st.goals[0][0], "H2")
    st = K.apply_id(st, st.goals[0][0], "H1")
    assert st.done()

    seq = Sequent((), (), imp(pa, pa))
    st = K.imp_r(state_for(seq), 0)
    assert st.goals[0][1].hyp("H1") == pa
    st = K.apply_id(st, st.goals[0][0], "H1")
    assert st.done()


def test_rule_shape_errors():
    seq = Sequent((), (("H1", TT),), FF)
    st = state_for(seq)
    for call in [
        lambda: K.tt_r(st, 0),
        lambda: K.ff_l(st, 0, "H1"),
        lambda: K.and_l(st, 0, "H1", 0),
        lambda: K.and_r(st, 0),
        lambda: K.or_l(st, 0, "H1"),
        lambda: K.or_r(st, 0, 0),
        lambda: K.imp_l(st, 0, "H1"),
        lambda: K.imp_r(st, 0),
        lambda: K.all_l(st, 0, "H1", A0),
        lambda: K.all_r(st, 0),
        lambda: K.exists_l(st, 0, "H1"),
        lambda: K.exists_r(st, 0, A0),
        lambda: K.nabla_l(st, 0, "H1"),
        lambda: K.nabla_r(st, 0),
        lambda: K.nat_r(st, 0),
        lambda: K.nat_l(st, 0, "H1", Lam(NT, TT)),
    ]:
        with pytest.raises(KernelError):
            call()
    with pytest.raises(KernelError, match="no open subgoal"):
        K.tt_r(st, 99)
    with pytest.raises(KeyError, match="no hypothesis"):
        K.ff_l(st, 0, "H9")


# ---------------------------------------------------------------------------
# quantifier rules
# ---------------------------------------------------------------------------

def test_all_r_raises_over_support():
    # forall x, p x applied under a pre-existing nominal: the new
    # eigenvariable is raised over that nominal.
    xv = Var("x", TM)
    seq = Sequent((), (), forall(xv, mk_app(D2, xv, n1)))
    st = K.all_r(state_for(seq), 0)
    _, p = st.goals[0]
    hv = Var("x", arrow(TM, TM))
    assert p.vars == (hv,)
    assert p.goal == mk_app(D2, mk_app(hv, n1), n1)


def test_all_r_closed_body_plain_variable():
    xv = Var("x", TM)
    seq = Sequent((), (), forall(xv, mk_app(P1, xv)))
    st = K.all_r(state_for(seq), 0)
    _, p = st.goals[0]
    assert p.vars == (Var("x", TM),)
    assert p.goal == mk_app(P1, Var("x", TM))


def test_exists_l_raises_over_support():
    xv = Var("x", TM)
    seq = Sequent((), (("H1", exists(xv, mk_app(D2, xv, n1))),), FF)
    st = K.exists_l(state_for(seq), 0, "H1")
    _, p = st.goals[0]
    hv = Var("x", arrow(TM, TM))
    assert p.vars == (hv,)
    assert p.hyp("H1") == mk_app(D2, mk_app(hv, n1), n1)


def test_exists_r_and_all_l_witnesses():
    xv = Var("x", TM)
    wv = Var("W", TM)
    seq = Sequent((wv,), (("H1", forall(xv, mk_app(P1, xv))),),
                  exists(xv, mk_app(P1, xv)))
    st = K.exists_r(state_for(seq), 0, mk_app(F1, wv))
    assert st.goals[0][1].goal == mk_app(P1, mk_app(F1, wv))
    st = K.all_l(st, st.goals[0][0], "H1", mk_app(F1, wv))
    st = K.apply_id(st, st.goals[0][0], "H1")
    assert st.done()


def test_witness_validation():
    xv = Var("x", TM)
    seq = Sequent((), (), exists(xv, mk_app(P1, xv)))
    st = state_for(seq)
    with pytest.raises(KernelError, match="has type"):
        K.exists_r(st, 0, Z)
    with pytest.raises(KernelError, match="unknown variables"):
        K.exists_r(st, 0, Var("Y", TM))
    # a nominal is a fine witness
    st2 = K.exists_r(st, 0, n1)
    assert st2.goals[0][1].goal == mk_app(P1, n1)


def test_witness_type_must_avoid_o():
    pv = Var("P", OTY)
    seq = Sequent((), (), exists(pv, disj(pv, TT)))
    with pytest.raises(KernelError, match="containing o"):
        K.exists_r(state_for(seq), 0, TT)


def test_nabla_rules():
    xv = Var("x", TM)
    seq = Sequent((), (), nabla(xv, mk_app(D2, xv, n1)))
    st = K.nabla_r(state_for(seq), 0)
    assert st.goals[0][1].goal == mk_app(D2, n2, n1)

    st = K.nabla_r(state_for(seq), 0, Nominal(5, TM))
    assert st.goals[0][1].goal == mk_app(D2, Nominal(5, TM), n1)

    with pytest.raises(KernelError, match="already occurs"):
        K.nabla_r(state_for(seq), 0, n1)
    with pytest.raises(KernelError, match="not a nominal"):
        K.nabla_r(state_for(seq), 0, A0)

    seq = Sequent((), (("H1", nabla(xv, mk_app(P1, xv))),), FF)
    st = K.nabla_l(state_for(seq), 0, "H1")
    assert st.goals[0][1].hyp("H1") == mk_app(P1, n1)


def test_contract_and_lemma():
    seq = Sequent((), (("H1", mk_app(P1, A0)),), FF)
    st = K.contract(state_for(seq), 0, "H1")
    p = st.goals[0][1]
    assert p.hyp("H2") == mk_app(P1, A0)

    lemma = forall(Var("x", TM), imp(mk_app(P1, Var("x", TM)),
                                     mk_app(Q1, Var("x", TM))))
    st = K.use_lemma(state_for(seq, lemmas=(("pq", lemma),)), 0, "pq")
    assert st.goals[0][1].hyp("H2") == lemma
    with pytest.raises(KernelError, match="no lemma"):
        K.use_lemma(state_for(seq), 0, "pq")


# ---------------------------------------------------------------------------
# natural number rules
# ---------------------------------------------------------------------------

def test_nat_r_chain():
    seq = Sequent((), (), mk_app(NAT, mk_app(S, mk_app(S, Z))))
    st = state_for(seq)
    st = K.nat_r(st, 0)
    st = K.nat_r(st, st.goals[0][0])
    st = K.nat_r(st, st.goals[0][0])
    assert st.done()
    check_replay(st, state_for(seq))


def test_nat_r_stuck_argument():
    nv = Var("N", NT)
    seq = Sequent((nv,), (), mk_app(NAT, nv))
    with pytest.raises(KernelError, match="neither z nor a successor"):
        K.nat_r(state_for(seq), 0)


def test_nat_l_premise_shapes():
    nv = Var("N", NT)
    inv = Lam(NT, mk_app(P1, A0), "n")
    seq = Sequent((nv,), (("H1", mk_app(NAT, nv)),), mk_app(P1, A0))
    st = K.nat_l(state_for(seq), 0, "H1", inv)
    assert len(st.goals) == 3
    (_, base), (_, step), (_, main) = st.goals
    assert base == Sequent((), (), mk_app(P1, A0))
    # the step variable takes its name from the invariant's binder hint
    xv = Var("n", NT)
    assert step == Sequent((xv,), (("IH", mk_app(P1, A0)),), mk_app(P1, A0))
    assert main == Sequent((nv,), (("H1", mk_app(P1, A0)),), mk_app(P1, A0))


def test_nat_l_invariant_validation():
    nv = Var("N", NT)
    seq = Sequent((nv,), (("H1", mk_app(NAT, nv)),), TT)
    st = state_for(seq)
    with pytest.raises(KernelError, match="nt -> o"):
        K.nat_l(st, 0, "H1", Lam(TM, TT))
    with pytest.raises(KernelError, match="eigenvariables"):
        K.nat_l(st, 0, "H1", Lam(NT, mk_app(P1, Var("W", TM))))
    # nominals in the invariant are allowed
    st2 = K.nat_l(st, 0, "H1", Lam(NT, mk_app(P1, n1)))
    assert len(st2.goals) == 3


def test_nat_l_proves_nat_double():
    # nat N |- nat (s (s N)) by induction with the goal as invariant.
    nv = Var("N", NT)
    seq = Sequent((nv,), (("H1", mk_app(NAT, nv)),),
                  mk_app(NAT, mk_app(S, mk_app(S, nv))))
    inv = Lam(NT, mk_app(NAT, mk_app(S, mk_app(S, Bound(0)))), "n")
    st0 = state_for(seq)
    st = K.nat_l(st0, 0, "H1", inv)
    g_base, g_step, g_main = [g for g, _ in st.goals]
    # base: nat (s (s z))
    st = K.nat_r(st, g_base)
    st = K.nat_r(st, st.goals[0][0])
    st = K.nat_r(st, st.goals[0][0])
    # step: nat (s (s x)) |- nat (s (s (s x)))
    st = K.nat_r(st, g_step)
    st = K.apply_id(st, st.goals[0][0], "IH")
    # main: nat (s (s N)) |- nat (s (s N))
    st = K.apply_id(st, g_main, "H1")
    assert st.done()
    check_replay(st, st0)


# ---------------------------------------------------------------------------
# state management and replay
# ---------------------------------------------------------------------------

def test_initial_state_validation():
    with pytest.raises(KernelError, match="free variables"):
        K.initial_state({}, (), mk_app(P1, Var("X", TM)))
    with pytest.raises(KernelError, match="not a formula"):
        K.initial_state({}, (), A0)
    st = K.initial_state({}, (), imp(TT, TT))
    assert st.goals[0][1] == Sequent((), (), imp(TT, TT))


def test_goal_ids_are_stable():
    seq = Sequent((), (), conj(TT, conj(TT, TT)))
    st = K.initial_state({}, (), conj(TT, conj(TT, TT)))
    st = K.and_r(st, 0)
    assert st.goal_ids() == [1, 2]
    st = K.and_r(st, 2)
    assert st.goal_ids() == [1, 3, 4]
    st = K.tt_r(st, 3)
    assert st.goal_ids() == [1, 4]


def test_replay_full_proof():
    # forall x, p x => p x
    xv = Var("x", TM)
    thm = forall(xv, imp(mk_app(P1, xv), mk_app(P1, xv)))
    st0 = K.initial_state({}, (), thm)
    st = K.all_r(st0, 0)
    st = K.imp_r(st, st.goals[0][0])
    st = K.apply_id(st, st.goals[0][0], "H1")
    assert st.done()
    check_replay(st, st0)
