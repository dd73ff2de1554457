"""Tests for formulas, sequents, definitions, and raising."""

import pytest

from genlog.terms import (
    Base, Bound, Const, Lam, Nominal, Var,
    abstract_over, apply_subst, arrow, instantiate, mk_app, supp,
    OTY,
)
from genlog.logic import (
    Clause, DefError, Definition, Sequent, StratificationError,
    FF, TT,
    atom_pred, check_clause, conj, disj, eq, eq_mod_perm, exists, forall,
    formula_level, imp, infer_levels, nabla, quant_const, raise_clause,
    raise_sequent, view,
)

I = Base("i")
P = Const("p", arrow(I, OTY))
Q = Const("q", OTY)
R = Const("r", arrow(I, I, OTY))
F_ = Const("f", arrow(I, I))
A = Const("a", I)
N1 = Nominal(1, I)
N2 = Nominal(2, I)


def test_view_connectives():
    assert view(TT) == ("tt",)
    assert view(FF) == ("ff",)
    assert view(conj(Q, TT)) == ("and", Q, TT)
    assert view(disj(Q, FF)) == ("or", Q, FF)
    assert view(imp(Q, FF)) == ("imp", Q, FF)
    assert view(eq(A, N1)) == ("eq", A, N1)


def test_view_quantifier_and_instantiate():
    x = Var("x", I)
    f = forall(x, mk_app(P, x))
    tag, ty, abs_ = view(f)
    assert tag == "forall" and ty == I
    assert instantiate(abs_, A) == mk_app(P, A)
    assert "x" not in str(abs_) or True  # x is captured, not free
    tag2, _, abs2 = view(exists(x, eq(x, A)))
    assert tag2 == "exists" and instantiate(abs2, N1) == eq(N1, A)
    tag3, _, abs3 = view(nabla(x, mk_app(P, x)))
    assert tag3 == "nabla" and instantiate(abs3, N2) == mk_app(P, N2)


def test_view_eta_short_quantifier_argument():
    f = mk_app(quant_const("forall", I), P)
    tag, ty, abs_ = view(f)
    assert tag == "forall" and ty == I
    assert isinstance(abs_, Lam) and abs_.body == mk_app(P, Bound(0))


def test_atom_view():
    f = mk_app(R, A, N1)
    assert view(f) == ("atom", R, [A, N1])
    assert atom_pred(f) == "r"
    assert atom_pred(conj(Q, Q)) is None


def test_abstract_over_captures():
    x = Var("x", I)
    lam = abstract_over(mk_app(R, x, A), x)
    assert lam == Lam(I, mk_app(R, Bound(0), A), "x")
    assert instantiate(lam, N1) == mk_app(R, N1, A)


# ---------------------------------------------------------------------------
# sequents
# ---------------------------------------------------------------------------

def _seq():
    x = Var("X", I)
    return Sequent((x,), (("H1", mk_app(P, x)), ("H2", mk_app(P, N1))),
                   mk_app(R, x, N1))


def test_sequent_accessors():
    seq = _seq()
    assert seq.hyp("H2") == mk_app(P, N1)
    with pytest.raises(KeyError):
        seq.hyp("H9")
    assert seq.hyp_names() == ["H1", "H2"]
    assert seq.var_names() == {"X"}
    assert seq.supp() == frozenset({N1})


def test_sequent_hyp_management():
    seq = _seq()
    seq2, names = seq.add_hyps([Q, TT])
    assert names == ["H3", "H4"]
    assert seq2.hyp("H3") == Q and seq2.hyp("H4") == TT
    seq3 = seq2.remove_hyps(["H1", "H4"])
    assert seq3.hyp_names() == ["H2", "H3"]
    seq4 = seq3.replace_hyp("H2", FF)
    assert seq4.hyp("H2") == FF
    with pytest.raises(KeyError):
        seq3.replace_hyp("H8", FF)


def test_sequent_apply_updates_signature():
    seq = _seq()
    w = Var("W", I)
    theta = {"X": mk_app(F_, w)}
    seq2 = seq.apply(theta)
    assert seq2.var_names() == {"W"}
    assert seq2.hyp("H1") == mk_app(P, mk_app(F_, w))
    assert seq2.goal == mk_app(R, mk_app(F_, w), N1)


def test_sequent_permute():
    from genlog.terms import Permutation
    seq = _seq()
    pi = Permutation.of({N1: N2, N2: N1})
    seq2 = seq.permute(pi)
    assert seq2.hyp("H2") == mk_app(P, N2)
    assert seq2.goal == mk_app(R, Var("X", I), N2)


# ---------------------------------------------------------------------------
# definitions
# ---------------------------------------------------------------------------

def _member_def():
    el = Base("i")
    lst = Base("list")
    cns = Const("cons", arrow(el, lst, lst))
    mem = Const("member", arrow(el, lst, OTY))
    x, l = Var("X", el), Var("L", lst)
    y = Var("Y", el)
    c1 = Clause("member", (x, l), (), mk_app(mem, x, mk_app(cns, x, l)), TT)
    c2 = Clause("member", (x, y, l), (),
                mk_app(mem, x, mk_app(cns, y, l)), mk_app(mem, x, l))
    return Definition("member", arrow(el, lst, OTY), (c1, c2))


def test_check_clause_accepts_member():
    for cl in _member_def().clauses:
        check_clause(cl)


def test_check_clause_accepts_nabla_head():
    # nabla x, fresh x E := tt
    tm = Base("tm")
    fr = Const("fresh", arrow(tm, tm, OTY))
    zx = Var("x", tm)
    e = Var("E", tm)
    check_clause(Clause("fresh", (e,), (zx,), mk_app(fr, zx, e), TT))


def test_check_clause_rejects_nominal():
    cl = Clause("p", (), (), mk_app(P, N1), TT)
    with pytest.raises(DefError):
        check_clause(cl)


def test_check_clause_rejects_nabla_var_in_body():
    zx = Var("x", I)
    cl = Clause("p", (), (zx,), mk_app(P, zx), mk_app(P, zx))
    with pytest.raises(DefError):
        check_clause(cl)


def test_check_clause_rejects_unbound_body_var():
    x, y = Var("X", I), Var("Y", I)
    cl = Clause("p", (x,), (), mk_app(P, x), mk_app(P, y))
    with pytest.raises(DefError):
        check_clause(cl)


def test_check_clause_rejects_wrong_head():
    x = Var("X", I)
    cl = Clause("p", (x,), (), mk_app(R, x, x), TT)
    with pytest.raises(DefError):
        check_clause(cl)


def test_formula_level():
    levels = {"q": 0, "high": 2}
    hi = Const("high", OTY)
    assert formula_level(Q, levels) == 0
    assert formula_level(imp(Q, FF), levels) == 1
    assert formula_level(imp(imp(Q, FF), FF), levels) == 2
    assert formula_level(imp(Q, imp(Q, Q)), levels) == 1
    assert formula_level(conj(imp(Q, FF), hi), levels) == 2
    x = Var("x", I)
    assert formula_level(forall(x, imp(mk_app(P, x), FF)), levels) == 1
    assert formula_level(eq(A, A), levels) == 0


def test_infer_levels_base():
    defs = {"member": _member_def()}
    out = infer_levels(defs)
    assert out["member"].level == 0


def test_infer_levels_implication_body():
    # c L := forall x, member x L => q  has level 1
    lst = Base("list")
    mem = Const("member", arrow(I, lst, OTY))
    c = Const("c", arrow(lst, OTY))
    l = Var("L", lst)
    x = Var("x", I)
    body = forall(x, imp(mk_app(mem, x, l), Q))
    defs = {
        "member": _member_def(),
        "c": Definition("c", arrow(lst, OTY),
                        (Clause("c", (l,), (), mk_app(c, l), body),)),
    }
    out = infer_levels(defs)
    assert out["member"].level == 0
    assert out["c"].level == 1


def test_infer_levels_chain():
    p1 = Const("p1", OTY)
    p2 = Const("p2", OTY)
    defs = {
        "p1": Definition("p1", OTY, (Clause("p1", (), (), p1, imp(Q, FF)),)),
        "p2": Definition("p2", OTY, (Clause("p2", (), (), p2, imp(p1, FF)),)),
    }
    out = infer_levels(defs)
    assert out["p1"].level == 1 and out["p2"].level == 2


def test_infer_levels_rejects_self_negation():
    bad = Const("bad", OTY)
    defs = {"bad": Definition("bad", OTY,
                              (Clause("bad", (), (), bad, imp(bad, FF)),))}
    with pytest.raises(StratificationError) as exc:
        infer_levels(defs)
    assert "bad" in str(exc.value)


def test_infer_levels_mutual_recursion():
    nt = Base("nt")
    ev = Const("even", arrow(nt, OTY))
    od = Const("odd", arrow(nt, OTY))
    sc = Const("sc", arrow(nt, nt))
    zc = Const("zc", nt)
    n = Var("N", nt)
    defs = {
        "even": Definition("even", arrow(nt, OTY), (
            Clause("even", (), (), mk_app(ev, zc), TT),
            Clause("even", (n,), (), mk_app(ev, mk_app(sc, n)),
                   mk_app(od, n)),
        )),
        "odd": Definition("odd", arrow(nt, OTY), (
            Clause("odd", (n,), (), mk_app(od, mk_app(sc, n)),
                   mk_app(ev, n)),
        )),
    }
    out = infer_levels(defs)
    assert out["even"].level == 0 and out["odd"].level == 0


# ---------------------------------------------------------------------------
# raising
# ---------------------------------------------------------------------------

def test_raise_sequent():
    seq = _seq()
    raised, sigma = raise_sequent(seq, [N2])
    assert len(raised.vars) == 1
    h = raised.vars[0]
    assert h.ty == arrow(I, I)
    assert sigma["X"] == mk_app(h, N2)
    assert raised.hyp("H1") == mk_app(P, mk_app(h, N2))
    # support only grows by the raising nominals
    assert raised.supp() - {N2} == seq.supp() - {N2}
    # raising over nothing is the identity
    same, sigma0 = raise_sequent(seq, [])
    assert same == seq and sigma0 == {}


def test_raise_clause():
    cl = _member_def().clauses[1]
    out = raise_clause(cl, [N1], {"X", "Y", "L"})
    assert len(out.uvars) == len(cl.uvars)
    for v in out.uvars:
        assert v.name not in {"X", "Y", "L"}
        assert v.ty.left == I
    # instantiating the raised variables with constant functions restores
    # formulas of the original shape
    assert out.zvars == cl.zvars


# ---------------------------------------------------------------------------
# equality modulo a permutation
# ---------------------------------------------------------------------------

def test_eq_mod_perm_identity():
    t = mk_app(R, N1, N2)
    pi = eq_mod_perm(t, t)
    assert pi is not None and pi.is_identity()


def test_eq_mod_perm_swap():
    pi = eq_mod_perm(mk_app(R, N1, N2), mk_app(R, N2, N1))
    assert pi is not None
    assert pi(N1) == N2 and pi(N2) == N1


def test_eq_mod_perm_none():
    assert eq_mod_perm(mk_app(R, N1, N1), mk_app(R, N1, N2)) is None
    assert eq_mod_perm(mk_app(P, A), mk_app(P, N1)) is None


def test_eq_mod_perm_mixed_types():
    j = Base("j")
    d1, d2 = Nominal(1, j), Nominal(2, j)
    g2 = Const("g2", arrow(I, j, OTY))
    s = conj(mk_app(g2, N1, d1), mk_app(g2, N2, d2))
    t = conj(mk_app(g2, N2, d2), mk_app(g2, N1, d1))
    pi = eq_mod_perm(s, t)
    assert pi is not None
    assert pi(N1) == N2 and pi(d1) == d2
