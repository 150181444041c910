import random
from fractions import Fraction

import pytest

import oracles
from clog import syntax
from clog.semantics import (
    BudgetExceeded,
    entails_semantic,
    entails_witness,
    enumerate_branches,
    evaluate,
    is_satisfiable,
    is_valid,
    sup_value,
    unsat_witness,
)
from clog.syntax import Atom, Neg, monus_chain, parse_formula


def F(text):
    return parse_formula(text)


def test_eval_worked_examples():
    assert evaluate(F("neg p"), {"p": Fraction(3, 10)}) == Fraction(7, 10)
    assert evaluate(F("(p - q)"), {"p": Fraction(7, 10), "q": Fraction(3, 10)}) == Fraction(2, 5)
    # 1 - 2*(1 - 2*p) at p = 1/4 (nested two-step chains)
    p = Atom("p")
    inner = monus_chain(syntax.one(), 2, p)
    f = monus_chain(syntax.one(), 2, inner)
    assert evaluate(f, {"p": Fraction(1, 4)}) == 0
    assert evaluate(f, {"p": Fraction(1, 3)}) == Fraction(1, 3)
    with pytest.raises(ValueError):
        evaluate(F("p"), {"p": Fraction(3, 2)})


def test_eval_matches_oracle_on_random_formulas():
    rng = random.Random(23)
    for _ in range(200):
        f = oracles.random_core_formula(rng, 5, ["p", "q", "r"])
        assignment = {a: oracles.random_rational(rng) for a in ["p", "q", "r"]}
        assert evaluate(f, assignment) == oracles.eval_fraction(f, assignment)


def test_sugar_semantics():
    rng = random.Random(5)
    p, q = Atom("p"), Atom("q")
    for _ in range(100):
        vp, vq = oracles.random_rational(rng), oracles.random_rational(rng)
        env = {"p": vp, "q": vq}
        assert evaluate(syntax.conj(p, q), env) == min(vp, vq)
        assert evaluate(syntax.disj(p, q), env) == max(vp, vq)
        assert evaluate(syntax.abs_diff(p, q), env) == abs(vp - vq)
        assert evaluate(syntax.truncated_add(p, q), env) == min(1, vp + vq)
    for n in range(6):
        assert evaluate(syntax.dyadic(n), {}) == Fraction(1, 2**n)
    assert evaluate(syntax.times_chain(3, p), {"p": Fraction(2, 5)}) == 1
    assert evaluate(syntax.times_chain(2, p), {"p": Fraction(2, 5)}) == Fraction(4, 5)


def test_eval_is_1_lipschitz_in_each_atom():
    rng = random.Random(77)
    for _ in range(60):
        f = oracles.random_core_formula(rng, 5, ["p", "q"])
        e1 = {a: oracles.random_rational(rng) for a in ["p", "q"]}
        e2 = dict(e1)
        e2["p"] = oracles.random_rational(rng)
        diff = abs(evaluate(f, e1) - evaluate(f, e2))
        assert diff <= abs(e1["p"] - e2["p"])


def test_branch_cells_cover_box_and_agree_with_eval():
    rng = random.Random(13)
    for _ in range(40):
        f = oracles.random_core_formula(rng, 4, ["p", "q"], monus_cap=6)
        cells = enumerate_branches(f)
        for _ in range(10):
            env = {a: oracles.random_rational(rng) for a in ["p", "q"]}
            v = evaluate(f, env)
            covering = [
                c
                for c in cells
                if all(a.evaluate(env) >= 0 for a in c.constraints)
            ]
            assert covering, "assignment not covered by any branch cell"
            for c in covering:
                assert c.value.evaluate(env) == v


def test_branch_cell_shapes():
    # (p - q): zero cell has value 0, positive cell has value p - q
    cells = enumerate_branches(F("(p - q)"))
    assert len(cells) == 2
    values = sorted(str(c.value) for c in cells)
    assert any(c.value.is_zero() for c in cells)


def test_sup_examples():
    v, w = sup_value(F("|p - 2^-1|"))
    assert v == Fraction(1, 2)
    assert w["p"] in (0, 1)
    v, _ = sup_value(F("( (p - q) - p )"))
    assert v == 0
    v, w = sup_value(F("(p /\\ neg p)"))
    assert v == Fraction(1, 2)
    assert w["p"] == Fraction(1, 2)


def test_validity_examples():
    ok, _ = is_valid(F("( (p - q) - p )"))
    assert ok
    ok, cx = is_valid(F("(p - q)"))
    assert not ok
    assert evaluate(F("(p - q)"), cx) > 0
    ok, _ = is_valid(F("( (half p - half q) - (p - q) )"))
    assert ok


def test_validity_against_grid_oracle():
    rng = random.Random(99)
    n_invalid = 0
    for _ in range(150):
        f = oracles.random_core_formula(rng, 5, ["p", "q"], monus_cap=8)
        valid, cx = is_valid(f)
        sup, _ = oracles.grid_sup_fractions(f, syntax.atom_names(f), 8)
        if sup > 0:
            assert not valid
        if not valid:
            n_invalid += 1
            assert oracles.eval_fraction(f, cx) > 0
        else:
            assert sup == 0
    assert n_invalid > 30  # random formulas should produce plenty of refutations


def test_sup_agrees_with_grid_on_dyadic_formulas():
    # formulas without Half have breakpoints on small grids: denominator 6
    # covers every vertex of formulas with at most 3 atoms here
    rng = random.Random(3)
    for _ in range(40):
        f = oracles.random_core_formula(rng, 4, ["p", "q"], monus_cap=6)
        if any(isinstance(g, syntax.Half) for g in syntax.subformulas(f)):
            continue
        v, w = sup_value(f)
        gv, _ = oracles.grid_sup_fractions(f, syntax.atom_names(f), 6)
        assert v >= gv
        assert evaluate(f, w) == v


def test_satisfiability():
    assert is_satisfiable([])
    assert is_satisfiable([F("p"), F("(q - p)")])
    assert not is_satisfiable([F("p"), F("neg p")])
    assert is_satisfiable([F("|p - half neg p|")])  # zero exactly at p = 1/3
    assert not is_satisfiable([F("2^-3")])


def test_entailment_examples():
    ok, _ = entails_semantic([F("p")], F("half p"))
    assert ok
    # 1 - 2(1 - p) forces p <= 1/2 only; p itself does not follow
    prem = monus_chain(syntax.one(), 2, monus_chain(syntax.one(), 1, Atom("p")))
    ok, cx = entails_semantic([prem], Atom("p"))
    assert not ok
    assert evaluate(prem, cx) == 0
    assert evaluate(Atom("p"), cx) > 0
    assert cx["p"] == Fraction(1, 2)
    ok, _ = entails_semantic([], F("(p - p)"))
    assert ok
    ok, cx = entails_semantic([], F("p"))
    assert not ok


def test_entailment_witness_examples():
    assert entails_witness([F("p")], F("half p"), cap=8) == 1
    assert entails_witness([F("p")], F("p"), cap=8) == 1  # p - p is valid, p alone is not
    # valid goals need m = 0 even with premises
    assert entails_witness([F("q")], F("(p - p)"), cap=8) == 0
    # half p |= p: subtracting the premise twice recovers p exactly
    assert entails_witness([F("half p")], F("p"), cap=6) == 2
    # max(0, 2p - 1) vanishes on all of [0, 1/2], so it cannot pin p to 0
    prem = monus_chain(syntax.one(), 2, monus_chain(syntax.one(), 1, Atom("p")))
    assert entails_witness([prem], Atom("p"), cap=12) is None


def test_unsat_witness_examples():
    assert unsat_witness([F("p"), F("neg p")], cap=4) == 1
    assert unsat_witness([F("neg half p")], cap=8) == 2
    assert unsat_witness([F("p")], cap=4) is None  # satisfiable set has none
    assert unsat_witness([], cap=4) is None


def test_witness_agrees_with_entailment_on_random_pairs():
    rng = random.Random(41)
    agreements = 0
    for _ in range(30):
        prem = oracles.random_core_formula(rng, 3, ["p", "q"], monus_cap=4)
        goal = oracles.random_core_formula(rng, 3, ["p", "q"], monus_cap=4)
        sem, _ = entails_semantic([prem], goal)
        m = entails_witness([prem], goal, cap=10)
        if sem:
            assert m is not None
        if m is not None:
            assert sem
            agreements += 1
    assert agreements > 5


def test_budget_enforcement():
    f = monus_chain(Atom("p"), 5, Atom("q"))
    with pytest.raises(BudgetExceeded):
        is_valid(f, budget=4)
    # shared subterms count once: f - f adds only the root split on top of f's five
    ok, _ = is_valid(syntax.Monus(f, f), budget=6)
    assert ok is True
    with pytest.raises(BudgetExceeded):
        is_valid(syntax.Monus(f, f), budget=5)


def test_entails_rejects_nonpropositional_premises():
    from clog.syntax import parse_lformula

    with pytest.raises(TypeError):
        entails_semantic([parse_lformula("inf x. P(x)")], F("p"))
