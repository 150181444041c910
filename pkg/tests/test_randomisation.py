import itertools
import random

import pytest

from clog import randomisation as rd
from clog.rationals import rat
from clog.rv import FiniteProbSpace, expectation
from clog.syntax import (
    Const0,
    Half,
    Inf,
    Monus,
    Neg,
    Pred,
    Signature,
    Sup,
    Var,
    parse_lformula,
)


def line_metric(points):
    """A metric table from positions on [0,1]: max(|r_u - r_v|, 1/8) off the
    diagonal (still a metric, and it keeps distinct points apart)."""
    floor = rat(1, 8)
    n = len(points)
    return [
        [
            rat(0) if i == j else max(abs(points[i] - points[j]), floor)
            for j in range(n)
        ]
        for i in range(n)
    ]


def lipschitz_repair(values, metric, ids, lam):
    """Largest lam-Lipschitz function below the given values (exact)."""
    return {
        (u,): min(
            values[v] + lam * metric[ids.index(u)][ids.index(v)] for v in ids
        )
        for u in ids
    }


SIG = Signature(predicates={"P": [rat(1)]})


def random_structure(rng, signature=SIG, max_universe=3):
    n = rng.randint(1, max_universe)
    ids = ["e%d" % i for i in range(n)]
    positions = rng.sample([rat(k, 8) for k in range(9)], n)
    metric = line_metric(positions)
    predicates = {}
    for name, lam in signature.predicates.items():
        base = {u: rat(rng.randint(0, 8), 8) for u in ids}
        table = lipschitz_repair(base, metric, ids, min(lam))
        if len(lam) == 1:
            predicates[name] = table
        else:  # pragma: no cover - only unary predicates in these tests
            raise NotImplementedError
    functions = {}
    for name, lam in signature.functions.items():
        # constant maps satisfy any modulus
        target = rng.choice(ids)
        functions[name] = {
            key: target for key in itertools.product(ids, repeat=len(lam))
        }
    return rd.FiniteLStructure(
        signature, ids, predicates=predicates, functions=functions, metric=metric
    )


def random_family(rng, signature=SIG, max_atoms=3, max_universe=3):
    import oracles

    n = rng.randint(1, max_atoms)
    ws = oracles.random_weights(rng, n)
    space = FiniteProbSpace([("w%d" % i, w) for i, w in enumerate(ws)])
    return rd.RandomFamily(
        space, [random_structure(rng, signature, max_universe) for _ in range(n)]
    )


def random_section(rng, family):
    return rd.Section(family, [rng.choice(s.universe) for s in family.structures])


def random_lformula(rng, scope, max_depth, max_quants):
    """A random first-order formula over P/d with bounded quantifier count."""

    def atomic(scope):
        if not scope:
            return Const0()
        if rng.random() < 0.6:
            return Pred("P", (Var(rng.choice(scope)),))
        return Pred("d", (Var(rng.choice(scope)), Var(rng.choice(scope))))

    fresh = itertools.count()

    def gen(scope, depth, quants):
        if depth == 0 or rng.random() < 0.2:
            return atomic(scope), quants
        roll = rng.random()
        if quants > 0 and roll < 0.35:
            var = "q%d" % next(fresh)
            body, quants = gen(scope + [var], depth - 1, quants - 1)
            return (Inf if rng.random() < 0.5 else Sup)(var, body), quants
        if roll < 0.55:
            body, quants = gen(scope, depth - 1, quants)
            return (Neg if rng.random() < 0.5 else Half)(body), quants
        left, quants = gen(scope, depth - 1, quants)
        right, quants = gen(scope, depth - 1, quants)
        return Monus(left, right), quants

    formula, _ = gen(list(scope), max_depth, max_quants)
    return formula


def two_point_family():
    m1 = rd.FiniteLStructure(
        SIG, ["u", "v"],
        predicates={"P": {("u",): rat(1, 4), ("v",): rat(3, 4)}},
        metric=[[0, rat(1, 2)], [rat(1, 2), 0]],
    )
    m2 = rd.FiniteLStructure(
        SIG, ["a", "b", "c"],
        predicates={"P": {("a",): 0, ("b",): rat(1, 2), ("c",): 1}},
        metric=[
            [0, rat(1, 2), 1],
            [rat(1, 2), 0, rat(1, 2)],
            [1, rat(1, 2), 0],
        ],
    )
    space = FiniteProbSpace.uniform(["w1", "w2"])
    return rd.RandomFamily(space, [m1, m2])


# ---- structures -----------------------------------------------------------


def test_structure_validation():
    with pytest.raises(ValueError):
        rd.FiniteLStructure(SIG, [], metric=[])
    with pytest.raises(ValueError):  # asymmetric
        rd.FiniteLStructure(
            SIG, ["u", "v"],
            predicates={"P": {("u",): 0, ("v",): 0}},
            metric=[[0, rat(1, 2)], [rat(1, 4), 0]],
        )
    with pytest.raises(ValueError):  # distinct points at distance 0
        rd.FiniteLStructure(
            SIG, ["u", "v"],
            predicates={"P": {("u",): 0, ("v",): 0}},
            metric=[[0, 0], [0, 0]],
        )
    with pytest.raises(ValueError):  # triangle inequality
        rd.FiniteLStructure(
            SIG, ["u", "v", "w"],
            predicates={"P": {("u",): 0, ("v",): 0, ("w",): 0}},
            metric=[
                [0, rat(1, 8), 1],
                [rat(1, 8), 0, rat(1, 8)],
                [1, rat(1, 8), 0],
            ],
        )
    with pytest.raises(ValueError):  # missing predicate entry
        rd.FiniteLStructure(
            SIG, ["u", "v"],
            predicates={"P": {("u",): 0}},
            metric=[[0, 1], [1, 0]],
        )


def test_lipschitz_enforced_at_load():
    # P jumps a full unit over a distance of 1/2: violates lambda = 1
    with pytest.raises(ValueError):
        rd.FiniteLStructure(
            SIG, ["u", "v"],
            predicates={"P": {("u",): 0, ("v",): 1}},
            metric=[[0, rat(1, 2)], [rat(1, 2), 0]],
        )
    # a function must move points by at most lambda * d
    sig = Signature(functions={"f": [rat(1)]}, predicates={"P": [rat(1)]})
    with pytest.raises(ValueError):
        rd.FiniteLStructure(
            sig, ["u", "v", "w"],
            predicates={"P": {("u",): 0, ("v",): 0, ("w",): 0}},
            functions={"f": {("u",): "u", ("v",): "w", ("w",): "w"}},
            metric=[
                [0, rat(1, 8), 1],
                [rat(1, 8), 0, 1],
                [1, 1, 0],
            ],
        )


def test_function_tables_and_terms():
    sig = Signature(functions={"f": [rat(2)]}, predicates={"P": [rat(1)]})
    m = rd.FiniteLStructure(
        sig, ["u", "v"],
        predicates={"P": {("u",): rat(1, 2), ("v",): rat(3, 4)}},
        functions={"f": {("u",): "v", ("v",): "u"}},
        metric=[[0, rat(1, 2)], [rat(1, 2), 0]],
    )
    space = FiniteProbSpace([("w", 1)])
    fam = rd.RandomFamily(space, [m])
    sec = rd.Section(fam, ["u"])
    phi = parse_lformula("P(f(x))")
    assert rd.bracket(phi, {"x": sec}, fam).values == (rat(3, 4),)
    swap_twice = parse_lformula("d(f(f(x)), x)")
    assert rd.bracket(swap_twice, {"x": sec}, fam).values == (0,)


# ---- bracket --------------------------------------------------------------


def test_bracket_examples():
    fam = two_point_family()
    a = rd.Section(fam, ["u", "a"])
    assert rd.bracket(parse_lformula("P(x)"), {"x": a}, fam).values == (rat(1, 4), 0)
    assert rd.bracket(parse_lformula("d(x, x)"), {"x": a}, fam).values == (0, 0)
    got = rd.bracket(parse_lformula("inf x . P(x)"), {}, fam)
    assert got.values == (rat(1, 4), 0)
    got = rd.bracket(parse_lformula("sup x . P(x)"), {}, fam)
    assert got.values == (rat(3, 4), 1)


def test_bracket_errors():
    fam = two_point_family()
    a = rd.Section(fam, ["u", "a"])
    with pytest.raises(KeyError):
        rd.bracket(parse_lformula("P(x)"), {}, fam)
    with pytest.raises(ValueError):
        rd.bracket(parse_lformula("P(x, x)"), {"x": a}, fam)
    with pytest.raises(ValueError):
        rd.bracket(parse_lformula("Q(x)"), {"x": a}, fam)
    other = two_point_family()
    other_sec = rd.Section(other, ["u", "a"])
    # structurally equal families interoperate; a genuinely different one fails
    assert rd.bracket(parse_lformula("P(x)"), {"x": other_sec}, fam).values
    small = rd.RandomFamily(
        FiniteProbSpace([("z", 1)]), [fam.structures[0]]
    )
    with pytest.raises(ValueError):
        rd.bracket(parse_lformula("P(x)"), {"x": rd.Section(small, ["u"])}, fam)


def test_satisfaction_theorem_small():
    """Quantifiers over sections agree with pointwise quantifiers."""
    rng = random.Random(31)
    checked = 0
    for _ in range(25):
        fam = random_family(rng)
        env = {"x": random_section(rng, fam), "y": random_section(rng, fam)}
        phi = random_lformula(rng, ["x", "y"], max_depth=4, max_quants=2)
        inductive = rd.bracket_by_sections(phi, env, fam)
        pointwise = rd.bracket(phi, env, fam)
        assert inductive.values == pointwise.values
        checked += 1
    assert checked == 25


def test_quantifier_locality_on_glue():
    # atomic values through a glued section mix the two argument sections
    rng = random.Random(32)
    fam = two_point_family()
    atoms = fam.space.ids
    phi = parse_lformula("P(x)")
    for _ in range(10):
        a = random_section(rng, fam)
        b = random_section(rng, fam)
        va = rd.bracket(phi, {"x": a}, fam).values
        vb = rd.bracket(phi, {"x": b}, fam).values
        for k in range(len(atoms) + 1):
            for chosen in itertools.combinations(atoms, k):
                ev = frozenset(chosen)
                mixed = rd.bracket(phi, {"x": rd.glue(ev, a, b)}, fam).values
                want = tuple(
                    va[i] if atom in ev else vb[i]
                    for i, atom in enumerate(atoms)
                )
                assert mixed == want


# ---- distance and gluing ---------------------------------------------------


def test_distance_examples():
    fam = two_point_family()
    a = rd.Section(fam, ["u", "a"])
    b = rd.Section(fam, ["v", "c"])
    assert rd.distance(a, a, fam) == 0
    assert rd.distance(a, b, fam) == rat(3, 4)  # (1/2 + 1)/2
    c = rd.Section(fam, ["v", "a"])
    assert rd.distance(a, c, fam) == rat(1, 4)


def test_distance_is_a_metric_on_sections():
    rng = random.Random(33)
    for _ in range(8):
        fam = random_family(rng)
        secs = [random_section(rng, fam) for _ in range(3)]
        for s, t in itertools.product(secs, repeat=2):
            assert rd.distance(s, t, fam) == rd.distance(t, s, fam)
            # distinct sections separate because atom metrics are positive
            assert (rd.distance(s, t, fam) == 0) == (s.values == t.values)
        a, b, c = secs
        assert rd.distance(a, c, fam) <= rd.distance(a, b, fam) + rd.distance(b, c, fam)


def test_glue_identities():
    fam = two_point_family()
    rng = random.Random(34)
    a = rd.Section(fam, ["u", "b"])
    b = rd.Section(fam, ["v", "c"])
    c = rd.Section(fam, ["u", "a"])
    everything = set(fam.space.ids)
    assert rd.glue(everything, a, b) == a
    assert rd.glue(set(), a, b) == b
    assert rd.glue({"w1"}, a, b).values == ("u", "c")
    for k in range(3):
        for chosen in itertools.combinations(fam.space.ids, k):
            ev = frozenset(chosen)
            assert rd.glue(ev, a, rd.glue(ev, b, c)) == rd.glue(ev, a, c)
            assert rd.glue(ev, a, b) == rd.glue(everything - ev, b, a)


def test_check_R_axioms():
    rng = random.Random(35)
    for _ in range(6):
        fam = random_family(rng)
        secs = [random_section(rng, fam) for _ in range(3)]
        report = rd.check_R_axioms(fam, secs)
        assert report == {"R1_P": 0, "R1_f": 0, "R2": 0, "R3": 0}
    fam = two_point_family()
    with pytest.raises(ValueError):
        rd.check_R_axioms(fam, [rd.Section(fam, ["u", "a"])])


# ---- witnesses -------------------------------------------------------------


def test_inf_witness_distance_to_self():
    fam = two_point_family()
    a = rd.Section(fam, ["v", "b"])
    w = rd.inf_witness(parse_lformula("d(x, y)"), "y", {"x": a}, fam)
    assert w == a
    assert rd.bracket(parse_lformula("d(x, y)"), {"x": a, "y": w}, fam).values == (0, 0)


def test_inf_witness_matches_brute_force():
    rng = random.Random(36)
    phi = parse_lformula("(P(y) - half P(x))")
    for _ in range(10):
        fam = random_family(rng)
        a = random_section(rng, fam)
        w = rd.inf_witness(phi, "y", {"x": a}, fam)
        got = rd.bracket(phi, {"x": a, "y": w}, fam)
        floor = rd.bracket(Inf("y", phi), {"x": a}, fam)
        assert got.values == floor.values
        # brute force over every section agrees pointwise
        candidates = [
            rd.bracket(phi, {"x": a, "y": s}, fam).values
            for s in rd.all_sections(fam)
        ]
        assert floor.values == tuple(min(col) for col in zip(*candidates))


def test_inf_witness_tie_break():
    # constant predicate: every element is optimal, the first must win
    m = rd.FiniteLStructure(
        SIG, ["u", "v"],
        predicates={"P": {("u",): rat(1, 2), ("v",): rat(1, 2)}},
        metric=[[0, 1], [1, 0]],
    )
    fam = rd.RandomFamily(FiniteProbSpace([("w", 1)]), [m])
    w = rd.inf_witness(parse_lformula("P(y)"), "y", {}, fam)
    assert w.values == ("u",)
    with pytest.raises(ValueError):
        rd.inf_witness(parse_lformula("P(y)"), "y", {}, fam, epsilon=rat(-1))


def test_inf_witness_mixed_argmins():
    fam = two_point_family()
    w = rd.inf_witness(parse_lformula("P(y)"), "y", {}, fam)
    assert w.values == ("u", "a")  # per-atom argmins differ


# ---- Los -------------------------------------------------------------------


def test_los_check_examples():
    fam = two_point_family()
    a = rd.Section(fam, ["u", "c"])
    phi = parse_lformula("P(x)")
    lhs, rhs, ok = rd.los_check(phi, {"x": a}, fam)
    assert ok and lhs == rhs == rat(5, 8)  # (1/4 + 1)/2
    # Dirac weighting: the degenerate ultraproduct picks one structure
    lhs, rhs, ok = rd.los_check(phi, {"x": a}, fam, weighting=[1, 0])
    assert ok and lhs == rat(1, 4)
    lhs, rhs, ok = rd.los_check(phi, {"x": a}, fam, weighting=[0, 1])
    assert ok and lhs == 1


def test_los_check_quantified():
    rng = random.Random(37)
    for _ in range(10):
        fam = random_family(rng)
        env = {"x": random_section(rng, fam)}
        phi = random_lformula(rng, ["x"], max_depth=3, max_quants=2)
        lhs, rhs, ok = rd.los_check(phi, env, fam)
        assert ok and lhs == rhs


def test_los_check_weighting_errors():
    fam = two_point_family()
    phi = parse_lformula("inf x . P(x)")
    with pytest.raises(ValueError):
        rd.los_check(phi, {}, fam, weighting=[1])
    with pytest.raises(ValueError):
        rd.los_check(phi, {}, fam, weighting=[rat(1, 2), rat(1, 4)])
    with pytest.raises(ValueError):
        rd.los_check(phi, {}, fam, weighting=[rat(3, 2), rat(-1, 2)])


# ---- type measures ---------------------------------------------------------


def test_type_measure_dirac_on_constant_family():
    m = rd.FiniteLStructure(
        SIG, ["u", "v"],
        predicates={"P": {("u",): rat(1, 4), ("v",): rat(1, 2)}},
        metric=[[0, rat(1, 4)], [rat(1, 4), 0]],
    )
    fam = rd.RandomFamily(FiniteProbSpace.uniform(["w1", "w2"]), [m, m])
    sec = rd.Section(fam, ["u", "u"])
    nu = rd.type_measure([sec], fam, [parse_lformula("P(x0)")])
    assert nu.masses == {(rat(1, 4),): 1}


def test_type_measure_grouping_and_pairing():
    fam = two_point_family()
    sec = rd.Section(fam, ["u", "c"])
    formulas = [parse_lformula("P(x0)"), parse_lformula("neg P(x0)")]
    nu = rd.type_measure([sec], fam, formulas)
    assert nu.masses == {
        (rat(1, 4), rat(3, 4)): rat(1, 2),
        (rat(1), rat(0)): rat(1, 2),
    }
    for i, phi in enumerate(formulas):
        assert rd.pairing(nu, i) == expectation(
            rd.bracket(phi, {"x0": sec}, fam)
        )


def test_type_measure_pairing_random():
    rng = random.Random(38)
    for _ in range(10):
        fam = random_family(rng)
        secs = [random_section(rng, fam) for _ in range(2)]
        formulas = [
            random_lformula(rng, ["x0", "x1"], max_depth=3, max_quants=1)
            for _ in range(3)
        ]
        nu = rd.type_measure(secs, fam, formulas)
        assert sum(nu.masses.values()) == 1
        env = {"x0": secs[0], "x1": secs[1]}
        for i, phi in enumerate(formulas):
            assert rd.pairing(nu, i) == expectation(rd.bracket(phi, env, fam))


# ---- JSON ------------------------------------------------------------------


def test_family_json_round_trip():
    rng = random.Random(39)
    sig = Signature(functions={"f": [rat(2)]}, predicates={"P": [rat(1)]})
    for _ in range(5):
        fam = random_family(rng, signature=sig)
        blob = rd.family_to_json(fam)
        assert rd.family_from_json(blob) == fam
        sec = random_section(rng, fam)
        assert rd.section_from_json(fam, rd.section_to_json(sec)) == sec


def test_family_json_errors():
    fam = two_point_family()
    blob = rd.family_to_json(fam)
    broken = {"space": blob["space"], "signature": blob["signature"]}
    with pytest.raises(ValueError):
        rd.family_from_json(broken)
    bad = rd.family_to_json(fam)
    bad["structures"][0]["metric"] = [[0]]
    with pytest.raises(ValueError):
        rd.family_from_json(bad)
