"""Finite probability spaces and [0,1]-valued random variables.

Everything is exact rational arithmetic: expectation, the L1 metric,
residuals of the random-variable axioms, the atomlessness defect, the
event-algebra operations, the staged interpretation of integrals over
events, joint distributions as quantifier-free types, and conditional
expectation along finite partitions.

Events are frozensets of atom ids.  Formulas are reused as terms over
random variables: each propositional atom names an RV and the connectives
act pointwise (rv_eval).
"""

from .branches import Affine, CellEnumerator, PLAbs, PLAffine, PLComb, PLMax, PLMin
from .rationals import HALF, ONE, ZERO, format_rat, is_unit_interval, parse_rat, rat
from . import syntax
from .syntax import Atom, Half, Monus, Neg, conj


class FiniteProbSpace:
    """Ordered atoms with positive rational weights that sum to exactly 1."""

    __slots__ = ("ids", "weights", "_index")

    def __init__(self, atoms):
        ids = []
        weights = []
        for atom_id, w in atoms:
            ids.append(str(atom_id))
            w = rat(w)
            if w <= 0:
                raise ValueError("atom %r has non-positive weight %s" % (atom_id, w))
            weights.append(w)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate atom ids")
        if not ids:
            raise ValueError("a probability space needs at least one atom")
        if sum(weights, start=ZERO) != 1:
            raise ValueError("weights must sum to exactly 1")
        self.ids = tuple(ids)
        self.weights = tuple(weights)
        self._index = {a: i for i, a in enumerate(ids)}

    @classmethod
    def uniform(cls, ids):
        ids = list(ids)
        w = rat(1, len(ids))
        return cls([(a, w) for a in ids])

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteProbSpace)
            and self.ids == other.ids
            and self.weights == other.weights
        )

    def __hash__(self):
        return hash((self.ids, self.weights))

    def index(self, atom_id):
        try:
            return self._index[atom_id]
        except KeyError:
            raise KeyError("no atom %r in the space" % (atom_id,)) from None

    def event(self, ids):
        """Validated event: a frozenset of this space's atom ids."""
        ev = frozenset(str(a) for a in ids)
        bad = ev - set(self.ids)
        if bad:
            raise ValueError("not atoms of the space: %s" % sorted(bad))
        return ev

    def mu(self, event):
        ev = self.event(event)
        return sum((self.weights[self._index[a]] for a in ev), start=ZERO)

    def __repr__(self):
        parts = ", ".join(
            "%s:%s" % (a, w) for a, w in zip(self.ids, self.weights)
        )
        return "FiniteProbSpace(%s)" % parts


class RandomVariable:
    """A [0,1]-valued function on the atoms of a finite probability space."""

    __slots__ = ("space", "values")

    def __init__(self, space, values):
        values = tuple(rat(v) for v in values)
        if len(values) != len(space):
            raise ValueError(
                "%d values for a %d-atom space" % (len(values), len(space))
            )
        for v in values:
            if not is_unit_interval(v):
                raise ValueError("value %s outside [0,1]" % (v,))
        self.space = space
        self.values = values

    def __eq__(self, other):
        return (
            isinstance(other, RandomVariable)
            and self.space == other.space
            and self.values == other.values
        )

    def __hash__(self):
        return hash((self.space, self.values))

    def __repr__(self):
        return "RandomVariable(%s)" % (", ".join(str(v) for v in self.values))


def _same_space(*rvs):
    space = rvs[0].space
    for rv in rvs[1:]:
        if rv.space != space:
            raise ValueError("random variables live on different spaces")
    return space


def expectation(x):
    """E(x) = sum of weight * value; equals l1_dist(x, 0)."""
    return sum(
        (w * v for w, v in zip(x.space.weights, x.values)), start=ZERO
    )


def l1_dist(x, y):
    """d(x,y) = E|x - y|."""
    space = _same_space(x, y)
    return sum(
        (w * abs(a - b) for w, a, b in zip(space.weights, x.values, y.values)),
        start=ZERO,
    )


def integral_over(x, event):
    """Integral of x over the event: sum of weight * value on its atoms."""
    ev = x.space.event(event)
    return sum(
        (
            x.space.weights[i] * x.values[i]
            for i, a in enumerate(x.space.ids)
            if a in ev
        ),
        start=ZERO,
    )


def rv_eval(term, env, space):
    """Interpret a propositional formula over random variables, pointwise.

    Atoms name entries of env; neg, half and (a - b) act coordinatewise.
    """
    for name, x in env.items():
        if x.space != space:
            raise ValueError("env entry %r lives on a different space" % (name,))
    n = len(space)
    memo = {}

    def walk(f):
        got = memo.get(f)
        if got is not None:
            return got
        if isinstance(f, syntax.Const0):
            out = (ZERO,) * n
        elif isinstance(f, Atom):
            try:
                out = env[f.name].values
            except KeyError:
                raise KeyError("unbound variable %r" % (f.name,)) from None
        elif isinstance(f, Neg):
            out = tuple(ONE - v for v in walk(f.body))
        elif isinstance(f, Half):
            out = tuple(v * HALF for v in walk(f.body))
        elif isinstance(f, Monus):
            out = tuple(
                a - b if a > b else ZERO
                for a, b in zip(walk(f.left), walk(f.right))
            )
        else:
            raise TypeError("not a propositional formula: %r" % (f,))
        memo[f] = out
        return out

    return RandomVariable(space, walk(term))


# --- axiom residuals ------------------------------------------------------------

_X, _Y, _Z = Atom("x"), Atom("y"), Atom("z")

#: closed forms whose expectation must vanish in every finite model
_RV_TERMS = {
    "RV4.1": Monus(Monus(_X, _Y), _X),
    "RV4.2": Monus(Monus(Monus(_X, _Z), Monus(_X, _Y)), Monus(_Y, _Z)),
    "RV4.3": Monus(conj(_X, _Y), conj(_Y, _X)),
    "RV4.4": Monus(Monus(_X, _Y), Monus(Neg(_Y), Neg(_X))),
    "RV4.5": Monus(Half(_X), Monus(_X, Half(_X))),
    "RV4.6": Monus(Monus(_X, Half(_X)), Half(_X)),
}


def check_rv_axioms(space, samples):
    """Exact residuals of the random-variable axioms over the samples.

    Every pair (and triple, for the one three-variable scheme) drawn from
    samples is checked; the report maps axiom name to the largest residual
    seen, all of which must be 0 in a genuine model.  Also reports the
    linearity of expectation on non-overflowing sums and the two-sided
    expectation bound for truncated subtraction.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two sample random variables")
    for s in samples:
        if s.space != space:
            raise ValueError("sample on a different space")
    one_rv = rv_eval(syntax.one(), {}, space)
    report = {"RV2": abs(expectation(one_rv) - 1)}

    def term_residual(term, env):
        return expectation(rv_eval(term, env, space))

    pair_keys = [
        "RV1", "RV3", "RV4.1", "RV4.3", "RV4.4", "LinearE",
        "ExpectationDifference",
    ]
    for key in pair_keys + ["RV4.2", "RV4.5", "RV4.6", "RV5"]:
        report.setdefault(key, ZERO)

    for x in samples:
        env = {"x": x}
        report["RV4.5"] = max(
            report["RV4.5"], term_residual(_RV_TERMS["RV4.5"], env)
        )
        report["RV4.6"] = max(
            report["RV4.6"], term_residual(_RV_TERMS["RV4.6"], env)
        )
        # RV5 is the metric form of the same halving identity
        half_x = rv_eval(Half(_X), env, space)
        x_minus_half = rv_eval(Monus(_X, Half(_X)), env, space)
        report["RV5"] = max(report["RV5"], l1_dist(half_x, x_minus_half))
        # scalar linearity at the only definable scalar, one half
        report["LinearE"] = max(
            report["LinearE"], abs(expectation(half_x) - expectation(x) * HALF)
        )

    for x in samples:
        for y in samples:
            env = {"x": x, "y": y}
            x_monus_y = rv_eval(Monus(_X, _Y), env, space)
            y_and_x = rv_eval(conj(_Y, _X), env, space)
            report["RV1"] = max(
                report["RV1"],
                abs(
                    expectation(x)
                    - expectation(x_monus_y)
                    - expectation(y_and_x)
                ),
            )
            y_monus_x = rv_eval(Monus(_Y, _X), env, space)
            report["RV3"] = max(
                report["RV3"],
                abs(
                    l1_dist(x, y)
                    - expectation(x_monus_y)
                    - expectation(y_monus_x)
                ),
            )
            for key in ("RV4.1", "RV4.3", "RV4.4"):
                report[key] = max(
                    report[key], term_residual(_RV_TERMS[key], env)
                )
            # additivity holds whenever the plain sum never overflows 1
            if all(a + b <= 1 for a, b in zip(x.values, y.values)):
                total = rv_eval(syntax.truncated_add(_X, _Y), env, space)
                report["LinearE"] = max(
                    report["LinearE"],
                    abs(expectation(total) - expectation(x) - expectation(y)),
                )
            gap_low = expectation(x) - expectation(y) - expectation(x_monus_y)
            gap_high = expectation(x_monus_y) - expectation(x)
            report["ExpectationDifference"] = max(
                report["ExpectationDifference"], gap_low, gap_high, ZERO
            )

    for x in samples:
        for y in samples:
            for z in samples:
                env = {"x": x, "y": y, "z": z}
                report["RV4.2"] = max(
                    report["RV4.2"], term_residual(_RV_TERMS["RV4.2"], env)
                )
    order = [
        "RV1", "RV2", "RV3", "RV4.1", "RV4.2", "RV4.3", "RV4.4", "RV4.5",
        "RV4.6", "RV5", "LinearE", "ExpectationDifference",
    ]
    return {key: report[key] for key in order}


# --- atomlessness defect ----------------------------------------------------------


def arv_defect(space, x, with_witness=False):
    """Exact infimum over random variables y of
    max(E(y and not-y), |E(y and x) - E(x)/2|).

    The body is piecewise affine in y's atom values, so the infimum is a
    minimum, found by branch-resolving the min/abs/max nodes and solving an
    exact LP on each cell.  It is 0 only when some y splits x's mass in half
    while being two-valued {0,1}; finite spaces generally leave a positive
    defect.
    """
    if x.space != space:
        raise ValueError("random variable on a different space")
    variables = ["y%d" % i for i in range(len(space))]
    # E(y and not-y) = sum_i w_i * min(y_i, 1 - y_i)
    balance_terms = []
    for i, w in enumerate(space.weights):
        y_i = Affine.variable(variables[i])
        neg_y_i = Affine({variables[i]: -ONE}, ONE)
        balance_terms.append((w, PLMin(PLAffine(y_i), PLAffine(neg_y_i))))
    balance = PLComb(balance_terms, ZERO)
    # |E(y and x) - E(x)/2| = |sum_i w_i * min(y_i, x_i) - E(x)/2|
    half_mass_terms = []
    for i, w in enumerate(space.weights):
        y_i = PLAffine(Affine.variable(variables[i]))
        x_i = PLAffine(Affine.constant(x.values[i]))
        half_mass_terms.append((w, PLMin(y_i, x_i)))
    centred = PLComb(half_mass_terms, -(expectation(x) * HALF))
    objective = PLMax(balance, PLAbs(centred))

    enum = CellEnumerator(variables)
    best = None
    best_point = None
    for cell in enum.iter_cells([objective]):
        value = cell.values[0]
        if best is not None:
            lower = value.const + sum(
                c for c in value.coeffs.values() if c < 0
            )
            if lower >= best:
                continue
        if not value.coeffs:
            got_value, point = value.const, cell.point
        else:
            got = enum.optimize_cell(cell, value, maximize=False)
            if got is None:
                continue
            got_value, point, _ = got
        if best is None or got_value < best:
            best, best_point = got_value, point
            if best == 0:
                break
    witness = RandomVariable(space, [best_point[v] for v in variables])
    if with_witness:
        return best, witness
    return best


# --- the event algebra ------------------------------------------------------------


def meet(space, a, b):
    return space.event(a) & space.event(b)


def join(space, a, b):
    return space.event(a) | space.event(b)


def complement(space, a):
    return frozenset(space.ids) - space.event(a)


def embed(space, event):
    """The characteristic function of the event as a random variable."""
    ev = space.event(event)
    return RandomVariable(
        space, [ONE if a in ev else ZERO for a in space.ids]
    )


def nearest_event(g):
    """The event {g >= 1/2}, a closest 0/1-valued approximation of g."""
    return frozenset(
        a for a, v in zip(g.space.ids, g.values) if v >= HALF
    )


def dist_to_algebra(g):
    """Distance from g to the set of events: E(g and not-g)."""
    return sum(
        (w * min(v, ONE - v) for w, v in zip(g.space.weights, g.values)),
        start=ZERO,
    )


# --- staged interpretation of the integral -----------------------------------------


def _level_events(space, f):
    """r -> {f > r} builder; these strict upper level sets decrease in r."""

    def x_r(r):
        return frozenset(
            a for a, v in zip(space.ids, f.values) if v > r
        )

    return x_r


def tau_phi_interpretation(space, f, n, c):
    """Stage-n approximation of the integral of f over the event c.

    Builds the decreasing level events x_r = {f > r} for dyadic r, runs the
    clamped recursion tau_r = (x_r union tau_{r+step}) intersect
    tau_{r-step} from tau_0 = everything, tau_1 = nothing (checking that it
    reproduces x_r, as it must for a decreasing family), and returns
    phi_n = sum over k < 2^n of 2^-n * mu(c intersect tau_{k/2^n}).
    The result is within 2^-n of the true integral (strictly, unless f
    vanishes on all of c and mu(c) = 1).
    """
    if n < 1:
        raise ValueError("stage must be at least 1")
    if f.space != space:
        raise ValueError("random variable on a different space")
    ev_c = space.event(c)
    x_r = _level_events(space, f)
    top = frozenset(space.ids)
    bottom = frozenset()
    memo = {rat(0): top, rat(1): bottom}

    def tau(r):
        got = memo.get(r)
        if got is not None:
            return got
        step = rat(1, r.denominator)  # r reduced: denominator is 2^n(r)
        out = (x_r(r) | tau(r + step)) & tau(r - step)
        memo[r] = out
        return out

    scale = rat(1, 2**n)
    for k in range(1, 2**n):
        r = rat(k, 2**n)
        if tau(r) != x_r(r):  # pragma: no cover - guaranteed for decreasing x
            raise AssertionError("clamped recursion diverged from level sets")
    total = ZERO
    for k in range(2**n):
        total += scale * space.mu(ev_c & tau(rat(k, 2**n)))
    return total


# --- joint distributions ------------------------------------------------------------


class JointDistribution:
    """Pushforward measure of an RV tuple: value tuple -> positive mass."""

    __slots__ = ("masses",)

    def __init__(self, masses):
        self.masses = {
            tuple(rat(v) for v in values): rat(w)
            for values, w in masses.items()
            if w != 0
        }
        if sum(self.masses.values(), start=ZERO) != 1:
            raise ValueError("masses must sum to exactly 1")

    def __eq__(self, other):
        return (
            isinstance(other, JointDistribution) and self.masses == other.masses
        )

    def __repr__(self):
        entries = ", ".join(
            "%s: %s" % (tuple(str(v) for v in k), w)
            for k, w in sorted(self.masses.items())
        )
        return "JointDistribution({%s})" % entries


def joint_distribution(rvs):
    """The joint law of a nonempty tuple of RVs on one space."""
    rvs = list(rvs)
    if not rvs:
        raise ValueError("need at least one random variable")
    space = _same_space(*rvs)
    masses = {}
    for i, w in enumerate(space.weights):
        key = tuple(rv.values[i] for rv in rvs)
        masses[key] = masses.get(key, ZERO) + w
    return JointDistribution(masses)


def qf_type_equal(fbar, gbar):
    """Do the tuples realize the same quantifier-free type?

    By the joint-distribution characterization this is plain equality of
    their pushforward laws; the tuples may live on different spaces.
    """
    fbar, gbar = list(fbar), list(gbar)
    if len(fbar) != len(gbar):
        raise ValueError("tuples must have the same length")
    return joint_distribution(fbar) == joint_distribution(gbar)


def qf_type_equal_over(fbar, partition_f, gbar, partition_g):
    """Type equality over a conditioning algebra, given as a partition on
    each tuple's space: compare the joint laws of the tuples extended by
    the indicator variables of their partition blocks."""
    fbar, gbar = list(fbar), list(gbar)
    if len(partition_f) != len(partition_g):
        raise ValueError("partitions must have the same number of blocks")
    ext_f = fbar + [embed(_same_space(*fbar), b) for b in partition_f]
    ext_g = gbar + [embed(_same_space(*gbar), b) for b in partition_g]
    return qf_type_equal(ext_f, ext_g)


# --- conditioning -------------------------------------------------------------------


def cond_expectation(x, partition):
    """Conditional expectation of x along a finite partition of the atoms.

    Constant on each block (the block's weighted mean of x); has the same
    expectation as x.
    """
    space = x.space
    blocks = [space.event(b) for b in partition]
    seen = set()
    for b in blocks:
        if not b:
            raise ValueError("empty partition block")
        if b & seen:
            raise ValueError("partition blocks overlap")
        seen |= b
    if seen != set(space.ids):
        raise ValueError("partition does not cover the space")
    out = [None] * len(space)
    for b in blocks:
        mass = space.mu(b)
        mean = integral_over(x, b) / mass
        for a in b:
            out[space.index(a)] = mean
    return RandomVariable(space, out)


def generated_partition(space, rvs):
    """Coarsest partition of the atoms making every given RV measurable
    (constant on blocks); with no RVs this is the single block of all atoms."""
    rvs = list(rvs)
    for rv in rvs:
        if rv.space != space:
            raise ValueError("random variable on a different space")
    blocks = {}
    order = []
    for i, a in enumerate(space.ids):
        key = tuple(rv.values[i] for rv in rvs)
        if key not in blocks:
            blocks[key] = []
            order.append(key)
        blocks[key].append(a)
    return [frozenset(blocks[key]) for key in order]


# --- functional calculus ---------------------------------------------------------


def square_approximant(n):
    """A formula in the atom x computing the stage-n chord approximation of
    x^2 (interpolation at the dyadics k/2^n), exactly.

    Stage 0 is x itself; each refinement subtracts a scaled triangular wave:
    g_{m+1} = g_m - 4^-(m+1) W_{m+1}, with W_1 the unit tent and
    W_{m+1} = min(2 W_m, 2 (1 - W_m)).  The truncations never bite (each
    subtrahend fits under g_m, each doubled wave is capped by the min), so
    the formula value equals the chord interpolant; its error against x^2 is
    at most 4^-n / 4.
    """
    if n < 0:
        raise ValueError("stage must be nonnegative")
    x = Atom("x")
    g = x
    wave = None
    for m in range(1, n + 1):
        if wave is None:
            wave = conj(
                syntax.truncated_add(x, x),
                syntax.truncated_add(Neg(x), Neg(x)),
            )
        else:
            wave = conj(
                syntax.truncated_add(wave, wave),
                syntax.truncated_add(Neg(wave), Neg(wave)),
            )
        scaled = wave
        for _ in range(2 * m):
            scaled = Half(scaled)
        g = Monus(g, scaled)
    return g


# --- JSON forms -----------------------------------------------------------------


def space_to_json(space):
    return {
        "atoms": [
            {"id": a, "w": format_rat(w)}
            for a, w in zip(space.ids, space.weights)
        ]
    }


def space_from_json(data):
    try:
        atoms = [(entry["id"], parse_rat(entry["w"])) for entry in data["atoms"]]
    except (KeyError, TypeError) as e:
        raise ValueError("malformed space: %s" % (e,)) from None
    return FiniteProbSpace(atoms)


def rv_to_json(x):
    return {
        "space": space_to_json(x.space),
        "values": [format_rat(v) for v in x.values],
    }


def rv_from_json(data):
    try:
        space = space_from_json(data["space"])
        values = [parse_rat(v) for v in data["values"]]
    except (KeyError, TypeError) as e:
        raise ValueError("malformed random variable: %s" % (e,)) from None
    return RandomVariable(space, values)
