"""Independent reference computations used to pin expected test values.

Everything here is deliberately the dumbest exact method available: plain
Fraction recursion and exhaustive grid search.  The package's decision
procedures (branch enumeration + rational LP, int64 grid kernel) must agree
with these on the frozen fixtures; nothing here imports the modules under
test.
"""

import itertools
import random
from fractions import Fraction

from clog import syntax


def exact(x):
    """Exact value as an int-backed Fraction.

    Fraction(gmpy2.mpq) keeps mpz components inside, which gmpy2 then
    refuses to mix with; rebuilding from plain ints avoids that."""
    return Fraction(int(x.numerator), int(x.denominator))


def eval_fraction(formula, assignment):
    """Textbook recursive evaluation over Fraction."""
    if isinstance(formula, syntax.Const0):
        return Fraction(0)
    if isinstance(formula, syntax.Atom):
        return Fraction(assignment[formula.name])
    if isinstance(formula, syntax.Neg):
        return 1 - eval_fraction(formula.body, assignment)
    if isinstance(formula, syntax.Half):
        return eval_fraction(formula.body, assignment) / 2
    if isinstance(formula, syntax.Monus):
        v = eval_fraction(formula.left, assignment) - eval_fraction(
            formula.right, assignment
        )
        return v if v > 0 else Fraction(0)
    raise TypeError(formula)


def grid_sup_fractions(formula, atoms, denom):
    """Exhaustive max over the grid {0, 1/denom, ..., 1}^atoms, pure Fraction.

    Returns (max value, first witness assignment in odometer order).
    """
    best = None
    witness = None
    levels = [Fraction(k, denom) for k in range(denom + 1)]
    for point in itertools.product(levels, repeat=len(atoms)):
        assignment = dict(zip(atoms, point))
        v = eval_fraction(formula, assignment)
        if best is None or v > best:
            best, witness = v, assignment
    if best is None:  # no atoms: a single point
        best = eval_fraction(formula, {})
        witness = {}
    return best, witness


def grid_valid(formula, denom):
    """True iff the formula evaluates to 0 on every grid point."""
    value, _ = grid_sup_fractions(formula, syntax.atom_names(formula), denom)
    return value == 0


def arv_objective(weights, x_values, y_values):
    """max( E(y /\\ neg y), | E(y /\\ x) - E(x)/2 | ), all exact."""
    e_fuzzy = sum(w * min(y, 1 - y) for w, y in zip(weights, y_values))
    e_meet = sum(w * min(y, x) for w, (y, x) in zip(weights, zip(y_values, x_values)))
    e_x = sum(w * x for w, x in zip(weights, x_values))
    return max(e_fuzzy, abs(e_meet - e_x / 2))


def arv_defect_grid(weights, x_values, denom=64, refine=True):
    """Grid search for the defect, refined once around the best grid point."""
    n = len(weights)
    weights = [exact(w) for w in weights]
    x_values = [exact(x) for x in x_values]
    levels = [Fraction(k, denom) for k in range(denom + 1)]
    best, best_y = None, None
    for ys in itertools.product(levels, repeat=n):
        v = arv_objective(weights, x_values, ys)
        if best is None or v < best:
            best, best_y = v, ys
    if refine:
        fine = denom * denom
        ranges = []
        for y in best_y:
            lo = max(Fraction(0), y - Fraction(1, denom))
            steps = [lo + Fraction(k, fine) for k in range(2 * denom + 1)]
            ranges.append([s for s in steps if 0 <= s <= 1])
        for ys in itertools.product(*ranges):
            v = arv_objective(weights, x_values, ys)
            if v < best:
                best, best_y = v, ys
    return best, best_y


def integral_over(weights, values, event_indexes):
    """Integral of the variable over the event, i.e. sum of w*f on it."""
    return sum(exact(weights[i]) * exact(values[i]) for i in event_indexes)


def random_core_formula(rng, max_depth, atoms, monus_cap=None):
    """Random formula over the core connectives with a rough size control."""

    def gen(depth, budget):
        if depth == 0 or rng.random() < 0.25:
            return rng.choice([syntax.Const0()] + [syntax.Atom(a) for a in atoms])
        kind = rng.randrange(4)
        if kind == 0:
            return syntax.Neg(gen(depth - 1, budget))
        if kind == 1:
            return syntax.Half(gen(depth - 1, budget))
        return syntax.Monus(gen(depth - 1, budget), gen(depth - 1, budget))

    f = gen(max_depth, monus_cap)
    if monus_cap is not None:
        while syntax.monus_count(f) > monus_cap:
            f = gen(max_depth, monus_cap)
    return f


def random_rational(rng, max_den=12, odd_den=False):
    """A random rational in [0,1]; odd_den avoids dyadic gridpoints."""
    if odd_den:
        den = rng.choice([3, 5, 7, 9, 11])
        return Fraction(rng.randint(1, den - 1), den)
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def random_weights(rng, n, max_den=10):
    """n positive rational weights summing to exactly 1."""
    cuts = sorted(rng.randint(1, max_den * n - 1) for _ in range(n - 1))
    parts = []
    prev = 0
    for c in cuts + [max_den * n]:
        parts.append(c - prev)
        prev = c
    while 0 in parts:  # nudge empty parts: steal from the largest
        i = parts.index(0)
        j = parts.index(max(parts))
        parts[i] += 1
        parts[j] -= 1
    return [Fraction(p, max_den * n) for p in parts]
