"""Branch enumeration for piecewise-linear terms over the unit box.

Connectives like truncated subtraction, min/max and absolute value are
piecewise affine; resolving each one into its "zero" and "positive" (resp.
left/right, nonnegative/nonpositive) side splits the unit box into cells, on
each of which the whole term is a single affine expression.  A term with k
split nodes has at most 2^k sign vectors but only polynomially many feasible
cells (a hyperplane arrangement), so the sides are explored depth-first with
the current constraint set checked for feasibility at every step: first
against a witness point carried along the search, then (on a miss) with an
exact rational LP.  Shared subterms appear once in the traversal order, so a
repeated subformula is resolved consistently instead of multiplying cells.
"""

from .rationals import ZERO, ONE, rat
from .simplex import GE, OPTIMAL, POSITIVE, UNBOUNDED, solve_lp


class Affine:
    """Sum of coeff*var plus a constant, all rational."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=ZERO):
        self.coeffs = coeffs or {}
        self.const = const

    @staticmethod
    def constant(c):
        return Affine({}, rat(c))

    @staticmethod
    def variable(name):
        return Affine({name: ONE}, ZERO)

    def scale(self, k):
        if k == 0:
            return Affine({}, ZERO)
        return Affine({v: k * c for v, c in self.coeffs.items()}, k * self.const)

    def plus(self, other):
        coeffs = dict(self.coeffs)
        for v, c in other.coeffs.items():
            s = coeffs.get(v, ZERO) + c
            if s == 0:
                coeffs.pop(v, None)
            else:
                coeffs[v] = s
        return Affine(coeffs, self.const + other.const)

    def minus(self, other):
        return self.plus(other.scale(-ONE))

    def evaluate(self, point):
        return sum(
            (c * point[v] for v, c in self.coeffs.items()), start=ZERO
        ) + self.const

    def is_zero(self):
        return not self.coeffs and self.const == 0

    def key(self):
        """Canonical form of the constraint self >= 0 (integer, gcd-reduced)."""
        from math import gcd

        dens = [rat(c).denominator for c in self.coeffs.values()]
        dens.append(rat(self.const).denominator)
        lcm = 1
        for d in dens:
            lcm = lcm * d // gcd(lcm, d)
        ints = {v: int(c * lcm) for v, c in self.coeffs.items()}
        const = int(self.const * lcm)
        g = 0
        for x in ints.values():
            g = gcd(g, abs(x))
        g = gcd(g, abs(const))
        if g > 1:
            ints = {v: x // g for v, x in ints.items()}
            const //= g
        return (tuple(sorted(ints.items())), const)

    def __repr__(self):
        parts = ["%s*%s" % (c, v) for v, c in sorted(self.coeffs.items())]
        parts.append(str(self.const))
        return " + ".join(parts)


# --- term IR -----------------------------------------------------------------

class PLAffine:
    __slots__ = ("affine",)

    def __init__(self, affine):
        self.affine = affine


class PLComb:
    """Linear combination sum(k_i * node_i) + const."""

    __slots__ = ("terms", "const")

    def __init__(self, terms, const=ZERO):
        self.terms = tuple(terms)
        self.const = const


class PLMonus:
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right


class PLMin:
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right


class PLMax:
    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right


class PLAbs:
    __slots__ = ("body",)

    def __init__(self, body):
        self.body = body


def split_count(node, _seen=None):
    """Distinct branching nodes reachable from node (counts shared ones once)."""
    seen = _seen if _seen is not None else set()

    def walk(n):
        if id(n) in seen:
            return 0
        seen.add(id(n))
        if isinstance(n, PLAffine):
            return 0
        if isinstance(n, PLComb):
            return sum(walk(t) for _, t in n.terms)
        if isinstance(n, PLAbs):
            return 1 + walk(n.body)
        return 1 + walk(n.left) + walk(n.right)

    return walk(node)


class Cell:
    """A polytope (within the unit box) on which the term is one affine."""

    __slots__ = ("constraints", "values", "point")

    def __init__(self, constraints, values, point):
        self.constraints = constraints  # dict: normalized key -> Affine (>= 0)
        self.values = values  # tuple of Affine, one per enumerated root
        self.point = point  # a feasible point (dict), or None if not yet known


def _children(node):
    if isinstance(node, PLAffine):
        return ()
    if isinstance(node, PLComb):
        return tuple(t for _, t in node.terms)
    if isinstance(node, PLAbs):
        return (node.body,)
    return (node.left, node.right)


def _topo_order(roots):
    """Every reachable node once, children strictly before parents."""
    order = []
    seen = set()
    stack = [(r, False) for r in reversed(roots)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in reversed(_children(node)):
            if id(child) not in seen:
                stack.append((child, False))
    return order


class CellEnumerator:
    """Enumerates feasible cells of piecewise-linear terms over [0,1]^vars."""

    def __init__(self, variables):
        self.variables = list(variables)
        self._feas_cache = {}
        center = rat(1, 2)
        self._center = {v: center for v in self.variables}

    # ---- feasibility ----------------------------------------------------

    def _lp_rows(self, constraints):
        rows = []
        for aff in constraints.values():
            coeffs = [aff.coeffs.get(v, ZERO) for v in self.variables]
            rows.append((coeffs, GE, -aff.const))
        for i, _ in enumerate(self.variables):
            unit = [ONE if j == i else ZERO for j in range(len(self.variables))]
            rows.append((unit, "<=", ONE))
        return rows

    def feasible_point(self, constraints, probes=()):
        """A point of the cell (plus unit box), or None."""
        for p in probes:
            if p is not None and all(
                aff.evaluate(p) >= 0 for aff in constraints.values()
            ):
                return p
        key = frozenset(constraints)
        try:
            return self._feas_cache[key]
        except KeyError:
            pass
        # cheap single-variable interval screen before the LP
        lo = {v: ZERO for v in self.variables}
        hi = {v: ONE for v in self.variables}
        ok = True
        for (ints, const), aff in constraints.items():
            if len(ints) == 1:
                (v, c) = ints[0]
                bound = rat(-const, c)
                if c > 0:
                    lo[v] = max(lo[v], bound)
                else:
                    hi[v] = min(hi[v], bound)
            elif not ints and const < 0:
                ok = False
        if ok and any(lo[v] > hi[v] for v in self.variables):
            ok = False
        point = None
        if ok:
            mid = {v: (lo[v] + hi[v]) / 2 for v in self.variables}
            if all(aff.evaluate(mid) >= 0 for aff in constraints.values()):
                point = mid
            else:
                res = solve_lp(len(self.variables), self._lp_rows(constraints))
                if res.status == OPTIMAL:
                    point = dict(zip(self.variables, res.point))
        self._feas_cache[key] = point
        return point

    # ---- enumeration ----------------------------------------------------

    def iter_cells(self, nodes):
        """Yield the feasible cells on which every listed term is affine.

        Each yielded Cell carries one value per entry of `nodes` and a point
        inside the cell (which certifies it nonempty).  Cells are closed, so
        they overlap on boundaries; over each cell the value affines agree
        with the terms everywhere, boundaries included.
        """
        roots = list(nodes)
        order = _topo_order(roots)
        values = {}  # id(node) -> Affine under the current sign choices
        constraints = {}  # key -> Affine (each meaning affine >= 0)

        def branch_sides(n):
            """(diff, ((guard, value), (guard, value))) for a split node;
            the first side is the one active when diff <= 0."""
            if isinstance(n, PLAbs):
                v = values[id(n.body)]
                return v, ((v.scale(-ONE), v.scale(-ONE)), (v, v))
            va = values[id(n.left)]
            vb = values[id(n.right)]
            diff = va.minus(vb)
            if isinstance(n, PLMonus):
                return diff, ((diff.scale(-ONE), Affine.constant(0)), (diff, diff))
            if isinstance(n, PLMin):
                return diff, ((diff.scale(-ONE), va), (diff, vb))
            if isinstance(n, PLMax):
                return diff, ((diff.scale(-ONE), vb), (diff, va))
            raise TypeError("not a piecewise-linear term: %r" % (n,))

        def walk(i, point):
            while i < len(order):
                n = order[i]
                if isinstance(n, PLAffine):
                    values[id(n)] = n.affine
                elif isinstance(n, PLComb):
                    total = Affine.constant(n.const)
                    for k, t in n.terms:
                        total = total.plus(values[id(t)].scale(rat(k)))
                    values[id(n)] = total
                else:
                    break
                i += 1
            else:
                yield Cell(
                    dict(constraints),
                    tuple(values[id(r)] for r in roots),
                    point,
                )
                return
            node = order[i]
            diff, sides = branch_sides(node)
            if not diff.coeffs:  # constant difference: the side is forced
                _, value = sides[0] if diff.const <= 0 else sides[1]
                values[id(node)] = value
                yield from walk(i + 1, point)
                return
            keys = (diff.scale(-ONE).key(), diff.key())
            for si in (0, 1):
                if keys[si] in constraints:
                    # this hyperplane was already resolved the same way on
                    # this path; the opposite side would only retrace the
                    # boundary, where both sides take equal values anyway
                    _, value = sides[si]
                    values[id(node)] = value
                    yield from walk(i + 1, point)
                    return
            at_point = diff.evaluate(point)
            for si in ((0, 1) if at_point <= 0 else (1, 0)):
                guard, value = sides[si]
                key = keys[si]
                if guard.evaluate(point) >= 0:
                    newpoint = point
                else:
                    trial = dict(constraints)
                    trial[key] = guard
                    newpoint = self.feasible_point(trial)
                    if newpoint is None:
                        continue
                constraints[key] = guard
                values[id(node)] = value
                yield from walk(i + 1, newpoint)
                del constraints[key]

        yield from walk(0, dict(self._center))

    def cells(self, node):
        """Feasible cells of one term; each cell's values is a 1-tuple."""
        return list(self.iter_cells([node]))

    def joint_cells(self, nodes):
        """Cells on which every listed term is simultaneously affine.

        Each cell's values tuple lines up with `nodes`.
        """
        return list(self.iter_cells(nodes))

    # ---- optimisation ----------------------------------------------------

    def optimize_cell(self, cell, objective, maximize=True, extra=(),
                      stop_when_positive=False):
        """Exact optimum of an affine objective over one cell (+ extras)."""
        cons = dict(cell.constraints)
        for aff in extra:
            key = aff.key()
            ints, const = key
            if not ints:
                if const < 0:
                    return None
                continue
            cons[key] = aff
        rows = self._lp_rows(cons)
        obj = [objective.coeffs.get(v, ZERO) for v in self.variables]
        res = solve_lp(
            len(self.variables),
            rows,
            objective=obj,
            maximize=maximize,
            stop_when_positive=stop_when_positive,
            positive_threshold=-objective.const,
        )
        if res.status == UNBOUNDED:  # pragma: no cover - box-bounded
            raise AssertionError("bounded problem reported unbounded")
        if res.status not in (OPTIMAL, POSITIVE):
            return None
        point = dict(zip(self.variables, res.point))
        return res.value + objective.const, point, res.status
