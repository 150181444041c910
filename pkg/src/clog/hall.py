"""The probabilistic Hall marriage theorem on a finite space.

Each item x carries a weight w_x and an event C_x of atoms it may draw
from; atoms are divisible mass.  The covering condition (every subset T of
items satisfies mu(C_T) >= w_T) is decided exhaustively, and allocations
are built by exact integer max-flow after clearing denominators, so the
condition-holds / allocation-exists equivalence is exercised through two
independent routes.
"""

from collections import deque
from math import lcm

from .rationals import ZERO, format_rat, parse_rat, rat
from .rv import FiniteProbSpace, space_from_json, space_to_json

DEFAULT_SUBSET_BOUND = 20


class HallInstance:
    """Items with weights and admissible events over a finite space."""

    def __init__(self, space, items):
        """items: iterable of (id, weight, event-iterable)."""
        self.space = space
        ids = []
        weights = []
        events = []
        for item_id, w, ev in items:
            ids.append(str(item_id))
            w = rat(w)
            if w < 0:
                raise ValueError("item %r has negative weight" % (item_id,))
            weights.append(w)
            events.append(space.event(ev))
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate item ids")
        self.ids = tuple(ids)
        self.weights = tuple(weights)
        self.events = tuple(events)

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        return (
            isinstance(other, HallInstance)
            and self.space == other.space
            and self.ids == other.ids
            and self.weights == other.weights
            and self.events == other.events
        )


def _subsets_lex(n):
    """Nonempty index subsets in lexicographic order of their index tuples."""
    def gen(prefix, start):
        for i in range(start, n):
            chosen = prefix + (i,)
            yield chosen
            yield from gen(chosen, i + 1)
    yield from gen((), 0)


def hall_condition(instance, bound=DEFAULT_SUBSET_BOUND):
    """(True, None) if mu(C_T) >= w_T for every subset T of items, else
    (False, T) for the lexicographically-least violating T (in declared
    item order).  Exhaustive over 2^|S| subsets, so |S| is bounded."""
    n = len(instance)
    if n > bound:
        raise ValueError("instance has %d items, bound is %d" % (n, bound))
    for chosen in _subsets_lex(n):
        total = sum((instance.weights[i] for i in chosen), start=ZERO)
        union = frozenset().union(*(instance.events[i] for i in chosen))
        if instance.space.mu(union) < total:
            return False, tuple(instance.ids[i] for i in chosen)
    return True, None


class Allocation:
    """Nonnegative rational mass per (item, atom) pair; zero entries are
    not stored."""

    __slots__ = ("masses",)

    def __init__(self, masses):
        self.masses = {
            (str(x), str(a)): rat(m) for (x, a), m in masses.items() if m != 0
        }
        for m in self.masses.values():
            if m < 0:
                raise ValueError("negative mass")

    def mass(self, item_id, atom_id):
        return self.masses.get((item_id, atom_id), ZERO)

    def item_total(self, item_id):
        return sum(
            (m for (x, _), m in self.masses.items() if x == item_id),
            start=ZERO,
        )

    def atom_total(self, atom_id):
        return sum(
            (m for (_, a), m in self.masses.items() if a == atom_id),
            start=ZERO,
        )

    def __eq__(self, other):
        return isinstance(other, Allocation) and self.masses == other.masses

    def __repr__(self):
        entries = ", ".join(
            "%s@%s: %s" % (x, a, m) for (x, a), m in sorted(self.masses.items())
        )
        return "Allocation({%s})" % entries


def _max_flow(n_nodes, arcs, source, sink):
    """Integer Edmonds-Karp.  arcs: (u, v, capacity); returns the flow per
    arc (parallel arcs kept apart) and the total value."""
    head = []
    cap = []
    nxt = [[] for _ in range(n_nodes)]
    def add(u, v, c):
        nxt[u].append(len(head)); head.append(v); cap.append(c)
        nxt[v].append(len(head)); head.append(u); cap.append(0)
    for u, v, c in arcs:
        add(u, v, c)
    value = 0
    while True:
        parent_arc = [-1] * n_nodes
        parent_arc[source] = -2
        queue = deque([source])
        while queue and parent_arc[sink] == -1:
            u = queue.popleft()
            for e in nxt[u]:
                v = head[e]
                if cap[e] > 0 and parent_arc[v] == -1:
                    parent_arc[v] = e
                    queue.append(v)
        if parent_arc[sink] == -1:
            break
        bottleneck = None
        v = sink
        while v != source:
            e = parent_arc[v]
            bottleneck = cap[e] if bottleneck is None else min(bottleneck, cap[e])
            v = head[e ^ 1]
        v = sink
        while v != source:
            e = parent_arc[v]
            cap[e] -= bottleneck
            cap[e ^ 1] += bottleneck
            v = head[e ^ 1]
        value += bottleneck
    flows = [cap[2 * i + 1] for i in range(len(arcs))]
    return value, flows


def solve_allocation(instance):
    """An exact allocation, or None when the covering condition fails.

    Network: source -> item (capacity w_x), item -> atom for atoms of C_x
    (unbounded), atom -> sink (capacity mu(atom)); all capacities cleared
    to integers by the common denominator, then integral max-flow.
    """
    space = instance.space
    denoms = [w.denominator for w in instance.weights]
    denoms += [w.denominator for w in space.weights]
    scale = lcm(*denoms) if denoms else 1
    n_items = len(instance)
    n_atoms = len(space)
    source = 0
    sink = 1 + n_items + n_atoms
    supply = sum(int(w * scale) for w in instance.weights)
    arcs = []
    for i, w in enumerate(instance.weights):
        arcs.append((source, 1 + i, int(w * scale)))
    item_atom_start = len(arcs)
    pair_of_arc = []
    for i, ev in enumerate(instance.events):
        for a in ev:
            j = space.index(a)
            arcs.append((1 + i, 1 + n_items + j, supply))
            pair_of_arc.append((instance.ids[i], a))
    for j, w in enumerate(space.weights):
        arcs.append((1 + n_items + j, sink, int(w * scale)))
    value, flows = _max_flow(sink + 1, arcs, source, sink)
    if value != supply:
        return None
    masses = {}
    for k, pair in enumerate(pair_of_arc):
        f = flows[item_atom_start + k]
        if f:
            masses[pair] = rat(f, scale)
    return Allocation(masses)


def verify_allocation(instance, allocation):
    """Exact check of every allocation invariant; never raises on content."""
    space = instance.space
    atoms = set(space.ids)
    items = set(instance.ids)
    for (x, a), m in allocation.masses.items():
        if x not in items or a not in atoms:
            return False
        if m < 0:
            return False
        if a not in instance.events[instance.ids.index(x)]:
            return False
    for x, w in zip(instance.ids, instance.weights):
        if allocation.item_total(x) != w:
            return False
    for a, w in zip(space.ids, space.weights):
        if allocation.atom_total(a) > w:
            return False
    return True


def realizable_labels(instance, allocation):
    """Which items' shares are honest events: drawing either none or all of
    every atom's mass.  Such a share is an exact D_x subset of C_x with
    mu(D_x) = w_x."""
    space = instance.space
    labels = {}
    for x in instance.ids:
        labels[x] = all(
            allocation.mass(x, a) in (ZERO, w)
            for a, w in zip(space.ids, space.weights)
        )
    return labels


# --- JSON forms -----------------------------------------------------------------


def instance_to_json(instance):
    return {
        "space": space_to_json(instance.space),
        "items": [
            {"id": x, "w": format_rat(w), "C": sorted(ev)}
            for x, w, ev in zip(instance.ids, instance.weights, instance.events)
        ],
    }


def instance_from_json(data):
    try:
        space = space_from_json(data["space"])
        items = [
            (entry["id"], parse_rat(entry["w"]), entry["C"])
            for entry in data["items"]
        ]
    except (KeyError, TypeError, AttributeError) as e:
        raise ValueError("malformed instance: %s" % (e,)) from None
    return HallInstance(space, items)


def allocation_to_json(allocation):
    return {
        "masses": [
            {"item": x, "atom": a, "m": format_rat(m)}
            for (x, a), m in sorted(allocation.masses.items())
        ]
    }


def allocation_from_json(data):
    try:
        masses = {
            (entry["item"], entry["atom"]): parse_rat(entry["m"])
            for entry in data["masses"]
        }
    except (KeyError, TypeError, AttributeError) as e:
        raise ValueError("malformed allocation: %s" % (e,)) from None
    return Allocation(masses)
