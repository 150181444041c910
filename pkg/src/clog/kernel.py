"""Exhaustive dyadic-grid evaluation of formulas, exactly, in integers.

A formula compiles to a postfix bytecode (PUSH0, PUSH_ATOM, NEG, HALF, MONUS)
which is then evaluated at every point of the grid {0, 1/D, ..., 1}^n.  All
arithmetic is integer: values are scaled by S = D * 2^h where h is the number
of HALF instructions in the program.  The value computed at a node whose
subtree contains k halvings is an integer multiple of 2^(h-k) after scaling
(induction over the tree: leaves are multiples of 2^h * (S/D-units), NEG and
MONUS preserve the property, HALF consumes one factor of two), so the right
shift in HALF is always exact and the whole evaluation is exact rational
arithmetic in disguise.

Two interchangeable backends implement the same contract: a Cython extension
(clog._gridkernel) selected at import when available, and a numpy int64
fallback.  Set CLOG_FORCE_PY_KERNEL=1 to force the fallback.  Both return the
first grid point (odometer order, last atom fastest) attaining the maximum.
"""

import os
from array import array

from . import syntax
from .rationals import rat

OP_PUSH0, OP_PUSH_ATOM, OP_NEG, OP_HALF, OP_MONUS = range(5)

_MAX_STACK = 256
_MAX_ATOMS = 16
_MAX_POINTS = 2_000_000
_MAX_SCALE = 1 << 61


class KernelUnsupported(ValueError):
    """Raised when a formula or grid falls outside the kernel's integer range."""


class Program:
    def __init__(self, codes, args, n_atoms, n_half, max_stack):
        self.codes = codes
        self.args = args
        self.n_atoms = n_atoms
        self.n_half = n_half
        self.max_stack = max_stack


def compile_formula(formula, atom_order):
    """Flatten a propositional formula into bytecode over the given atoms."""
    index = {name: i for i, name in enumerate(atom_order)}
    codes = array("q")
    args = array("q")
    n_half = 0
    max_stack = 0
    depth = 0

    def emit(op, arg=0):
        codes.append(op)
        args.append(arg)

    def walk(f):
        nonlocal n_half, max_stack, depth
        if isinstance(f, syntax.Const0):
            emit(OP_PUSH0)
            depth += 1
        elif isinstance(f, syntax.Atom):
            try:
                emit(OP_PUSH_ATOM, index[f.name])
            except KeyError:
                raise KeyError("atom %r not in atom order" % f.name) from None
            depth += 1
        elif isinstance(f, syntax.Neg):
            walk(f.body)
            emit(OP_NEG)
        elif isinstance(f, syntax.Half):
            walk(f.body)
            emit(OP_HALF)
            n_half += 1
        elif isinstance(f, syntax.Monus):
            walk(f.left)
            walk(f.right)
            emit(OP_MONUS)
            depth -= 1
        else:
            raise TypeError("not a propositional formula: %r" % (f,))
        max_stack = max(max_stack, depth)

    walk(formula)
    return Program(codes, args, len(atom_order), n_half, max_stack)


def _py_grid_sup(codes, args, n_atoms, denom, scale, stop_at):
    """numpy int64 backend; same contract as the compiled grid_sup."""
    import numpy as np

    side = denom + 1
    total = side**n_atoms
    unit = scale // denom
    lin = np.arange(total, dtype=np.int64)
    atom_vals = []
    for k in range(n_atoms):
        stride = side ** (n_atoms - 1 - k)
        atom_vals.append((lin // stride) % side * unit)
    stack = []
    for op, arg in zip(codes, args):
        if op == OP_PUSH0:
            stack.append(np.zeros(total, dtype=np.int64))
        elif op == OP_PUSH_ATOM:
            stack.append(atom_vals[arg].copy())
        elif op == OP_NEG:
            stack[-1] = scale - stack[-1]
        elif op == OP_HALF:
            stack[-1] >>= 1
        else:
            b = stack.pop()
            stack[-1] = np.maximum(stack[-1] - b, 0)
    values = stack[0]
    reached = values >= stop_at
    pos = int(reached.argmax()) if reached.any() else int(values.argmax())
    best = int(values[pos])
    point = []
    for k in range(n_atoms):
        stride = side ** (n_atoms - 1 - k)
        point.append((pos // stride) % side)
    return best, point


try:
    if os.environ.get("CLOG_FORCE_PY_KERNEL"):
        raise ImportError
    from . import _gridkernel as _compiled
except ImportError:
    _compiled = None


def active_backend():
    return "compiled" if _compiled is not None else "python"


def _dispatch(program, denom, scale, stop_at):
    if _compiled is not None:
        return _compiled.grid_sup(
            program.codes, program.args, program.n_atoms, denom, scale, stop_at
        )
    return _py_grid_sup(
        program.codes, program.args, program.n_atoms, denom, scale, stop_at
    )


def grid_max(formula, atom_order, denom, stop_at_positive=False):
    """Exact maximum of the formula over the dyadic grid of denominator denom.

    Returns (value, assignment) with exact rationals.  With
    stop_at_positive=True, returns at the first grid point with positive
    value instead of the global maximum (the assignment is still exact and
    its value is the one returned).
    """
    if denom < 1:
        raise ValueError("denominator must be >= 1")
    program = compile_formula(formula, atom_order)
    if program.n_atoms > _MAX_ATOMS or program.max_stack > _MAX_STACK:
        raise KernelUnsupported("formula too large for the grid kernel")
    if (denom + 1) ** program.n_atoms > _MAX_POINTS:
        raise KernelUnsupported("grid too large")
    scale = denom << program.n_half
    if scale > _MAX_SCALE:
        raise KernelUnsupported("too many halvings for int64 scaling")
    stop_at = 1 if stop_at_positive else scale + 1
    best, point = _dispatch(program, denom, scale, stop_at)
    assignment = {name: rat(point[i], denom) for i, name in enumerate(atom_order)}
    return rat(best, scale), assignment
