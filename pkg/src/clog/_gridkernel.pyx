# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled integer stack machine for exhaustive grid evaluation.

See clog.kernel for the bytecode contract and the scaling argument that makes
every operation (including halving) exact int64 arithmetic.
"""


def grid_sup(long long[::1] codes, long long[::1] args, Py_ssize_t n_atoms,
             long long denom, long long scale, long long stop_at):
    """Maximise the program over the grid {0, 1/denom, ..., 1}^n_atoms.

    Values are scaled by `scale` (= denom * 2^halvings).  Returns
    (best_scaled_value, first_point_reaching_it) where the point is a list of
    grid indices in odometer order (last atom varies fastest).  Stops early at
    the first point whose value reaches `stop_at` (pass scale + 1 to disable).
    """
    cdef Py_ssize_t n_codes = codes.shape[0]
    cdef long long side = denom + 1
    cdef long long unit = scale / denom
    cdef long long stack[256]
    cdef long long point[16]
    cdef long long best_point[16]
    cdef Py_ssize_t sp, i
    cdef Py_ssize_t k
    cdef long long op, v
    cdef long long best = -1
    if n_atoms > 16:
        raise ValueError("grid kernel supports at most 16 atoms")
    for k in range(n_atoms):
        point[k] = 0
        best_point[k] = 0
    while True:
        sp = 0
        for i in range(n_codes):
            op = codes[i]
            if op == 0:
                stack[sp] = 0
                sp += 1
            elif op == 1:
                stack[sp] = point[args[i]] * unit
                sp += 1
            elif op == 2:
                stack[sp - 1] = scale - stack[sp - 1]
            elif op == 3:
                stack[sp - 1] = stack[sp - 1] >> 1
            else:
                sp -= 1
                v = stack[sp - 1] - stack[sp]
                stack[sp - 1] = v if v > 0 else 0
        v = stack[0]
        if v > best:
            best = v
            for k in range(n_atoms):
                best_point[k] = point[k]
            if best >= stop_at:
                break
        k = n_atoms - 1
        while k >= 0:
            point[k] += 1
            if point[k] < side:
                break
            point[k] = 0
            k -= 1
        if k < 0:
            break
    return best, [best_point[k] for k in range(n_atoms)]
