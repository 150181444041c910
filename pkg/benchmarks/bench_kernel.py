"""Grid-kernel benchmark: compiled extension vs the numpy fallback.

Runs the same bytecode programs through both backends on increasingly fine
dyadic grids, checks that they return identical results, and prints a timing
table.  Usage:

    python3 benchmarks/bench_kernel.py [--repeat 3] [--seed 0]
"""

import argparse
import random
import time

from clog import kernel, syntax


def random_formula(rng, atoms, size):
    """A propositional formula over the given atoms with `size` grow steps."""
    pool = [syntax.Atom(a) for a in atoms] + [syntax.Const0()]
    f = rng.choice(pool)
    for _ in range(size):
        roll = rng.random()
        if roll < 0.5:
            f = syntax.Monus(f, rng.choice(pool)) if rng.random() < 0.5 else (
                syntax.Monus(rng.choice(pool), f))
        elif roll < 0.75:
            f = syntax.Neg(f)
        else:
            f = syntax.Half(f)
    return f


def timed(fn, repeat):
    best = None
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, out


def bench_case(formula, atoms, denom, repeat):
    program = kernel.compile_formula(formula, atoms)
    scale = denom << program.n_half
    stop_at = scale + 1  # full sweep, no early exit

    def run_py():
        return kernel._py_grid_sup(
            program.codes, program.args, program.n_atoms, denom, scale, stop_at
        )

    rows = {}
    t_py, out_py = timed(run_py, repeat)
    rows["python"] = t_py
    if kernel._compiled is not None:
        def run_c():
            return kernel._compiled.grid_sup(
                program.codes, program.args, program.n_atoms, denom, scale,
                stop_at,
            )

        t_c, out_c = timed(run_c, repeat)
        rows["compiled"] = t_c
        if tuple(out_c[1]) != tuple(out_py[1]) or out_c[0] != out_py[0]:
            raise AssertionError(
                "backends disagree on denom=%d: %r vs %r"
                % (denom, out_c, out_py)
            )
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("active backend at import: %s" % kernel.active_backend())
    if kernel._compiled is None:
        print("compiled extension unavailable; timing the fallback only")

    rng = random.Random(args.seed)
    cases = []
    for n_atoms, size, denoms in [
        (2, 12, (32, 64, 128)),
        (3, 16, (16, 32, 64)),
        (4, 20, (8, 16, 32)),
    ]:
        atoms = ["p%d" % i for i in range(n_atoms)]
        formula = random_formula(rng, atoms, size)
        cases.append((atoms, formula, denoms))

    header = "%-7s %-6s %-9s %10s %10s %8s" % (
        "atoms", "denom", "points", "python", "compiled", "ratio")
    print(header)
    print("-" * len(header))
    for atoms, formula, denoms in cases:
        for denom in denoms:
            points = (denom + 1) ** len(atoms)
            rows = bench_case(formula, atoms, denom, args.repeat)
            t_py = rows["python"]
            if "compiled" in rows:
                t_c = rows["compiled"]
                ratio = "%.1fx" % (t_py / t_c) if t_c > 0 else "inf"
                print("%-7d %-6d %-9d %9.2fms %9.2fms %8s"
                      % (len(atoms), denom, points, t_py * 1e3, t_c * 1e3,
                         ratio))
            else:
                print("%-7d %-6d %-9d %9.2fms %10s %8s"
                      % (len(atoms), denom, points, t_py * 1e3, "-", "-"))
    print("ratio = python time / compiled time (higher favours compiled)")


if __name__ == "__main__":
    main()
