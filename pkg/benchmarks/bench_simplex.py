"""Compare the simplex kernels (pure NumPy vs compiled) on random LPs.

The kernels pivot identically, so every outcome is asserted bitwise-equal
before any timing is reported; the table is purely a speed comparison.

    python3 benchmarks/bench_simplex.py [--count N] [--seed S]
"""

import argparse
import time

import numpy as np

from safecut import kernels
from safecut.lp import solve_dense

# (label, n_vars, n_rows) — "node" mirrors a typical branch-and-bound
# relaxation from the verifier; the larger classes stress the tableau loop
SIZES = [("node", 12, 18), ("medium", 40, 60), ("large", 90, 140)]


def random_instances(rng, n, m, count):
    out = []
    for _ in range(count):
        A = rng.normal(0.0, 1.0, (m, n))
        x0 = rng.uniform(-1.0, 1.0, n)  # a feasible anchor so most LPs solve
        b = A @ x0 + rng.uniform(0.0, 2.0, m)
        rels = rng.choice([-1, 1], m)
        b = np.where(rels == 1, b - rng.uniform(0.0, 4.0, m), b)
        c = rng.normal(0.0, 1.0, n)
        lo = np.full(n, -5.0)
        hi = np.full(n, 5.0)
        out.append((c, A, rels, b, lo, hi))
    return out


def run(kernel, instances):
    t0 = time.perf_counter()
    outcomes = [solve_dense(*inst, kernel=kernel) for inst in instances]
    return time.perf_counter() - t0, outcomes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=150, help="LPs per size class")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    av = kernels.available_kernels()
    print(f"kernels available: {', '.join(av)}  (active: {kernels.KERNEL_NAME})")
    if len(av) == 1:
        print("compiled kernel not built; timings cover the fallback only")

    rng = np.random.default_rng(args.seed)
    header = f"{'class':<8} {'size':<10} " + "".join(f"{k:>12} " for k in av)
    if len(av) > 1:
        header += f"{'speedup':>9}"
    print(header)
    print("-" * len(header))

    for label, n, m in SIZES:
        instances = random_instances(rng, n, m, args.count)
        times, all_outcomes = {}, {}
        for name, kern in av.items():
            times[name], all_outcomes[name] = run(kern, instances)

        names = list(av)
        base = all_outcomes[names[0]]
        for other in names[1:]:
            for a, o in zip(base, all_outcomes[other]):
                assert a.status == o.status, "kernel outcomes diverge"
                if a.status == "optimal":
                    assert a.objective_value == o.objective_value
                    assert np.array_equal(a.point, o.point)

        row = f"{label:<8} {f'{n}x{m}':<10} "
        row += "".join(
            f"{args.count / times[k]:>9.0f} /s " for k in av
        )
        if len(av) > 1:
            row += f"{times['py'] / times['ext']:>8.2f}x"
        print(row)

    print("\nall kernel outcomes bitwise-identical")


if __name__ == "__main__":
    main()
