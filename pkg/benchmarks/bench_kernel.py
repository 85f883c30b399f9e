"""Compare the compiled and pure-Python cascade kernels.

Runs the same seeded block of trials through each available kernel,
checks that the tallies agree bit for bit and reports trials per second.

    python3 benchmarks/bench_kernel.py [--trials N] [--energies X ...]
"""
import argparse
import time

import numpy as np

from qpcascade.cascade import _backend
from qpcascade.cascade.engine import _max_steps


def time_kernel(kern, seed, trials, w, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kern.run_seeded(seed, 0, trials, w, 1.0, 3.0, 2.0, False, _max_steps(w))
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--energies", type=float, nargs="+", default=[10.0, 100.0, 1000.0], help="E_p/Δ values")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    kernels = _backend.available_kernels()
    print(f"kernels: {', '.join(kernels)}; {args.trials} trials, best of {args.repeat}")
    print(f"{'E_p/Δ':>8} " + " ".join(f"{k + ' trials/s':>18}" for k in kernels) + f" {'speedup':>9} {'identical':>9}")
    for w in args.energies:
        rates, outs = [], []
        for name in kernels:
            dt, out = time_kernel(_backend.get_kernel(name), args.seed, args.trials, w, args.repeat)
            rates.append(args.trials / dt)
            outs.append(out)
        same = all(all(np.array_equal(a, b) for a, b in zip(outs[0], o)) for o in outs[1:])
        speedup = f"{rates[-1] / rates[0]:.1f}x" if len(rates) > 1 else "-"
        print(f"{w:>8g} " + " ".join(f"{r:>18.0f}" for r in rates) + f" {speedup:>9} {str(same):>9}")


if __name__ == "__main__":
    main()
