"""Self-convergence of the fixed-step integrator on the benchmark plants (noise off)."""

import argparse

import numpy as np

from sysindex.sim import benchmark_input, builtin_system, simulate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dt", type=float, default=0.05,
                        help="coarsest step; 0.25/dt should be an integer")
    parser.add_argument("--t-end", type=float, default=20.0)
    parser.add_argument("--levels", type=int, default=4)
    args = parser.parse_args()

    for name in ("H1", "H2", "H3", "H4"):
        model = builtin_system(name)
        spec = benchmark_input(name, noise_amp=0.0)
        ys = [simulate(model, spec, args.t_end, args.dt / 2**k).y[:, 0][::2**k]
              for k in range(args.levels)]
        diffs = [np.abs(a - b).max() for a, b in zip(ys, ys[1:])]
        ratios = [a / b for a, b in zip(diffs, diffs[1:])]
        print(f"{name}: diffs " + " ".join(f"{d:.2e}" for d in diffs)
              + "  ratios " + " ".join(f"{r:.2f}" for r in ratios))


if __name__ == "__main__":
    main()
