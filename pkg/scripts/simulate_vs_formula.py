#!/usr/bin/env python3
"""Monte Carlo protocol estimates against the exact success probability.

Usage: python scripts/simulate_vs_formula.py [trials [seed]]
"""

import sys

from anomalyid.simulate import SimulationConfig, simulate


def main() -> None:
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    grid = [(1, 2), (2, 2), (3, 2), (4, 2), (1, 3), (2, 3), (3, 3)]
    print(f"{'k':>3} {'d':>3} {'mode':>14} {'estimate':>10} {'exact':>10} {'z':>7}")
    for k, d in grid:
        for mode in ("rao-blackwell", "bernoulli"):
            cfg = SimulationConfig(n=max(4, k), k=k, d=d, trials=trials, seed=seed, mode=mode)
            res = simulate(cfg)
            print(
                f"{k:>3} {d:>3} {mode:>14} {res.estimate:>10.6f} "
                f"{float(res.analytic):>10.6f} {res.z_score:>7.2f}"
            )


if __name__ == "__main__":
    main()
