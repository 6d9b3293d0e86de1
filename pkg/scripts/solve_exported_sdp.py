#!/usr/bin/env python3
"""Export a parallel tester SDP and solve it with SCS.

Usage: python scripts/solve_exported_sdp.py N K D [--warm] [--eps E] [--out PATH]

Cold solves are exact but the (4,2,2) instance is degenerate and ADMM
converges very slowly on it; --warm hands the solver the analytic testers
plus the dual certificate at large nu, after which it terminates on its own
KKT residuals almost immediately.
"""

import argparse
import tempfile

from anomalyid.certification import success_probability_formula
from anomalyid.sdpa import export_sdp, parallel_warm_start, read_sdpa, solve_sdpa


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("n", type=int)
    parser.add_argument("k", type=int)
    parser.add_argument("d", type=int)
    parser.add_argument("--warm", action="store_true")
    parser.add_argument("--eps", type=float, default=1e-6)
    parser.add_argument("--max-iters", type=int, default=100_000)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    path = args.out or tempfile.mktemp(suffix=".dat-s")
    meta = export_sdp(args.n, args.k, args.d, path)
    print(f"wrote {path}: {meta['n_constraints']} constraints, blocks {meta['block_sizes']}")
    instance = read_sdpa(path)
    if args.warm:
        blocks, y_eq = parallel_warm_start(args.n, args.k, args.d, nu=1e7)
        result = solve_sdpa(
            instance, eps=args.eps, max_iters=args.max_iters,
            warm_primal=blocks, warm_dual_eq=y_eq, verbose=True,
        )
    else:
        result = solve_sdpa(instance, eps=args.eps, max_iters=args.max_iters, verbose=True)
    formula = float(success_probability_formula(args.k, args.d))
    print(
        f"status {result.status} after {result.iterations} iterations "
        f"({result.solve_time:.1f}s): value {result.value:.8f}, "
        f"protocol formula {formula:.8f}, diff {abs(result.value - formula):.2e}"
    )


if __name__ == "__main__":
    main()
