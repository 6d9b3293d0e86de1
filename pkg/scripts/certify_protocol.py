#!/usr/bin/env python3
"""Feasibility and Born-value sweep of the optimal parallel testers.

Usage: python scripts/certify_protocol.py [max_n [max_k]]
"""

import sys
import time

from anomalyid.certification import certify_report
from anomalyid.operators import DimensionCapError


def main() -> None:
    max_n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    max_k = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    header = f"{'n':>3} {'k':>3} {'d':>3} {'method':>11} {'born':>14} {'formula':>10} {'zero-err':>9} {'ok':>3} {'sec':>6}"
    print(header)
    print("-" * len(header))
    for d in (2, 3):
        for k in range(1, max_k + 1):
            for n in range(k, max_n + 1):
                start = time.monotonic()
                try:
                    rep = certify_report(n, k, d)
                except DimensionCapError as exc:
                    print(f"{n:>3} {k:>3} {d:>3} {'skipped':>11}  ({exc})")
                    continue
                elapsed = time.monotonic() - start
                print(
                    f"{n:>3} {k:>3} {d:>3} {rep.method:>11} {rep.born:>14.10f} "
                    f"{str(rep.formula):>10} {rep.zero_error:>9.1e} "
                    f"{'yes' if rep.passed else 'NO':>3} {elapsed:>6.2f}"
                )


if __name__ == "__main__":
    main()
