#!/usr/bin/env python3
"""Scan the dual certificate family at (n, k, d) = (4, 2, 2).

The feasibility matrix M(nu) has a single negative eigenvalue ~ -const/nu,
so the dual value 5/8 + eps(nu) approaches the primal 5/8 from above as
1/nu.  Usage: python scripts/dual_gap_scan.py [nu ...]
"""

import sys

import numpy as np

from anomalyid.certification import dual_certificate


def main() -> None:
    nus = [float(x) for x in sys.argv[1:]] or [25.0 * 2**i for i in range(9)]
    print(f"{'nu':>10} {'min_eig':>13} {'nu*|min_eig|':>13} {'epsilon':>11} {'dual':>10}")
    for nu in nus:
        cert, min_eig = dual_certificate(nu)
        print(
            f"{nu:>10.1f} {min_eig:>13.4e} {nu * abs(min_eig):>13.6f} "
            f"{cert.epsilon:>11.4e} {cert.y:>10.7f}"
        )
    cert, _ = dual_certificate(nus[-1])
    print(f"\ntr Y = {np.trace(cert.Y):.10f} (= 5/8 * 256 = 160 at this instance)")


if __name__ == "__main__":
    main()
