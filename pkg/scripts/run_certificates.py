#!/usr/bin/env python3
"""Run the exact certificate matrix over a parameter grid and print it.

Each cell checks, fully symbolically: the witness-curve exponent -n/q, the
Euler-style identity, the straightening automorphism, both cubic root
reports, the Malgrange certificate (fails iff n > q), the quasitameness
certificate, and the escape-trace contradiction.
"""

import argparse
import sys

from lojexp import run_certificate_matrix


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=4)
    ap.add_argument("--q-max", type=int, default=4)
    ap.add_argument("--rho0", type=complex, default=1 + 0j)
    args = ap.parse_args()

    matrix = run_certificate_matrix(
        n_min=1, n_max=args.n_max, q_min=1, q_max=args.q_max, rho0=args.rho0
    )
    width = max(len(name) for cell in matrix.cells for name in cell.checks)
    for cell in matrix.cells:
        status = "PASS" if cell.passed else "FAIL"
        print(f"n={cell.n} q={cell.q}: {status}")
        if not cell.passed:
            for name in cell.failed_checks:
                print(f"    {name:<{width}}  FAILED")
    passed = sum(1 for c in matrix.cells if c.passed)
    print(f"{passed}/{len(matrix.cells)} cells passed")
    return 0 if matrix.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
