#!/usr/bin/env python3
"""Scan phi(r) = min ||grad f|| over geometric radii and fit the log-log slope.

For the built-in family the slope estimates L_infinity = -n/q; the exact
value comes from the witness-curve certificate, so this scan is the numeric
cross-check. Writes a CSV (r, phi, converged_starts) per polynomial when
--out-dir is given.
"""

import argparse
import csv
import sys
from pathlib import Path

from lojexp import OptConfig, estimate_exponent, family, parse_poly


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "targets",
        nargs="*",
        default=["1,1", "2,1"],
        help='family params "N,Q" or a polynomial literal (default: 1,1 2,1)',
    )
    ap.add_argument("--rmin", type=float, default=10.0)
    ap.add_argument("--rmax", type=float, default=1.0e4)
    ap.add_argument("--count", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()

    cfg = OptConfig(seed=args.seed)
    for target in args.targets:
        parts = target.split(",")
        if len(parts) == 2 and all(p.strip().isdigit() for p in parts):
            n, q = int(parts[0]), int(parts[1])
            g, label, expected = family(n, q), f"f_{n}_{q}", -n / q
        else:
            g, label, expected = parse_poly(target), target, None
        fit = estimate_exponent(g, r_min=args.rmin, r_max=args.rmax, count=args.count, config=cfg)
        line = f"{label}: slope = {fit.slope:+.6f} (rms residual {fit.residual:.2e})"
        if expected is not None:
            line += f", exact L = {expected:+.4f}"
        print(line)
        for s in fit.samples:
            print(f"    r = {s.r:12.2f}  phi = {s.phi:.6e}  ({s.converged_starts} converged)")
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / f"slope_{label.replace('*', '')}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["r", "phi", "converged_starts"])
                for s in fit.samples:
                    w.writerow([s.r, s.phi, s.converged_starts])
    return 0


if __name__ == "__main__":
    sys.exit(main())
