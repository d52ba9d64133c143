#!/usr/bin/env python3
"""Size scaling of the spectral gap for the homogeneous chain.

Sweeps dyadic chain lengths with unit parameters and friction at both
ends, fits the power law, and writes sweep CSV + gnuplot script.  The
fitted slope should sit at -3.
"""

import argparse
from pathlib import Path

from gaplab.records import emit_csv, emit_gnuplot, fit_scaling
from gaplab.scenarios import run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="8,16,32,64,128,256")
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--method", default="direct",
                    choices=("direct", "pencil", "wigner"))
    ap.add_argument("--out", default="homogeneous_1d.csv")
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    records = run_sweep("homogeneous", sizes, method=args.method,
                        params={"gamma": args.gamma})
    out = Path(args.out)
    emit_csv(records, out)
    fit = fit_scaling(records, "power-law")
    emit_gnuplot(out.name, fit, out.with_suffix(".gp"))
    for r in records:
        print(f"n={r.n:4d}  gap={r.gap:.6e}  gap*n^3={r.gap * r.n**3:.4f}")
    print(f"power-law slope = {fit.rate:.4f}  (R^2 = {fit.r_squared:.6f})")


if __name__ == "__main__":
    main()
