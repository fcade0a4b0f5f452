"""Audit the power cost |x - y|^p / p over a range of exponents.

    python scripts/mtw_scan.py --pmin -3 --pmax 3 --num 13 --samples 1000

Prints one row per exponent: classification, minimum tensor value and the
sample that attains it.  The exponent p = 1 has no inverse of the
c-gradient map and is reported as an error row.
"""

import argparse

import numpy as np

from blaschke_ot.cost_models import power_cost
from blaschke_ot.errors import GeometryError
from blaschke_ot.mtw_audit import audit_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pmin", type=float, default=-3.0)
    ap.add_argument("--pmax", type=float, default=3.0)
    ap.add_argument("--num", type=int, default=13)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'p':>7}  {'class':<12} {'min':>12}")
    for p in np.linspace(args.pmin, args.pmax, args.num):
        if p == 0:
            continue
        try:
            r = audit_grid(power_cost(p, args.dim), n=args.samples, seed=args.seed)
        except GeometryError as exc:
            print(f"{p:7.3f}  {'error':<12} {type(exc).__name__}")
            continue
        print(f"{p:7.3f}  {r.classification:<12} {r.min_value:12.4e}")


if __name__ == "__main__":
    main()
