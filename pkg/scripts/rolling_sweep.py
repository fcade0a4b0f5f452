"""Seeded sweep of random convex curves against scaled copies.

    python scripts/rolling_sweep.py --count 20 --scale 1.5

Each row is one curve: the dominance margin, the containment violation and
whether the pair is a finding (dominance without inclusion).  Scales below
1 put the larger copy inside and should fail dominance.
"""

import argparse
import json

import numpy as np

from blaschke_ot.rolling_inclusion import blaschke_verdict, random_convex_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scale", type=float, default=1.5)
    ap.add_argument("--amplitude", type=float, default=0.03)
    ap.add_argument("--normals", type=int, default=200)
    ap.add_argument("--json", action="store_true", help="emit rows as JSON lines")
    args = ap.parse_args()

    findings = 0
    for seed in range(args.seed, args.seed + args.count):
        inner = random_convex_curve(seed, amplitude=args.amplitude)
        w = np.random.default_rng(seed).standard_normal(2)
        v = blaschke_verdict(inner, inner.scaled(args.scale), w / np.linalg.norm(w), n_normals=args.normals, seed=seed)
        findings += v.finding
        row = {
            "seed": seed,
            "min_curvature": inner.meta["min_curvature"],
            "dominance": v.dominance_holds,
            "margin": v.dominance_margin,
            "inclusion": v.inclusion_holds,
            "violation": v.max_violation,
        }
        if args.json:
            print(json.dumps(row, sort_keys=True))
        else:
            print(
                f"seed {seed:3d}  kappa_min={row['min_curvature']:.3f}  dominance={v.dominance_holds!s:5}  "
                f"margin={v.dominance_margin:+.4f}  inclusion={v.inclusion_holds!s:5}  violation={v.max_violation:+.2e}"
            )
    print(f"findings: {findings}")
    return 1 if findings else 0


if __name__ == "__main__":
    raise SystemExit(main())
