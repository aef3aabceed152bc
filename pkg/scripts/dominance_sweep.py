"""Tightness of the analytic sensitivity bounds against the grid oracle.

For random unit-ball instances, prints the minimum and median of
bound / oracle per loss and mode (values >= 1 mean the bound dominates).

    python3 scripts/dominance_sweep.py --instances 20 --d 2
"""
import argparse

import numpy as np

from rbfcoreset import WeightedPointSet, brute_force_sensitivity, laplacian_sensitivity_bounds, rbf_sensitivity_bounds

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--resolution", type=int, default=101)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    ratios = {"rbf/lemma/R=1": [], "rbf/algorithm1/R=1": [], "rbf/lemma/R=2": [], "laplacian": []}
    for _ in range(args.instances):
        g = rng.standard_normal((args.n, args.d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        P = WeightedPointSet(g * rng.random((args.n, 1)) ** (1 / args.d), rng.uniform(0.1, 3, args.n))
        for R in (1.0, 2.0):
            o = brute_force_sensitivity(P, "rbf", R, args.resolution)
            ratios[f"rbf/lemma/R={R:.0f}"].append(np.min(rbf_sensitivity_bounds(P, R).bounds / o))
            if R == 1.0:
                ratios["rbf/algorithm1/R=1"].append(np.min(rbf_sensitivity_bounds(P, R, "algorithm1").bounds / o))
        o = brute_force_sensitivity(P, "laplacian", 10.0, args.resolution)
        ratios["laplacian"].append(np.min(laplacian_sensitivity_bounds(P).bounds / o))
    for k, v in ratios.items():
        print(f"{k:20s} min {np.min(v):10.3g}   median {np.median(v):10.3g}")
