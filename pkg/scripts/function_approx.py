"""Function-approximation comparison: full data vs uniform subset vs RBF coreset.

    python3 scripts/function_approx.py --centers 60 --data-seeds 0 1 2
"""
import argparse

from rbfcoreset import FuncApproxConfig, function_approx_experiment

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n-points", type=int, default=10_000)
    ap.add_argument("--subset-size", type=int, default=400)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--centers", type=int, nargs="+", default=[FuncApproxConfig.center_count])
    ap.add_argument("--data-seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--mode", default="lemma", choices=["lemma", "algorithm1"])
    args = ap.parse_args()
    print("L  data_seed  full       uniform    coreset    uniform/coreset")
    for L in args.centers:
        for ds in args.data_seeds:
            cfg = FuncApproxConfig(
                n_points=args.n_points,
                subset_size=args.subset_size,
                seeds=tuple(range(args.seeds)),
                center_count=L,
                data_seed=ds,
                mode=args.mode,
            )
            med = function_approx_experiment(cfg).medians()
            print(f"{L:<3d}{ds:^11d}{med['full']:.3e}  {med['uniform']:.3e}  {med['coreset']:.3e}   {med['uniform'] / med['coreset']:.3f}")
