"""Sensitivity coreset vs uniform sampling across data families.

Prints the median (over seeds) sup relative error of both samplers for each
family, plus the ratio uniform / coreset. Ratios above 1 favour the coreset.

    python3 scripts/compare_uniform.py --n 5000 --m 500 --seeds 20
"""
import argparse
from dataclasses import dataclass

import numpy as np

from rbfcoreset import WeightedPointSet, build_coreset, evaluate, rbf_sensitivity_bounds, sample_queries, uniform_coreset


def ball(rng, n, d=2, r=1.0):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (r * rng.random(n) ** (1 / d))[:, None]


def clip(X):
    nr = np.linalg.norm(X, axis=1, keepdims=True)
    return np.where(nr > 1, X / nr, X)


def uniform_ball(rng, n):
    return ball(rng, n)


def gaussian(rng, n):
    return clip(rng.normal(0, 0.35, (n, 2)))


def core_shell(rng, n):
    k = n // 10
    shell = ball(rng, k)
    shell /= np.linalg.norm(shell, axis=1, keepdims=True)
    return np.vstack([ball(rng, n - k, r=0.3), shell])


def cluster_outliers(rng, n):
    k = n // 50
    far = ball(rng, k)
    far[:, 0] = np.abs(far[:, 0])
    return clip(np.vstack([rng.normal([-0.8, 0.0], 0.05, (n - k, 2)), far]))


FAMILIES = {f.__name__: f for f in (uniform_ball, gaussian, core_shell, cluster_outliers)}


@dataclass
class Config:
    n: int = 5000
    m: int = 500
    seeds: int = 20
    queries: int = 1000
    mode: str = "lemma"
    data_seed: int = 0


def run(cfg: Config):
    for name, gen in FAMILIES.items():
        P = WeightedPointSet.from_points(gen(np.random.default_rng(cfg.data_seed), cfg.n))
        prof = rbf_sensitivity_bounds(P, 1.0, cfg.mode)
        Q = sample_queries(2, cfg.queries, 1.0, cfg.data_seed, include_data_points=P)
        cs = [evaluate(P, build_coreset(P, prof, cfg.m, s), Q, "rbf").sup_error for s in range(cfg.seeds)]
        un = [evaluate(P, uniform_coreset(P, cfg.m, s), Q, "rbf").sup_error for s in range(cfg.seeds)]
        mc, mu = np.median(cs), np.median(un)
        print(f"{name:18s} coreset {mc:.4f}  uniform {mu:.4f}  ratio {mu / mc:.2f}  max/min bound {prof.bounds.max() / prof.bounds.min():.1f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    for f, v in vars(Config()).items():
        ap.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    run(Config(**vars(ap.parse_args())))
