"""Gaussian RBF networks with fixed centres and a linear output layer.

``phi(x) = sum_i alpha_i exp(-|x - c_i|^2)``. Centres are chosen by k-means++
and only the output weights are fitted, by weighted ridge least squares, which
lets a weighted coreset stand in for the full training set.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.cluster.vq import kmeans2

from .errors import InvalidInputError
from .geometry import WeightedPointSet, normalize_to_unit_ball
from .sampling import Coreset, build_coreset, uniform_coreset
from .sensitivity import rbf_sensitivity_bounds

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RBFNNModel:
    centers: np.ndarray
    alphas: np.ndarray
    ridge: float = 0.0
    min_norm_fallback: bool = False

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        a = np.asarray(self.alphas, dtype=np.float64).ravel()
        if C.shape[0] < 1 or C.shape[0] != a.shape[0]:
            raise InvalidInputError("need L >= 1 centers with one alpha each")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(a))):
            raise InvalidInputError("model has non-finite entries")
        object.__setattr__(self, "centers", C)
        object.__setattr__(self, "alphas", a)

    @property
    def L(self) -> int:
        return self.alphas.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.centers.shape[1]:
            raise InvalidInputError(f"inputs have {X.shape[1]} features, model expects {self.centers.shape[1]}")
        return design_matrix(X, self.centers) @ self.alphas


def design_matrix(X, centers) -> np.ndarray:
    """``Phi[p, i] = exp(-|x_p - c_i|^2)``."""
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(centers, dtype=np.float64)
    sq = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.exp(-np.maximum(sq, 0.0))


def rbfnn_eval(model: RBFNNModel, x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.centers.shape[1]:
        raise InvalidInputError("dimension mismatch between query and centers")
    return float(model.predict(x[None, :])[0])


def fit_output_weights(data: WeightedPointSet, centers, ridge: float = 1e-8) -> RBFNNModel:
    """Minimise ``sum_p w(p) (y(p) - phi(p))^2 + ridge |alpha|^2`` over ``alpha``.

    Solved through the normal equations. With ``ridge = 0`` and a singular
    Gram matrix the minimum-norm least-squares solution is returned and
    ``min_norm_fallback`` is set.
    """
    if data.labels is None:
        raise InvalidInputError("fitting needs labels")
    if ridge < 0:
        raise InvalidInputError("ridge must be nonnegative")
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if C.shape[1] != data.d:
        raise InvalidInputError("centers dimension does not match data")
    Phi = design_matrix(data.points, C)
    w = data.weights
    G = Phi.T @ (Phi * w[:, None])
    b = Phi.T @ (w * data.labels)
    G[np.diag_indices_from(G)] += ridge
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            alpha = scipy.linalg.solve(G, b, assume_a="pos")
        fallback = False
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
        sw = np.sqrt(w)
        A = np.vstack([Phi * sw[:, None], np.sqrt(ridge) * np.eye(C.shape[0])])
        rhs = np.concatenate([sw * data.labels, np.zeros(C.shape[0])])
        alpha = np.linalg.lstsq(A, rhs, rcond=None)[0]
        fallback = True
        log.info("normal equations singular; using minimum-norm least squares")
    return RBFNNModel(C, alpha, ridge, fallback)


def training_objective(data: WeightedPointSet, model: RBFNNModel):
    """Expanded objective ``sum w y^2 - 2 sum_i alpha_i A_i + beta``.

    Returns ``(total, A, beta)`` where ``A_i = sum_p w y exp(-|p - c_i|^2)`` and
    ``beta = sum_p w phi(p)^2``.
    """
    if data.labels is None:
        raise InvalidInputError("objective needs labels")
    Phi = design_matrix(data.points, model.centers)
    w, y = data.weights, data.labels
    alpha_terms = Phi.T @ (w * y)
    beta = float(w @ (Phi @ model.alphas) ** 2)
    total = float(w @ (y * y)) - 2.0 * float(model.alphas @ alpha_terms) + beta
    return total, alpha_terms, beta


def direct_objective(data: WeightedPointSet, model: RBFNNModel) -> float:
    r = data.labels - model.predict(data.points)
    return float(data.weights @ (r * r))


def kmeans_pp_centers(X, L: int, seed: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if L < 1 or L > X.shape[0]:
        raise InvalidInputError(f"need 1 <= L <= n centers, got {L}")
    centers, _ = kmeans2(X, L, minit="++", seed=np.random.default_rng(seed))
    return centers


# -- function-approximation experiment ---------------------------------------


def target_function(X) -> np.ndarray:
    """``exp(-|x|^2) + 0.2 cos(4 |x|)``."""
    r = np.linalg.norm(np.atleast_2d(X), axis=1)
    return np.exp(-r * r) + 0.2 * np.cos(4.0 * r)


def uniform_disk(n: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    r = radius * np.sqrt(rng.random(n))
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


@dataclass
class FuncApproxConfig:
    n_points: int = 10_000
    subset_size: int = 400
    seeds: tuple = tuple(range(10))
    center_count: int = 60
    ridge: float = 1e-8
    disk_radius: float = 1.5
    test_size: int = 2000
    data_seed: int = 0
    mode: str = "lemma"


@dataclass
class FuncApproxReport:
    config: FuncApproxConfig
    rmse: dict = field(default_factory=dict)  # arm -> list of per-seed RMSE
    models: dict = field(default_factory=dict)  # arm -> model of the first seed

    def medians(self) -> dict:
        return {arm: float(np.median(v)) for arm, v in self.rmse.items()}


def _fit_on(train: WeightedPointSet, c: Coreset, centers, ridge) -> RBFNNModel:
    sub = WeightedPointSet(train.points[c.indices], c.weights, train.labels[c.indices])
    return fit_output_weights(sub, centers, ridge)


def function_approx_experiment(cfg: Optional[FuncApproxConfig] = None, **overrides) -> FuncApproxReport:
    """Fit the same RBFNN on the full data, a uniform subset and an RBF coreset.

    Inputs are uniform on a disk; labels are :func:`target_function`. Centres
    come from k-means++ on the full inputs and are shared by all arms; the
    test set is a fresh uniform draw on the same disk. Each seed redraws only
    the two subsets.
    """
    cfg = cfg or FuncApproxConfig()
    for k, v in overrides.items():
        setattr(cfg, k, v)
    if cfg.subset_size > cfg.n_points:
        raise InvalidInputError("subset_size must not exceed n_points")
    rng = np.random.default_rng(cfg.data_seed)
    X = uniform_disk(cfg.n_points, cfg.disk_radius, rng)
    train = WeightedPointSet(X, np.ones(cfg.n_points), target_function(X))
    X_test = uniform_disk(cfg.test_size, cfg.disk_radius, rng)
    y_test = target_function(X_test)
    centers = kmeans_pp_centers(X, cfg.center_count, cfg.data_seed)

    normed = normalize_to_unit_ball(train)
    profile = rbf_sensitivity_bounds(normed, 1.0, cfg.mode)

    def rmse(model):
        return float(np.sqrt(np.mean((model.predict(X_test) - y_test) ** 2)))

    report = FuncApproxReport(cfg)
    full_model = fit_output_weights(train, centers, cfg.ridge)
    report.rmse["full"] = [rmse(full_model)] * len(cfg.seeds)
    report.models["full"] = full_model
    report.rmse["uniform"] = []
    report.rmse["coreset"] = []
    for seed in cfg.seeds:
        if cfg.subset_size == cfg.n_points:
            arms = {"uniform": Coreset.identity(train), "coreset": Coreset.identity(train)}
        else:
            arms = {
                "uniform": uniform_coreset(train, cfg.subset_size, seed),
                "coreset": build_coreset(normed, profile, cfg.subset_size, seed),
            }
        for arm, c in arms.items():
            model = _fit_on(train, c, centers, cfg.ridge)
            report.rmse[arm].append(rmse(model))
            report.models.setdefault(arm, model)
    return report


def surface_dump(model: RBFNNModel, radius: float, resolution: int = 61) -> str:
    """gnuplot ``splot`` data: ``x y z`` rows, blank line between scanlines, disk only."""
    axis = np.linspace(-radius, radius, resolution)
    lines = []
    for xv in axis:
        for yv in axis:
            if xv * xv + yv * yv <= radius * radius:
                z = model.predict([[xv, yv]])[0]
                lines.append(f"{xv:.6g} {yv:.6g} {z:.6g}")
            else:
                lines.append(f"{xv:.6g} {yv:.6g} NaN")
        lines.append("")
    return "\n".join(lines) + "\n"
