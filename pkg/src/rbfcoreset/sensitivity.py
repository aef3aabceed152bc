"""Sensitivity upper bounds for the RBF and Laplacian losses.

For a weighted set ``(P, w)`` and loss ``f`` the sensitivity of ``p`` is

    s(p) = sup_x  w(p) f(p, x) / sum_q w(q) f(q, x).

The analytic bounds reduce ``f`` to the absolute inner product of lifted
vectors (see :mod:`rbfcoreset.geometry`) and bound that ratio with an l1
conditioner. :func:`brute_force_sensitivity` evaluates the ratio directly over
a finite query set and is the independent check used by the tests and by
``rbfcoreset oracle``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .errors import InvalidInputError, UnsupportedDimensionError
from .geometry import WeightedPointSet, check_unit_ball, lift_points
from .l1svd import compute_l1_conditioner

log = logging.getLogger(__name__)

LOSSES = ("rbf", "laplacian")
MODES = ("lemma", "algorithm1")


@dataclass(frozen=True)
class SensitivityProfile:
    """Per-point sensitivity upper bounds plus provenance.

    ``total_bound`` is the closed-form cap on ``total`` implied by the per-point formula
    (before conditioner slack); ``conditioner_distortion`` is the slack ``c``
    measured on the conditioner that produced ``bounds``.
    """

    bounds: np.ndarray
    total: float
    loss: str
    radius: Optional[float]
    mode: str
    conditioner_distortion: float
    total_bound: float = math.inf
    saturated: bool = False

    @property
    def n(self) -> int:
        return self.bounds.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return self.bounds / self.total


def _exp_saturating(log_values: np.ndarray, n: int) -> tuple[np.ndarray, bool]:
    # cap so that the sum of n bounds stays finite
    cap = math.log(np.finfo(np.float64).max / max(n, 1))
    over = log_values > cap
    if np.any(over):
        warnings.warn(
            f"{int(over.sum())} sensitivity bounds overflow float64; saturating",
            RuntimeWarning,
            stacklevel=3,
        )
    return np.exp(np.minimum(log_values, cap)), bool(np.any(over))


def _log_weights(w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(w)


def _profile(log_bounds, n, **kw) -> SensitivityProfile:
    bounds, sat = _exp_saturating(log_bounds, n)
    bounds.setflags(write=False)
    return SensitivityProfile(bounds=bounds, total=float(bounds.sum()), saturated=sat, **kw)


def rbf_sensitivity_bounds(
    P: WeightedPointSet,
    R: float,
    mode: str = "lemma",
    conditioner: str = "lewis",
) -> SensitivityProfile:
    """Sensitivity bounds for ``f(p, x) = exp(-|p - x|^2)`` over queries ``|x| <= R``.

    ``mode="lemma"`` uses per-point constants ``g(p) = e^{a}(1 + a)`` with
    ``a = 3 R^2 |q_p|`` and a conditioner built on weights ``u = w / g``;
    ``mode="algorithm1"`` uses the uniform constant ``e^{12R^2}(1 + 8R^2)``
    with a conditioner on ``w``. Both require ``|p| <= 1``.
    """
    if mode not in MODES:
        raise InvalidInputError(f"unknown mode {mode!r}")
    if not (np.isfinite(R) and R >= 1.0):
        raise InvalidInputError(f"query radius R must be >= 1, got {R}")
    check_unit_ball(P)
    w = P.weights
    lifted = lift_points(P.points)
    qn = lifted.lifted_norms
    logw = _log_weights(w)

    if mode == "lemma":
        a = 3.0 * R * R * qn
        log_g = a + np.log1p(a)
        # u = w / g, rescaled by e^{shift}; both terms of the bound are invariant to that
        shift = float(np.min(log_g))
        u = w * np.exp(shift - log_g)
        cond = compute_l1_conditioner(lifted.lifted, u, method=conditioner)
        inner = 1.0 / u.sum() + cond.u_norms(lifted.lifted)
        log_bounds = logw + shift + np.log(inner)
        istar = int(np.argmax(qn))
        total_bound = math.exp(min(log_g[istar], 700.0)) * (1.0 + (P.d + 2) ** 1.5)
    else:
        cond = compute_l1_conditioner(lifted.lifted, w, method=conditioner)
        log_c = 12.0 * R * R + math.log1p(8.0 * R * R)
        inner = 1.0 / w.sum() + cond.u_norms(lifted.lifted)
        log_bounds = log_c + logw + np.log(inner)
        total_bound = math.exp(min(log_c, 700.0)) * (1.0 + (P.d + 2) ** 1.5)

    return _profile(
        log_bounds,
        P.n,
        loss="rbf",
        radius=float(R),
        mode=mode,
        conditioner_distortion=cond.measured_distortion,
        total_bound=total_bound,
    )


def laplacian_sensitivity_bounds(P: WeightedPointSet, conditioner: str = "lewis") -> SensitivityProfile:
    """Sensitivity bounds for ``f(p, x) = exp(-|p - x|)`` over all of R^d.

    The bound is the sum of an in-ball term, which uses ``a = 3 sqrt(|q_p|)``
    and a conditioner on weights ``u^2``, and an out-of-ball term
    ``e^{|p| + sqrt(|q*|)} w(p) / sum(w)`` where ``q*`` is the lifted point of
    largest norm (lowest index on ties).
    """
    check_unit_ball(P)
    w = P.weights
    lifted = lift_points(P.points)
    qn = lifted.lifted_norms
    logw = _log_weights(w)

    a = 3.0 * np.sqrt(qn)
    log_g = a + np.log1p(a)
    shift = float(np.min(log_g))
    u = w * np.exp(shift - log_g)
    cond = compute_l1_conditioner(lifted.lifted, u * u, method=conditioner)
    inner = 1.0 / u.sum() + np.sqrt(cond.u_norms(lifted.lifted))
    log_in = logw + shift + np.log(inner)

    istar = int(np.argmax(qn))
    sq_star = math.sqrt(qn[istar])
    pnorm = np.linalg.norm(P.points, axis=1)
    log_out = pnorm + sq_star + logw - math.log(w.sum())
    log_bounds = np.logaddexp(log_in, log_out)

    g_star = math.exp(log_g[istar])
    total_bound = 2.0 * math.exp(3.0 * sq_star) + g_star * (
        1.0 + math.sqrt(P.n) * (P.d + 2) ** 1.25
    )
    return _profile(
        log_bounds,
        P.n,
        loss="laplacian",
        radius=None,
        mode="lemma",
        conditioner_distortion=cond.measured_distortion,
        total_bound=total_bound,
    )


def sensitivity_bounds(P: WeightedPointSet, loss: str, R: float = 1.0, mode: str = "lemma") -> SensitivityProfile:
    if loss == "rbf":
        return rbf_sensitivity_bounds(P, R, mode)
    if loss == "laplacian":
        return laplacian_sensitivity_bounds(P)
    raise InvalidInputError(f"unknown loss {loss!r}")


def log_loss(points, queries, loss: str) -> np.ndarray:
    """``log f(p, x)`` as an ``n x m`` array (rows points, columns queries)."""
    P = np.asarray(points, dtype=np.float64)
    X = np.asarray(queries, dtype=np.float64)
    # direct differences keep small distances accurate (matters under the sqrt)
    sq = cdist(P, X, "sqeuclidean")
    if loss == "rbf":
        return -sq
    if loss == "laplacian":
        return -np.sqrt(sq)
    raise InvalidInputError(f"unknown loss {loss!r}")


def ball_grid(d: int, radius: float, resolution: int) -> np.ndarray:
    """Points of the regular ``resolution^d`` grid on ``[-radius, radius]^d`` lying in the ball."""
    axis = np.linspace(-radius, radius, resolution)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return grid[np.linalg.norm(grid, axis=1) <= radius * (1 + 1e-12)]


def brute_force_sensitivity(
    P: WeightedPointSet,
    loss: str,
    query_radius: float,
    grid_resolution: int,
    extra_queries: Optional[Sequence] = None,
    chunk_entries: int = 1 << 22,
) -> np.ndarray:
    """Maximise the sensitivity ratio over a finite query set.

    The query set is the ball grid of the given radius and resolution, every
    data point, and ``extra_queries``. The result is a lower bound on the true
    sensitivity of each point.
    """
    if P.d > 3:
        raise UnsupportedDimensionError(f"grid oracle supports d <= 3, got d = {P.d}")
    if grid_resolution < 2:
        raise InvalidInputError("grid_resolution must be >= 2")
    parts = [ball_grid(P.d, query_radius, grid_resolution), P.points]
    if extra_queries is not None and len(extra_queries):
        parts.append(np.asarray(extra_queries, dtype=np.float64).reshape(-1, P.d))
    queries = np.vstack(parts)

    logw = _log_weights(P.weights)[:, None]
    best = np.zeros(P.n)
    step = max(1, chunk_entries // P.n)
    for start in range(0, queries.shape[0], step):
        lt = logw + log_loss(P.points, queries[start : start + step], loss)
        ratio = np.exp(lt - logsumexp(lt, axis=0, keepdims=True))
        np.maximum(best, ratio.max(axis=1), out=best)
    return best


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` near-evenly spaced unit vectors in R^3 (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(n)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi), z))


def sphere_radius(n: int) -> float:
    return math.sqrt(math.log(n) / (2.0 * math.cos(math.pi / n)))


def min_pairwise_distance(points) -> float:
    from scipy.spatial.distance import pdist

    return float(pdist(np.asarray(points)).min())


def lower_bound_instance(n: int, d: int, generator: str = "guaranteed_separation") -> WeightedPointSet:
    """Points on a 2-sphere in the first three coordinates with total sensitivity >= n/2.

    ``paper_formula`` uses radius ``sqrt(ln n / (2 cos(pi/n)))``;
    ``guaranteed_separation`` scales the lattice until the minimum pairwise
    distance is at least ``sqrt(ln n)``, which forces every point's ratio at
    ``x = p`` to be at least 1/2.
    """
    if n < 3:
        raise InvalidInputError("lower-bound instance needs n >= 3")
    if d < 3:
        raise InvalidInputError("lower-bound instance needs d >= 3")
    unit = fibonacci_sphere(n)
    if generator == "paper_formula":
        radius = sphere_radius(n)
    elif generator == "guaranteed_separation":
        target = math.sqrt(math.log(n))
        radius = target / min_pairwise_distance(unit)
        while min_pairwise_distance(unit * radius) < target:
            radius *= 1.0 + 1e-12
    else:
        raise InvalidInputError(f"unknown generator {generator!r}")
    pts = np.zeros((n, d))
    pts[:, :3] = unit * radius
    return WeightedPointSet(pts, np.ones(n))
