"""Weighted point sets and the quadratic lifting.

The lifting maps a point ``p`` to ``q_p = [|p|^2, -2 p, 1]`` and a query ``x``
to ``y = [1, x, |x|^2]`` so that ``|q_p . y| = |p - x|^2``. Squared distances
thereby become absolute inner products, which is what the l1 conditioning in
:mod:`rbfcoreset.l1svd` operates on.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidInputError, PreconditionError

UNIT_BALL_TOL = 1e-12


def _as_finite(a, name: str, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class WeightedPointSet:
    """``n`` points in ``d`` dimensions with nonnegative weights and optional labels.

    ``scale`` records the divisor applied by :func:`normalize_to_unit_ball`
    (1.0 when the points are in their original coordinates).
    """

    points: np.ndarray
    weights: np.ndarray
    labels: Optional[np.ndarray] = None
    scale: float = 1.0

    def __post_init__(self):
        pts = _as_finite(self.points, "points", 2)
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidInputError(f"need n >= 1 and d >= 1, got shape {pts.shape}")
        w = _as_finite(self.weights, "weights", 1)
        if w.shape[0] != pts.shape[0]:
            raise InvalidInputError("weights length does not match number of points")
        if np.any(w < 0) or not np.any(w > 0):
            raise InvalidInputError("weights must be nonnegative with at least one positive entry")
        lab = None
        if self.labels is not None:
            lab = _as_finite(self.labels, "labels", 1)
            if lab.shape[0] != pts.shape[0]:
                raise InvalidInputError("labels length does not match number of points")
            lab.setflags(write=False)
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidInputError("scale must be a positive finite real")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def from_points(cls, points, weights=None, labels=None) -> "WeightedPointSet":
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if weights is None:
            weights = np.ones(pts.shape[0])
        return cls(pts, weights, labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def subset(self, mask_or_idx) -> "WeightedPointSet":
        lab = None if self.labels is None else self.labels[mask_or_idx]
        return WeightedPointSet(self.points[mask_or_idx], self.weights[mask_or_idx], lab, self.scale)

    def with_weights(self, weights) -> "WeightedPointSet":
        return replace(self, weights=np.asarray(weights, dtype=np.float64))

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=1)))


@dataclass(frozen=True)
class LiftedPointSet:
    lifted: np.ndarray
    lifted_norms: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lifted_norms", np.linalg.norm(self.lifted, axis=1))


def lift_point(p) -> np.ndarray:
    """Return ``[|p|^2, -2 p_1, ..., -2 p_d, 1]``."""
    p = _as_finite(p, "point", 1)
    if p.shape[0] < 1:
        raise InvalidInputError("point must have d >= 1 entries")
    return np.concatenate(([p @ p], -2.0 * p, [1.0]))


def lift_query(x) -> np.ndarray:
    """Return ``[1, x_1, ..., x_d, |x|^2]``."""
    x = _as_finite(x, "query", 1)
    if x.shape[0] < 1:
        raise InvalidInputError("query must have d >= 1 entries")
    return np.concatenate(([1.0], x, [x @ x]))


def lift_points(points) -> LiftedPointSet:
    """Vectorised :func:`lift_point` over the rows of an ``n x d`` array."""
    pts = _as_finite(points, "points", 2)
    sq = np.einsum("ij,ij->i", pts, pts)
    lifted = np.column_stack((sq, -2.0 * pts, np.ones(pts.shape[0])))
    return LiftedPointSet(lifted)


def lift_queries(queries) -> np.ndarray:
    xs = _as_finite(queries, "queries", 2)
    sq = np.einsum("ij,ij->i", xs, xs)
    return np.column_stack((np.ones(xs.shape[0]), xs, sq))


def normalize_to_unit_ball(P: WeightedPointSet) -> WeightedPointSet:
    """Rescale ``P`` so every point has l2-norm at most 1.

    Points are divided by the largest row norm when it exceeds 1; the divisor
    is multiplied into ``scale``. Weights and labels are untouched. A query
    radius ``R`` in the original coordinates becomes ``R / scale`` (relative to
    the input's own ``scale``) afterwards.
    """
    m = P.max_norm()
    if m <= 1.0:
        return P
    pts = P.points / m
    # guard against rounding pushing a row a hair over 1
    norms = np.linalg.norm(pts, axis=1)
    over = norms > 1.0
    if np.any(over):
        pts = pts.copy()
        pts[over] /= norms[over, None]
    return WeightedPointSet(pts, P.weights, P.labels, P.scale * m)


def check_unit_ball(P: WeightedPointSet) -> None:
    norms = np.linalg.norm(P.points, axis=1)
    bad = np.flatnonzero(norms > 1.0 + UNIT_BALL_TOL)
    if bad.size:
        i = int(bad[0])
        raise PreconditionError(
            f"point {i} has norm {norms[i]:.6g} > 1; normalize the input first"
        )
