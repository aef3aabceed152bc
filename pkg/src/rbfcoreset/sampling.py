"""Importance sampling from a sensitivity profile.

Each of ``m`` i.i.d. draws picks ``p`` with probability ``s(p) / t`` and carries
weight ``t w(p) / (s(p) m)``, so ``sum_S v f(., x)`` is an unbiased estimate of
``sum_P w f(., x)`` for every query ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .geometry import WeightedPointSet, normalize_to_unit_ball
from .sensitivity import SensitivityProfile, laplacian_sensitivity_bounds, rbf_sensitivity_bounds

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Coreset:
    indices: np.ndarray
    weights: np.ndarray
    source_n: int
    m: int
    total_sensitivity: float
    seed: int
    profile_mode: Optional[str] = None
    loss: Optional[str] = None
    radius: Optional[float] = None
    aggregated: bool = True

    @property
    def size(self) -> int:
        return int(self.indices.shape[0])

    def dense_weights(self) -> np.ndarray:
        """Weights scattered onto the source index space (zeros for unsampled points)."""
        out = np.zeros(self.source_n)
        np.add.at(out, self.indices, self.weights)
        return out

    @classmethod
    def identity(cls, P: WeightedPointSet) -> "Coreset":
        """The whole set with its own weights; an exact coreset."""
        idx = np.flatnonzero(P.weights > 0)
        return cls(idx, P.weights[idx].copy(), P.n, idx.size, float("nan"), 0)

    @classmethod
    def empty(cls, source_n: int, m: int, seed: int) -> "Coreset":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0), source_n, m, 0.0, seed)


def _aggregate(idx: np.ndarray, per_draw: np.ndarray):
    uniq, inverse = np.unique(idx, return_inverse=True)
    weights = np.zeros(uniq.shape[0])
    np.add.at(weights, inverse, per_draw)
    return uniq.astype(np.int64), weights


def build_coreset(
    P: WeightedPointSet,
    profile: SensitivityProfile,
    m: int,
    seed: int,
    aggregate: bool = True,
) -> Coreset:
    """Draw ``m`` points i.i.d. with probability ``s(p) / t`` and reweight them.

    With ``aggregate=False`` the raw draw sequence (with repeats) is kept.
    """
    bounds = np.asarray(profile.bounds, dtype=np.float64)
    if bounds.shape != (P.n,):
        raise InvalidInputError(f"profile has {bounds.shape[0]} bounds for {P.n} points")
    if int(m) != m or m < 1:
        raise InvalidInputError(f"sample size m must be a positive integer, got {m}")
    m = int(m)
    w = P.weights
    if not np.all(np.isfinite(bounds)) or np.any(bounds < 0) or np.any((bounds <= 0) & (w > 0)):
        raise InvalidInputError("invalid profile: every positively weighted point needs a bound > 0")
    t = float(bounds.sum())
    rng = np.random.default_rng(seed & SEED_MASK)
    idx = rng.choice(P.n, size=m, replace=True, p=bounds / t)
    per_draw = t * w[idx] / (bounds[idx] * m)
    if aggregate:
        idx, per_draw = _aggregate(idx, per_draw)
    return Coreset(
        indices=idx.astype(np.int64),
        weights=per_draw,
        source_n=P.n,
        m=m,
        total_sensitivity=t,
        seed=int(seed),
        profile_mode=profile.mode,
        loss=profile.loss,
        radius=profile.radius,
        aggregated=aggregate,
    )


def uniform_profile(P: WeightedPointSet) -> SensitivityProfile:
    """Constant bounds; sampling from it is plain uniform sampling with weights ``n w / m``."""
    b = np.ones(P.n)
    return SensitivityProfile(b, float(P.n), loss="uniform", radius=None, mode="uniform", conditioner_distortion=1.0)


def uniform_coreset(P: WeightedPointSet, m: int, seed: int, aggregate: bool = True) -> Coreset:
    return build_coreset(P, uniform_profile(P), m, seed, aggregate)


def _prepare(P: WeightedPointSet, normalize: bool) -> WeightedPointSet:
    return normalize_to_unit_ball(P) if normalize else P


def coreset_rbf(P: WeightedPointSet, R: float, m: int, seed: int, mode: str = "lemma", normalize: bool = False) -> Coreset:
    """Lift, condition, bound and sample in one call (RBF loss, queries ``|x| <= R``).

    With ``normalize=True`` points are first scaled into the unit ball and
    ``R`` is interpreted in the original coordinates, i.e. divided by the scale.
    """
    Q = _prepare(P, normalize)
    radius = max(1.0, R / (Q.scale / P.scale)) if normalize else R
    return build_coreset(Q, rbf_sensitivity_bounds(Q, radius, mode), m, seed)


def coreset_laplacian(P: WeightedPointSet, m: int, seed: int, normalize: bool = False) -> Coreset:
    Q = _prepare(P, normalize)
    return build_coreset(Q, laplacian_sensitivity_bounds(Q), m, seed)


def split_seed(seed: int, k: int) -> list[int]:
    """``k`` independent 64-bit seeds derived deterministically from ``seed``."""
    ss = np.random.SeedSequence(seed & SEED_MASK)
    return [int(s) for s in ss.generate_state(k, dtype=np.uint64)]


def _remap(c: Coreset, source_idx: np.ndarray, source_n: int) -> Coreset:
    return Coreset(
        indices=source_idx[c.indices],
        weights=c.weights,
        source_n=source_n,
        m=c.m,
        total_sensitivity=c.total_sensitivity,
        seed=c.seed,
        profile_mode=c.profile_mode,
        loss=c.loss,
        radius=c.radius,
        aggregated=c.aggregated,
    )


def signed_coreset_pair(P: WeightedPointSet, R: float, m: int, seed: int, mode: str = "lemma") -> tuple[Coreset, Coreset]:
    """Separate RBF coresets for the positive and negative label mass.

    Side one samples ``{p : y(p) > 0}`` with weights ``w y``; side two samples
    ``{p : y(p) < 0}`` with weights ``w |y|``. Indices refer to ``P``. A side
    with no mass gives an empty coreset.
    """
    if P.labels is None:
        raise InvalidInputError("signed coreset pair needs labels")
    y = P.labels
    eff = P.weights * np.abs(y)
    if not np.any(eff > 0):
        raise InvalidInputError("all labels (or their weights) are zero")
    seeds = split_seed(seed, 2)
    out = []
    for mask, s in ((y > 0, seeds[0]), (y < 0, seeds[1])):
        src = np.flatnonzero(mask & (eff > 0))
        if src.size == 0:
            out.append(Coreset.empty(P.n, m, s))
            continue
        side = WeightedPointSet(P.points[src], eff[src], None, P.scale)
        c = build_coreset(side, rbf_sensitivity_bounds(side, R, mode), m, s)
        out.append(_remap(c, src, P.n))
    return out[0], out[1]
