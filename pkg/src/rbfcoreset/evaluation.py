"""Coreset quality measurements.

The basic quantity is the per-query relative error
``|1 - sum_S v f(., x) / sum_P w f(., x)|``; :func:`evaluate` batches it over
a query ensemble. :func:`theorem4_error` and :func:`beta_bounds` measure the
two halves of the expanded RBFNN training objective.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateError, InvalidInputError, PreconditionError
from .geometry import WeightedPointSet
from .sampling import Coreset
from .sensitivity import log_loss

OUTSIDE_TOL = 1e-12


def _loss_matrix(points, queries, loss) -> np.ndarray:
    return np.exp(log_loss(points, queries, loss))


def _queries_2d(queries, d) -> np.ndarray:
    X = np.asarray(queries, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != d:
        raise InvalidInputError(f"queries must have {d} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("queries contain non-finite entries")
    return X


def loss_sum(P: WeightedPointSet, x, loss: str) -> float:
    """``sum_p w(p) f(p, x)``."""
    X = _queries_2d(x, P.d)
    return float(P.weights @ _loss_matrix(P.points, X, loss)[:, 0])


def _coreset_sums(P: WeightedPointSet, coreset: Coreset, X: np.ndarray, loss: str) -> np.ndarray:
    if coreset.source_n != P.n:
        raise InvalidInputError(f"coreset was drawn from {coreset.source_n} points, P has {P.n}")
    if coreset.size == 0:
        return np.zeros(X.shape[0])
    if coreset.indices.min() < 0 or coreset.indices.max() >= P.n:
        raise InvalidInputError("coreset index out of range")
    return coreset.weights @ _loss_matrix(P.points[coreset.indices], X, loss)


def _relative_errors(P, coreset, X, loss) -> np.ndarray:
    full = P.weights @ _loss_matrix(P.points, X, loss)
    if np.any(full <= 0):
        raise DegenerateError("full weighted loss sum is zero at some query")
    return np.abs(1.0 - _coreset_sums(P, coreset, X, loss) / full)


def relative_error(P: WeightedPointSet, coreset: Coreset, x, loss: str) -> float:
    return float(_relative_errors(P, coreset, _queries_2d(x, P.d), loss)[0])


@dataclass
class EvalReport:
    per_query_errors: np.ndarray
    sup_error: float
    mean_error: float
    query_count: int
    loss: str
    comparison: Optional["EvalReport"] = None
    label: str = "coreset"

    @classmethod
    def from_errors(cls, errors, loss, label="coreset") -> "EvalReport":
        errors = np.asarray(errors, dtype=np.float64)
        return cls(errors, float(errors.max()), float(errors.mean()), int(errors.size), loss, label=label)

    def summary(self) -> dict:
        out = {
            "label": self.label,
            "loss": self.loss,
            "query_count": self.query_count,
            "sup_error": self.sup_error,
            "mean_error": self.mean_error,
        }
        if self.comparison is not None:
            out["comparison"] = self.comparison.summary()
        return out


def evaluate(
    P: WeightedPointSet,
    coreset: Coreset,
    queries,
    loss: str,
    radius: Optional[float] = None,
    allow_outside: bool = False,
    baseline: Optional[Coreset] = None,
) -> EvalReport:
    """Relative error of ``coreset`` at every query, aggregated.

    For the RBF loss the guarantee only covers ``|x| <= R``; queries outside
    that ball are refused unless ``allow_outside`` is set. ``R`` defaults to
    the radius recorded on the coreset.
    """
    X = np.asarray(queries, dtype=np.float64)
    if X.size == 0:
        raise InvalidInputError("empty query list")
    X = _queries_2d(X, P.d)
    if loss == "rbf" and not allow_outside:
        R = radius if radius is not None else coreset.radius
        if R is not None:
            norms = np.linalg.norm(X, axis=1)
            bad = np.flatnonzero(norms > R * (1 + OUTSIDE_TOL))
            if bad.size:
                raise PreconditionError(
                    f"query {int(bad[0])} has norm {norms[bad[0]]:.6g} > R = {R}; pass allow_outside to override"
                )
    report = EvalReport.from_errors(_relative_errors(P, coreset, X, loss), loss)
    if baseline is not None:
        report.comparison = EvalReport.from_errors(_relative_errors(P, baseline, X, loss), loss, label="uniform")
    return report


def sample_queries(d: int, count: int, radius: float, seed: int, include_data_points: Optional[WeightedPointSet] = None) -> np.ndarray:
    """Uniform draws from the l2 ball of the given radius, optionally followed by the data points."""
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    X = g * (radius * rng.random(count) ** (1.0 / d))[:, None]
    if include_data_points is not None:
        X = np.vstack([X, include_data_points.points])
    return X


def _rbf_matrix(points, centers) -> np.ndarray:
    return _loss_matrix(points, centers, "rbf")


def theorem4_error(
    P: WeightedPointSet,
    pair: tuple[Coreset, Coreset],
    centers,
    alphas,
    literal: bool = False,
) -> float:
    """Normalised error of the coreset estimate of ``sum_p w(p) y(p) phi(p)``.

    ``phi(x) = sum_i alpha_i exp(-|x - c_i|^2)``, so the target equals
    ``sum_i alpha_i (phi+(c_i) - phi-(c_i))`` with ``phi+`` / ``phi-`` the
    positive / negative label mass. The estimate replaces ``phi+(c_i)`` by the
    first coreset's weighted RBF sum and ``phi-(c_i)`` by the second's. The
    denominator is ``sum_i |alpha_i| (phi+(c_i) + phi-(c_i))`` on the full data.

    ``literal=True`` instead subtracts ``sum_{alpha_i>0} alpha_i gamma_1(c_i)
    + sum_{alpha_j<0} alpha_j gamma_2(c_j)`` term for term; that form is not
    zero for an exact pair and is kept only for comparison.
    """
    if P.labels is None:
        raise InvalidInputError("theorem4_error needs labels")
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    a = np.asarray(alphas, dtype=np.float64).ravel()
    if C.shape[0] != a.shape[0] or C.shape[0] < 1:
        raise InvalidInputError("need L >= 1 centers with one alpha each")
    y = P.labels
    K = _rbf_matrix(P.points, C)  # n x L
    wy = P.weights * y
    phi_plus = np.where(y > 0, wy, 0.0) @ K
    phi_minus = np.where(y < 0, -wy, 0.0) @ K
    denom = float(np.abs(a) @ (phi_plus + phi_minus))
    if not denom > 0:
        raise DegenerateError("theorem4_error denominator vanished")
    target = float(a @ (phi_plus - phi_minus))
    s1, s2 = pair
    g1 = _coreset_sums(P, s1, C, "rbf")
    g2 = _coreset_sums(P, s2, C, "rbf")
    if literal:
        est = float(np.where(a > 0, a * g1, 0.0).sum() + np.where(a < 0, a * g2, 0.0).sum())
    else:
        est = float(a @ (g1 - g2))
    return abs(target - est) / denom


class BetaBounds(NamedTuple):
    exact_beta: float
    upper_bound: float
    lower_bound_if_nonneg: Optional[float]


def beta_bounds(P: WeightedPointSet, centers, alphas, coreset_for_scaled: Optional[Coreset] = None) -> BetaBounds:
    """Cauchy-Schwarz sandwich on ``beta = sum_p w(p) phi(p)^2``.

    ``upper = L sum_i alpha_i^2 S_i`` and, when every ``alpha_i >= 0``,
    ``lower = sum_i alpha_i^2 S_i``, with ``S_i = sum_p w(p) exp(-2|p - c_i|^2)``.
    Since ``exp(-2|p - c|^2) = exp(-|sqrt2 p - sqrt2 c|^2)``, ``S_i`` can be
    estimated from a coreset built on the points scaled by ``sqrt(2)``; pass
    it as ``coreset_for_scaled`` (its indices refer to ``P``).
    """
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    a = np.asarray(alphas, dtype=np.float64).ravel()
    if C.shape[0] != a.shape[0] or C.shape[0] < 1:
        raise InvalidInputError("need L >= 1 centers with one alpha each")
    L = a.shape[0]
    K = _rbf_matrix(P.points, C)
    exact = float(P.weights @ (K @ a) ** 2)
    if coreset_for_scaled is None:
        S = P.weights @ K**2
    else:
        r2 = np.sqrt(2.0)
        S = _coreset_sums(WeightedPointSet(P.points * r2, P.weights), coreset_for_scaled, C * r2, "rbf")
    base = float((a * a) @ S)
    lower = base if np.all(a >= 0) else None
    return BetaBounds(exact, L * base, lower)
