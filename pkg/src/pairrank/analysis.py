"""Scores, separation thresholds, and information-theoretic calculators.

The score of an item is the probability that it beats an opponent
chosen uniformly at random; all separation thresholds are gaps between
order statistics of the score vector.  The sample-complexity inversion
and the Kullback-Leibler / Fano calculators quantify, respectively, how
many comparison rounds suffice for recovery and when no estimator can
succeed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ComparisonMatrix


def scores(matrix: ComparisonMatrix) -> np.ndarray:
    """Per-item win probability against a uniformly random opponent.

    Row averages including the diagonal 1/2 term; the vector sums to
    ``n / 2``.
    """
    return matrix.entries.mean(axis=1)


def rank_order(tau) -> np.ndarray:
    """Items sorted by descending score, ties broken by smaller index."""
    tau = np.asarray(tau, dtype=np.float64)
    return np.lexsort((np.arange(tau.size), -tau))


def sorted_scores(tau) -> np.ndarray:
    """Order statistics of the score vector, descending."""
    tau = np.asarray(tau, dtype=np.float64)
    return tau[rank_order(tau)]


def separation_topk(matrix: ComparisonMatrix, k: int) -> float:
    """Score gap between the k-th and (k+1)-th ranked items."""
    n = matrix.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    ordered = sorted_scores(scores(matrix))
    return float(ordered[k - 1] - ordered[k])


def separation_hamming(matrix: ComparisonMatrix, k: int, h: int) -> float:
    """Score gap between the (k-h)-th and (k+h+1)-th ranked items.

    The tolerance ``h`` widens the boundary window; ``h = 0`` recovers
    :func:`separation_topk`.
    """
    n = matrix.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    if not 0 <= h < k:
        raise ValueError(f"h must satisfy 0 <= h < k, got h={h}")
    if k + h + 1 > n:
        raise ValueError(f"need k + h + 1 <= n, got k={k}, h={h}, n={n}")
    ordered = sorted_scores(scores(matrix))
    return float(ordered[k - h - 1] - ordered[k + h])


def _meets_threshold(n: int, p: float, r: int, delta: float, alpha: float) -> bool:
    return delta >= alpha * math.sqrt(math.log(n) / (n * p * r))


def required_repetitions(n: int, p: float, delta: float, alpha: float) -> int:
    """Smallest repetition count at which ``delta`` clears the threshold.

    Returns the minimal integer ``r >= 1`` with
    ``delta >= alpha * sqrt(log(n) / (n * p * r))``, i.e. essentially
    ``ceil(alpha^2 log(n) / (n p delta^2))``, adjusted so the returned
    value (and not ``r - 1``) satisfies the inequality in floating
    point.
    """
    if n < 2:
        raise ValueError("need at least 2 items")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if delta <= 0:
        raise ValueError("separation is zero: no repetition count can satisfy the threshold")
    r = max(1, math.ceil(alpha**2 * math.log(n) / (n * p * delta**2) - 1e-12))
    while not _meets_threshold(n, p, r, delta, alpha):
        r += 1
    while r > 1 and _meets_threshold(n, p, r - 1, delta, alpha):
        r -= 1
    return r


def implied_alpha(n: int, p: float, r: int, delta: float) -> float:
    """The threshold constant a separation value attains at ``(n, p, r)``."""
    if n < 2:
        raise ValueError("need at least 2 items")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if r < 1:
        raise ValueError("r must be at least 1")
    return float(delta * math.sqrt(n * p * r / math.log(n)))


def _kl_bernoulli_terms(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise KL(Bern(a) || Bern(b)), with 0 log 0 = 0 and +inf
    where ``b`` puts zero mass on an outcome ``a`` charges."""
    out = np.zeros_like(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        term1 = np.where(a > 0.0, a * (np.log(a) - np.log(b)), 0.0)
        term0 = np.where(a < 1.0, (1.0 - a) * (np.log1p(-a) - np.log1p(-b)), 0.0)
    out = term1 + term0
    out[(a > 0.0) & (b == 0.0)] = np.inf
    out[(a < 1.0) & (b == 1.0)] = np.inf
    return out


def kl_divergence(ma: ComparisonMatrix, mb: ComparisonMatrix, p: float, r: int) -> float:
    """Exact KL divergence between the full observation distributions.

    Observations under a matrix are, independently per unordered pair
    and per round, a three-outcome draw (no comparison with probability
    ``1 - p``; item i wins with ``p * M[i, j]``; item j wins with the
    complement).  The no-comparison term cancels, leaving
    ``r * p * sum_{i<j} KL(Bern(Ma[i,j]) || Bern(Mb[i,j]))``.  Returns
    ``inf`` when the second matrix puts zero mass on an outcome the
    first one charges.
    """
    if ma.n != mb.n:
        raise ValueError(f"matrix sizes differ: {ma.n} vs {mb.n}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if r < 1:
        raise ValueError("r must be at least 1")
    iu, ju = np.triu_indices(ma.n, k=1)
    terms = _kl_bernoulli_terms(ma.entries[iu, ju], mb.entries[iu, ju])
    total = terms.sum()
    if not np.isfinite(total):
        return math.inf
    return float(r * p * total)


def fano_lower_bound(num_hypotheses: float, max_kl: float) -> float:
    """Weakened Fano bound on the error of any multi-hypothesis test.

    For ``L`` equiprobable hypotheses whose pairwise KL divergences are
    at most ``max_kl``, every test errs with probability at least
    ``1 - (max_kl + log 2) / log L`` (clamped at zero).
    """
    if num_hypotheses < 2:
        raise ValueError(f"need at least 2 hypotheses, got {num_hypotheses}")
    if max_kl < 0:
        raise ValueError("max_kl must be nonnegative")
    return max(0.0, 1.0 - (max_kl + math.log(2.0)) / math.log(num_hypotheses))


def planted_kl_bound(n: int, p: float, r: int, delta: float) -> float:
    """Closed-form KL bound for a pair of planted instances: ``2npr / (1/(4 d^2) - 1)``."""
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    return 2.0 * n * p * r / (1.0 / (4.0 * delta**2) - 1.0)


def adjacent_swap_kl_bound(n: int, p: float, r: int, delta0: float) -> float:
    """Closed-form KL bound for a pair of adjacent-swap instances: ``50 n p r d0^2``."""
    return 50.0 * n * p * r * delta0**2


@dataclass(frozen=True)
class SeparationReport:
    """Separation value of an instance plus its sample-complexity reading."""

    n: int
    k: int
    h: int
    delta: float
    alpha_implied: float | None
    r_required: int | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "h": self.h,
            "delta": self.delta,
            "alpha_implied": self.alpha_implied,
            "r_required": self.r_required,
        }


def separation_report(
    matrix: ComparisonMatrix,
    k: int,
    h: int = 0,
    p: float | None = None,
    r: int | None = None,
    alpha: float | None = None,
) -> SeparationReport:
    """Bundle the separation of a matrix with its threshold arithmetic.

    ``alpha_implied`` needs ``(p, r)``; ``r_required`` needs a target
    ``alpha`` and ``p``.  Either is omitted (``None``) when its inputs
    are missing or the separation is zero.
    """
    delta = separation_hamming(matrix, k, h)
    alpha_implied = None
    if p is not None and r is not None:
        alpha_implied = implied_alpha(matrix.n, p, r, delta)
    r_required = None
    if alpha is not None and p is not None and delta > 0:
        r_required = required_repetitions(matrix.n, p, delta, alpha)
    return SeparationReport(matrix.n, k, h, delta, alpha_implied, r_required)
