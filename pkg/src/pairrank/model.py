"""Pairwise win-probability matrices and generative constructions.

The central object is an ``n x n`` matrix ``M`` of win probabilities:
``M[i, j]`` is the probability that item ``i`` beats item ``j`` in a
single comparison.  Every matrix satisfies ``M[i, j] + M[j, i] == 1``
and ``M[i, i] == 1/2``.

Generators cover the standard parametric families (Bradley-Terry-Luce,
Thurstone), strong-stochastic-transitivity constructions, and the
two-block "planted" worst-case instances used by the minimax
calculators in :mod:`pairrank.analysis`.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit, ndtr

SYMMETRY_TOL = 1e-9

_PARAMETRIC_CDFS = {
    "logistic": lambda x: expit(x),
    "gaussian": lambda x: ndtr(x),
}


@dataclass(frozen=True)
class ComparisonMatrix:
    """Validated matrix of pairwise win probabilities.

    ``entries[i, j]`` is the probability that item ``i`` beats item
    ``j``.  Instances are immutable; the backing array is read-only.
    """

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)


def _freeze(entries: np.ndarray) -> ComparisonMatrix:
    """Wrap an already-consistent float array without re-validation."""
    return ComparisonMatrix(np.ascontiguousarray(entries, dtype=np.float64))


def _mirror_upper(upper: np.ndarray) -> np.ndarray:
    """Build a full matrix from its strict upper triangle.

    The lower triangle is set to ``1 - upper`` entry by entry and the
    diagonal to exactly ``1/2``, so the complementarity invariant holds
    to the last bit by construction.
    """
    n = upper.shape[0]
    out = np.full((n, n), 0.5, dtype=np.float64)
    iu, ju = np.triu_indices(n, k=1)
    out[iu, ju] = upper[iu, ju]
    out[ju, iu] = 1.0 - upper[iu, ju]
    return out


def make_matrix(entries) -> ComparisonMatrix:
    """Validate a probability grid and return a comparison matrix.

    Rejects non-square grids, entries outside ``[0, 1]``, diagonals off
    ``1/2`` and complementarity violations beyond ``1e-9``; accepted
    grids are then symmetrized exactly (lower triangle recomputed as
    ``1 - upper``, diagonal set to ``1/2``).
    """
    grid = np.asarray(entries, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise ValueError(f"entries must be a square grid, got shape {grid.shape}")
    n = grid.shape[0]
    if n < 2:
        raise ValueError("need at least 2 items")
    if not np.all(np.isfinite(grid)):
        raise ValueError("entries must be finite")
    if grid.min() < 0.0 or grid.max() > 1.0:
        raise ValueError("entries must lie in [0, 1]")
    diag_err = np.abs(np.diagonal(grid) - 0.5).max()
    if diag_err > SYMMETRY_TOL:
        raise ValueError(f"diagonal must equal 1/2 (max deviation {diag_err:g})")
    sym_err = np.abs(grid + grid.T - 1.0).max()
    if sym_err > SYMMETRY_TOL:
        raise ValueError(
            f"entries (i,j) and (j,i) must sum to 1 (max deviation {sym_err:g})"
        )
    return _freeze(_mirror_upper(grid))


def gen_parametric(w, cdf: str = "logistic") -> ComparisonMatrix:
    """Parametric model: ``M[i, j] = F(w[i] - w[j])``.

    ``cdf="logistic"`` gives the Bradley-Terry-Luce model,
    ``cdf="gaussian"`` the Thurstone model (standard normal CDF).
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("w must be a vector of at least 2 qualities")
    if not np.all(np.isfinite(w)):
        raise ValueError("w must be finite")
    try:
        F = _PARAMETRIC_CDFS[cdf]
    except KeyError:
        raise ValueError(f"unknown cdf {cdf!r}, expected one of {sorted(_PARAMETRIC_CDFS)}")
    diffs = w[:, None] - w[None, :]
    return _freeze(_mirror_upper(F(diffs)))


def gen_btl_outlier(w, outlier: int) -> ComparisonMatrix:
    """BTL model with one non-transitive outlier item.

    All items except ``outlier`` follow the logistic model on ``w``.
    The outlier beats the ``floor(n/4)`` highest-quality other items
    with probability 1 and loses to every remaining item with
    probability 1.
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.size
    if not 0 <= outlier < n:
        raise ValueError(f"outlier index {outlier} out of range for n={n}")
    if not np.all(np.isfinite(w)):
        raise ValueError("w must be finite")
    upper = expit(w[:, None] - w[None, :])
    others = np.array([i for i in range(n) if i != outlier])
    # highest-quality others first; ties broken by smaller index
    by_quality = others[np.lexsort((others, -w[others]))]
    beaten = by_quality[: n // 4]
    row = np.zeros(n)
    row[beaten] = 1.0
    upper[outlier, :] = row
    upper[:, outlier] = 1.0 - row
    return _freeze(_mirror_upper(upper))


def gen_sst_diagonal(n: int, gap: float, seed: int) -> ComparisonMatrix:
    """Random SST matrix built from independent diagonal increments.

    For each offset ``d`` an independent increment ``u_d ~ U[0, gap]``
    is drawn and ``M[i, i + d] = min(1, 1/2 + sum(u_1..u_d))``: entries
    are constant along diagonals and non-decreasing with distance,
    which certifies strong stochastic transitivity for the identity
    ordering.  Requires ``(n - 1) * gap <= 1/2`` so the cumulative
    boost never needs clipping.
    """
    if n < 2:
        raise ValueError("need at least 2 items")
    if gap <= 0:
        raise ValueError("gap must be positive")
    if (n - 1) * gap > 0.5:
        raise ValueError(
            f"gap {gap:g} infeasible: (n-1)*gap must be <= 1/2 to keep entries in [1/2, 1]"
        )
    rng = np.random.default_rng(_check_seed(seed))
    boosts = np.minimum(np.cumsum(rng.uniform(0.0, gap, size=n - 1)), 0.5)
    upper = np.full((n, n), 0.5)
    iu, ju = np.triu_indices(n, k=1)
    upper[iu, ju] = np.minimum(1.0, 0.5 + boosts[ju - iu - 1])
    return _freeze(_mirror_upper(upper))


def gen_btl_mixture(w, lam: float) -> ComparisonMatrix:
    """Mixture of two opposed BTL populations.

    A fraction ``lam`` of comparisons follows the logistic model on
    ``w`` and the rest follows the reversed ordering:
    ``M[i, j] = lam * F(w_i - w_j) + (1 - lam) * F(w_j - w_i)``.
    ``lam`` must exceed 1/2 (at exactly 1/2 every entry collapses to
    the uninformative 1/2), keeping the score ordering aligned with the
    first population.
    """
    if not 0.5 < lam <= 1.0:
        raise ValueError(f"mixture weight must lie in (1/2, 1], got {lam}")
    w = np.asarray(w, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise ValueError("w must be finite")
    diffs = w[:, None] - w[None, :]
    upper = lam * expit(diffs) + (1.0 - lam) * expit(-diffs)
    return _freeze(_mirror_upper(upper))


def gen_planted(n: int, k: int, delta: float, plant_index: int | None = None) -> ComparisonMatrix:
    """Two-block planted instance with score gap exactly ``delta``.

    Entries are ``1/2 + delta`` from the planted set to its complement,
    ``1/2 - delta`` in reverse, and ``1/2`` within blocks.  The planted
    set is ``{0..k-1}`` by default; ``plant_index = a`` (``a >= k-1``)
    plants ``{0..k-2} + {a}`` instead, which yields the ensemble of
    nearly indistinguishable instances used for the multi-hypothesis
    lower-bound calculators.
    """
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    if plant_index is None:
        planted = np.arange(k)
    else:
        if not k - 1 <= plant_index < n:
            raise ValueError(f"plant_index must lie in [k-1, n), got {plant_index}")
        planted = np.concatenate([np.arange(k - 1), [plant_index]])
    mask = np.zeros(n, dtype=bool)
    mask[planted] = True
    upper = np.full((n, n), 0.5)
    upper[np.ix_(mask, ~mask)] = 0.5 + delta
    upper[np.ix_(~mask, mask)] = 0.5 - delta
    return _freeze(_mirror_upper(upper))


def gen_adjacent_swap(n: int, delta0: float, a: int) -> ComparisonMatrix:
    """Rank-linear instance whose consecutive score gaps all equal ``delta0``.

    Item ``i`` carries rank ``pi(i)``, the identity permutation with
    items ``a`` and ``a + 1`` swapped, and
    ``M[i, j] = 1/2 - (pi(i) - pi(j)) * delta0``.  Validity of the
    probabilities requires ``delta0 <= 1 / (9 (n - 1))``.
    """
    if n < 2:
        raise ValueError("need at least 2 items")
    if not 0 <= a < n - 1:
        raise ValueError(f"swap index must lie in [0, n-1), got {a}")
    if not 0.0 < delta0 <= 1.0 / (9.0 * (n - 1)):
        raise ValueError(
            f"delta0 must lie in (0, 1/(9(n-1))] = (0, {1.0 / (9.0 * (n - 1)):g}], got {delta0}"
        )
    ranks = np.arange(1, n + 1, dtype=np.float64)
    ranks[a], ranks[a + 1] = ranks[a + 1], ranks[a]
    upper = 0.5 - (ranks[:, None] - ranks[None, :]) * delta0
    return _freeze(_mirror_upper(upper))


def gen_hamming_planted(n: int, k: int, delta0: float, ordering=None) -> ComparisonMatrix:
    """Top-k block instance under a supplied ordering of the items.

    With ``rank(i)`` the position of item ``i`` in ``ordering`` (a
    permutation of ``0..n-1`` listing items from best to worst), the
    entry is ``1/2 + delta0`` whenever ``rank(i) <= k < rank(j)``, the
    complement in reverse, and ``1/2`` otherwise.  The resulting score
    profile takes exactly two values separated by ``delta0``.  The
    identity ordering reproduces the plain planted instance.
    """
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k}, n={n}")
    if not 0.0 < delta0 < 1.0 / 3.0:
        raise ValueError(f"delta0 must lie in (0, 1/3), got {delta0}")
    if ordering is None:
        ordering = np.arange(n)
    else:
        ordering = np.asarray(ordering, dtype=np.int64)
        if ordering.shape != (n,) or not np.array_equal(np.sort(ordering), np.arange(n)):
            raise ValueError("ordering must be a permutation of 0..n-1")
    mask = np.zeros(n, dtype=bool)
    mask[ordering[:k]] = True
    upper = np.full((n, n), 0.5)
    upper[np.ix_(mask, ~mask)] = 0.5 + delta0
    upper[np.ix_(~mask, mask)] = 0.5 - delta0
    return _freeze(_mirror_upper(upper))


def is_sst(matrix: ComparisonMatrix, order=None) -> bool:
    """Exhaustively check strong stochastic transitivity for an ordering.

    ``order`` lists items from best to worst (identity by default).
    True iff every better-ranked item dominates every worse-ranked item
    row-wise against all opponents.
    """
    m = matrix.entries
    n = matrix.n
    if order is None:
        order = np.arange(n)
    rows = m[np.asarray(order)]
    return bool(np.all(rows[:-1, :] >= rows[1:, :] - 1e-12))


def equispaced_quality(n: int, spread: float = 6.0) -> np.ndarray:
    """Equispaced quality vector from ``+spread/2`` down to ``-spread/2``."""
    if n < 2:
        raise ValueError("need at least 2 items")
    if spread <= 0:
        raise ValueError("spread must be positive")
    return np.linspace(spread / 2.0, -spread / 2.0, n)


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return int(seed)


MODEL_KINDS = (
    "btl",
    "thurstone",
    "btl_outlier",
    "sst_diagonal",
    "btl_mixture",
    "planted",
    "adjacent_swap",
    "hamming_planted",
    "explicit",
)


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a comparison model instance.

    Only the parameters used by ``kind`` need to be set; the rest stay
    ``None``.  ``instantiate`` resolves the spec into a matrix.
    """

    kind: str
    w: tuple[float, ...] | None = None
    quality_spread: float = 6.0
    outlier: int | None = None
    gap: float | None = None
    lam: float = 0.8
    k: int | None = None
    delta: float | None = None
    delta0: float | None = None
    swap_index: int = 0
    plant_index: int | None = None
    ordering: tuple[int, ...] | None = None
    seed: int | None = None
    entries_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")


def instantiate(spec: ModelSpec, n: int, seed: int | None = None) -> ComparisonMatrix:
    """Resolve a model spec into an ``n x n`` comparison matrix.

    ``seed`` is a fallback for kinds with internal randomness when the
    spec itself carries none.
    """
    kind = spec.kind
    if kind in ("btl", "thurstone", "btl_outlier", "btl_mixture"):
        w = np.asarray(spec.w, dtype=np.float64) if spec.w is not None else equispaced_quality(n, spec.quality_spread)
        if w.size != n:
            raise ValueError(f"quality vector has length {w.size}, expected {n}")
        if kind == "btl":
            return gen_parametric(w, "logistic")
        if kind == "thurstone":
            return gen_parametric(w, "gaussian")
        if kind == "btl_outlier":
            outlier = spec.outlier if spec.outlier is not None else n - 1
            return gen_btl_outlier(w, outlier)
        return gen_btl_mixture(w, spec.lam)
    if kind == "sst_diagonal":
        gap = spec.gap if spec.gap is not None else 0.4 / (n - 1)
        use_seed = spec.seed if spec.seed is not None else seed
        if use_seed is None:
            raise ValueError("sst_diagonal requires a seed")
        return gen_sst_diagonal(n, gap, use_seed)
    if kind == "planted":
        if spec.k is None or spec.delta is None:
            raise ValueError("planted model requires k and delta")
        return gen_planted(n, spec.k, spec.delta, spec.plant_index)
    if kind == "adjacent_swap":
        if spec.delta0 is None:
            raise ValueError("adjacent_swap model requires delta0")
        return gen_adjacent_swap(n, spec.delta0, spec.swap_index)
    if kind == "hamming_planted":
        if spec.k is None or spec.delta0 is None:
            raise ValueError("hamming_planted model requires k and delta0")
        return gen_hamming_planted(n, spec.k, spec.delta0, spec.ordering)
    # explicit
    if spec.entries_path is None:
        raise ValueError("explicit model requires entries_path")
    matrix = read_matrix_csv(spec.entries_path)
    if matrix.n != n:
        raise ValueError(f"matrix file has n={matrix.n}, expected {n}")
    return matrix


def resolved_quality(spec: ModelSpec, n: int) -> np.ndarray | None:
    """Quality vector a parametric spec resolves to, for metadata output."""
    if spec.kind not in ("btl", "thurstone", "btl_outlier", "btl_mixture"):
        return None
    if spec.w is not None:
        return np.asarray(spec.w, dtype=np.float64)
    return equispaced_quality(n, spec.quality_spread)


def write_matrix_csv(matrix: ComparisonMatrix, path) -> None:
    """Write a matrix as plain CSV: n rows of n decimal values, no header."""
    np.savetxt(path, matrix.entries, delimiter=",", fmt="%.17g")


def read_matrix_csv(path) -> ComparisonMatrix:
    """Read and validate a matrix written by :func:`write_matrix_csv`."""
    path = Path(path)
    grid = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return make_matrix(grid)
