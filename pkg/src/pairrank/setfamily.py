"""Monotone families of allowed rank-position sets.

A recovery requirement is a family of k-sized subsets of the positions
``1..n``: an estimate succeeds when the true positions of its chosen
items form an allowed set.  All families here are monotone: replacing
a position with a better (smaller) one keeps a set allowed.  Formally
the family is the union of downward closures ``closure(T) = {S :
S_j <= T_j for all j}`` over a basis of maximal generators ``T``.

Besides exact and Hamming-tolerance recovery, constructors cover four
common relaxations: membership in a top band, multiplicative or
additive rank slack relative to the excluded items, and a bound on the
sum of ranks.  ``separation_family`` generalizes the top-k score gap
to any such family.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import sorted_scores

# Basis extraction is combinatorial; families whose maximal-set search
# exceeds these limits fall back to predicate-only form.
GENERATOR_N_LIMIT = 64
_STATE_CAP = 500_000

ENUMERATION_LIMIT = 10**6

REQUIREMENT_VARIANTS = ("topband", "multiplicative", "additive", "ranksum")


class _BasisCapExceeded(Exception):
    pass


def position_set(positions, n: int, k: int | None = None) -> tuple[int, ...]:
    """Validate a strictly increasing tuple of positions in ``1..n``."""
    s = tuple(int(x) for x in positions)
    if k is not None and len(s) != k:
        raise ValueError(f"position set has size {len(s)}, expected {k}")
    if any(not 1 <= x <= n for x in s):
        raise ValueError(f"positions must lie in [1, {n}]: {s}")
    if any(a >= b for a, b in zip(s, s[1:])):
        raise ValueError(f"positions must be strictly increasing: {s}")
    return s


def _dominates(big: tuple[int, ...], small: tuple[int, ...]) -> bool:
    """True when ``small`` lies in the downward closure of ``big``."""
    return all(s <= b for s, b in zip(small, big))


def _antichain(sets) -> tuple[tuple[int, ...], ...]:
    """Drop dominated and duplicate sets; sort for determinism."""
    unique = sorted(set(sets))
    keep = []
    for s in unique:
        if not any(other != s and _dominates(other, s) for other in unique):
            keep.append(s)
    return tuple(keep)


@dataclass(frozen=True)
class SetFamily:
    """A monotone family of allowed k-position sets.

    ``generators`` is the maximal-antichain basis when available;
    families too large for basis extraction keep only a membership
    predicate.
    """

    n: int
    k: int
    kind: str
    generators: tuple[tuple[int, ...], ...] | None
    predicate: Callable[[tuple[int, ...]], bool] | None = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.generators is None and self.predicate is None:
            raise ValueError("a family needs generators or a predicate")
        if self.generators is not None and len(self.generators) == 0:
            raise ValueError("generator list must be non-empty")


def membership(family: SetFamily, s) -> bool:
    """True iff the position set belongs to the family.

    With a basis available this is domination by some generator;
    otherwise the family's predicate decides.
    """
    s = position_set(s, family.n, family.k)
    if family.generators is not None:
        return any(_dominates(t, s) for t in family.generators)
    return bool(family.predicate(s))


def family_exact(n: int, k: int) -> SetFamily:
    """Only the set of the top ``k`` positions is allowed."""
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    top = tuple(range(1, k + 1))
    return SetFamily(n=n, k=k, kind="exact", generators=(top,), predicate=lambda s: s <= top)


def family_hamming(n: int, k: int, h: int) -> SetFamily:
    """Sets with at least ``k - h`` positions inside the top ``k``.

    Success under this family is exactly a Hamming error of at most
    ``2h`` against the top-k set.  The basis is the single maximal set
    ``(h+1, .., k, n-h+1, .., n)``.
    """
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    if not 0 <= h < k:
        raise ValueError(f"h must satisfy 0 <= h < k, got h={h}")
    if k + h > n:
        raise ValueError(f"generator needs k + h <= n, got k={k}, h={h}, n={n}")
    gen = tuple(range(h + 1, k + 1)) + tuple(range(n - h + 1, n + 1))

    def pred(s: tuple[int, ...]) -> bool:
        return sum(1 for x in s if x <= k) >= k - h

    return SetFamily(n=n, k=k, kind=f"hamming(h={h})", generators=(gen,), predicate=pred)


def _round_bound(x: float, round_mode: str) -> int:
    # nudge before rounding so products like 1.45 * 20 = 28.999999...
    # land on the intended integer
    if round_mode == "floor":
        return math.floor(x + 1e-9)
    if round_mode == "ceil":
        return math.ceil(x - 1e-9)
    raise ValueError(f"round_mode must be 'floor' or 'ceil', got {round_mode!r}")


def _prefix_len(s: tuple[int, ...]) -> int:
    t = 0
    for j, x in enumerate(s, start=1):
        if x != j:
            break
        t = j
    return t


def _requirement_predicate(
    n: int, k: int, epsilon: float, variant: str, round_mode: str
) -> Callable[[tuple[int, ...]], bool]:
    if variant == "topband":
        bound = _round_bound((1.0 + epsilon) * k, round_mode)

        def pred(s: tuple[int, ...]) -> bool:
            return s[-1] <= bound

    elif variant == "multiplicative":

        def pred(s: tuple[int, ...]) -> bool:
            return s[-1] <= _round_bound((1.0 + epsilon) * (_prefix_len(s) + 1), round_mode)

    elif variant == "additive":

        def pred(s: tuple[int, ...]) -> bool:
            return s[-1] <= _round_bound(_prefix_len(s) + 1 + epsilon, round_mode)

    else:  # ranksum
        budget = _round_bound((1.0 + epsilon) * k * (k + 1) / 2.0, round_mode)

        def pred(s: tuple[int, ...]) -> bool:
            return sum(s) <= budget

    return pred


def _maximal_allowed_sets(
    n: int, k: int, allowed: Callable[[tuple[int, ...]], bool]
) -> tuple[tuple[int, ...], ...]:
    """All domination-maximal allowed sets of a monotone predicate.

    Builds sets from the largest coordinate down; a partial suffix is
    explored only when its minimal completion ``(1, .., j-1, v,
    suffix)`` is allowed, which by monotonicity certifies that some
    completion exists.  Raises :class:`_BasisCapExceeded` past the
    search budget.
    """
    results: list[tuple[int, ...]] = []
    states = 0

    def rec(suffix: tuple[int, ...]) -> None:
        nonlocal states
        j = k - len(suffix)
        hi = (suffix[0] - 1) if suffix else n
        for v in range(hi, j - 1, -1):
            states += 1
            if states > _STATE_CAP:
                raise _BasisCapExceeded
            cand = tuple(range(1, j)) + (v,) + suffix
            if allowed(cand):
                if j == 1:
                    results.append((v,) + suffix)
                else:
                    rec((v,) + suffix)

    rec(())
    return _antichain(results)


def family_requirement(
    n: int,
    k: int,
    epsilon: float,
    variant: str,
    round_mode: str = "floor",
) -> SetFamily:
    """One of four standard relaxations of exact top-k recovery.

    * ``topband``: every chosen item ranks within the top
      ``(1 + eps) k`` positions.
    * ``multiplicative``: the worst chosen rank is at most ``(1 + eps)``
      times the best excluded rank.
    * ``additive``: the worst chosen rank exceeds the best excluded
      rank by at most ``eps``.
    * ``ranksum``: the chosen ranks sum to at most ``(1 + eps)`` times
      the smallest possible sum ``k (k + 1) / 2``.

    All four reduce to exact recovery at ``eps = 0``.  Fractional rank
    bounds are floored by default (``round_mode="ceil"`` to widen).
    The generator basis is extracted for ``n <= 64`` when the maximal-
    set search stays within budget; otherwise the family is
    predicate-only.
    """
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if variant not in REQUIREMENT_VARIANTS:
        raise ValueError(f"variant must be one of {REQUIREMENT_VARIANTS}, got {variant!r}")
    pred = _requirement_predicate(n, k, epsilon, variant, round_mode)
    kind = f"{variant}(eps={epsilon:g})"
    if variant == "topband":
        band = min(n, max(k, _round_bound((1.0 + epsilon) * k, round_mode)))
        gen = tuple(range(band - k + 1, band + 1))
        return SetFamily(n=n, k=k, kind=kind, generators=(gen,), predicate=pred)
    generators = None
    if n <= GENERATOR_N_LIMIT:
        try:
            generators = _maximal_allowed_sets(n, k, pred)
        except _BasisCapExceeded:
            generators = None
    return SetFamily(n=n, k=k, kind=kind, generators=generators, predicate=pred)


def family_explicit(n: int, k: int, generators) -> SetFamily:
    """Family given by an explicit generator list (closed downward).

    Dominated generators are redundant and dropped; the stored basis is
    the maximal antichain.
    """
    gens = [position_set(g, n, k) for g in generators]
    if not gens:
        raise ValueError("generator list must be non-empty")
    return SetFamily(n=n, k=k, kind="explicit", generators=_antichain(gens))


def enumerate_allowed(family: SetFamily) -> list[tuple[int, ...]]:
    """All allowed sets in lexicographic order (small instances only)."""
    if math.comb(family.n, family.k) > ENUMERATION_LIMIT:
        raise ValueError(
            f"instance too large to enumerate: C({family.n}, {family.k}) > {ENUMERATION_LIMIT}"
        )
    return [s for s in combinations(range(1, family.n + 1), family.k) if membership(family, s)]


def is_monotone(members, n: int, k: int) -> bool:
    """Check that an explicit member list is closed under improvement.

    True iff for every member, decreasing any single position by one
    (keeping the set valid) lands on another member; by induction this
    is equivalent to closure under all monotone transformations.
    """
    member_set = {position_set(s, n, k) for s in members}
    if len(member_set) > 5_000_000:
        raise ValueError("instance too large")
    for s in member_set:
        for j in range(k):
            lower = s[j] - 1
            if lower < 1 or (j > 0 and s[j - 1] >= lower):
                continue
            if s[:j] + (lower,) + s[j + 1 :] not in member_set:
                return False
    return True


def _generator_separation(tau_sorted: np.ndarray, family: SetFamily) -> float:
    n, k = family.n, family.k
    best = -math.inf
    for gen in family.generators:
        worst = math.inf
        for j, t in enumerate(gen, start=1):
            idx = k + t - j + 1
            if idx > n:
                continue  # score of an out-of-range position is -inf
            worst = min(worst, float(tau_sorted[j - 1] - tau_sorted[idx - 1]))
        best = max(best, worst)
    return best


def _predicate_separation(tau_sorted: np.ndarray, family: SetFamily) -> float:
    n, k = family.n, family.k
    # gap[j-1][t-1] attained by putting the j-th chosen item at position t
    gaps = np.full((k, n), np.inf)
    for j in range(1, k + 1):
        ts = np.arange(1, n + 1)
        idx = k + ts - j + 1
        valid = idx <= n
        gaps[j - 1, valid] = tau_sorted[j - 1] - tau_sorted[idx[valid] - 1]

    def feasible(v: float) -> bool:
        prev = 0
        lifted = []
        for j in range(1, k + 1):
            t = int(np.searchsorted(gaps[j - 1], v, side="left")) + 1
            t = max(t, prev + 1)
            prev = t
            lifted.append(t)
        if lifted[-1] > n:
            return False
        return bool(family.predicate(tuple(lifted)))

    if feasible(math.inf):
        return math.inf
    candidates = np.unique(gaps[np.isfinite(gaps)])
    lo, hi = 0, candidates.size - 1  # invariant: feasible(candidates[lo])
    if not feasible(float(candidates[0])):
        return 0.0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(float(candidates[mid])):
            lo = mid
        else:
            hi = mid - 1
    return float(candidates[lo])


def separation_family(tau, family: SetFamily) -> float:
    """Generalized separation threshold of a score vector for a family.

    The value is ``max`` over basis generators ``T`` of ``min`` over
    coordinates ``j`` of ``tau_(j) - tau_(k + T_j - j + 1)``, where
    order statistics beyond position ``n`` count as ``-inf`` (their
    terms drop out of the minimum).  For the exact family this is the
    top-k separation; for the Hamming family it is the widened-window
    separation.  Predicate-only families are handled by an equivalent
    search over per-position thresholds.
    """
    tau = np.asarray(tau, dtype=np.float64)
    if tau.shape != (family.n,):
        raise ValueError(f"score vector has length {tau.size}, expected {family.n}")
    tau_sorted = sorted_scores(tau)
    if family.generators is not None:
        return _generator_separation(tau_sorted, family)
    return _predicate_separation(tau_sorted, family)


def parse_family_spec(text: str, n: int, k: int) -> SetFamily:
    """Build a family from its compact CLI spec string.

    Grammar: ``exact``, ``hamming:h=1``, ``topband:eps=0.5``,
    ``mult:eps=0.5``, ``add:eps=2``, ``ranksum:eps=0.5``,
    ``explicit:@generators.csv`` (one sorted position set per row).
    """
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.strip()
    arg = arg.strip()
    if name == "exact":
        if arg:
            raise ValueError(f"'exact' takes no parameters, got {text!r}")
        return family_exact(n, k)
    if name == "hamming":
        return family_hamming(n, k, _spec_param(arg, "h", int, text))
    if name in ("topband", "mult", "add", "ranksum"):
        variant = {"mult": "multiplicative", "add": "additive"}.get(name, name)
        return family_requirement(n, k, _spec_param(arg, "eps", float, text), variant)
    if name == "explicit":
        if not arg.startswith("@"):
            raise ValueError(f"explicit spec must reference a file: 'explicit:@file.csv', got {text!r}")
        return family_explicit(n, k, read_position_sets_csv(arg[1:]))
    raise ValueError(f"unknown family spec {text!r}")


def _spec_param(arg: str, key: str, cast, full: str):
    param, _, value = arg.partition("=")
    if param.strip() != key or not value.strip():
        raise ValueError(f"expected '{key}=<value>' in family spec {full!r}")
    return cast(value.strip())


def read_position_sets_csv(path) -> list[tuple[int, ...]]:
    """Read one position set per CSV row (sorted integers)."""
    path = Path(path)
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                out.append(tuple(int(x) for x in row))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected integers, got {row}")
    if not out:
        raise ValueError(f"{path}: no position sets found")
    return out
