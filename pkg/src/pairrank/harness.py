"""Reproducible benchmark harness.

An experiment fixes a comparison model, a recovery requirement, and a
sampling design, then repeats: draw observations, run each estimator,
and score it under the exact, Hamming, and allowed-set criteria.  The
repetition count ``r`` is either given explicitly or derived from a
target threshold constant ``alpha`` by inverting the separation of the
instantiated matrix.

Every random quantity derives from the master seed through stable
per-stage tags, so results are bit-identical across runs and thread
counts.  Wall-clock timings are measured around the estimator calls
only and reported through the summary; the results table is fully
deterministic.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, metrics, model, rank, sample, setfamily

ESTIMATORS = ("copeland", "spectral_baseline")

RESULT_COLUMNS = (
    "model",
    "n",
    "k",
    "h",
    "p",
    "r",
    "alpha",
    "trial",
    "estimator",
    "exact_success",
    "hamming_error",
    "allowed_success",
    "tie_broken",
    "elapsed_ns",
    "derived_seed",
)

_OBS_STAGE = 1
_MODEL_STAGE = 2
_SUITE_STAGE = 3
_REAL_STAGE = 4


def derive_seed(master_seed: int, *tags: int) -> int:
    """Stable 64-bit seed derived from the master seed and stage tags."""
    entropy = (model._check_seed(master_seed),) + tuple(int(t) for t in tags)
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one benchmark experiment.

    Exactly one of ``alpha`` (threshold constant, from which ``r`` is
    derived) and ``r`` (explicit repetition count) must be given.
    ``family`` is a requirement spec string; empty means exact recovery
    when ``h = 0`` and Hamming tolerance ``h`` otherwise.
    """

    model: model.ModelSpec
    n: int
    k: int
    trials: int
    master_seed: int
    h: int = 0
    p: float = 1.0
    alpha: float | None = None
    r: int | None = None
    estimators: tuple[str, ...] = ESTIMATORS
    family: str = ""
    label: str | None = None
    per_trial_model: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if (self.alpha is None) == (self.r is None):
            raise ValueError("exactly one of alpha and r must be given")
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        for name in self.estimators:
            if name not in ESTIMATORS:
                raise ValueError(f"unknown estimator {name!r}, expected subset of {ESTIMATORS}")
        if not 0 <= self.h:
            raise ValueError("h must be nonnegative")

    @property
    def display_label(self) -> str:
        return self.label if self.label is not None else self.model.kind

    def family_spec(self) -> str:
        if self.family:
            return self.family
        return f"hamming:h={self.h}" if self.h > 0 else "exact"


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one estimator on one trial."""

    trial: int
    estimator: str
    exact_success: bool
    hamming_error: int
    allowed_success: bool
    tie_broken: bool
    elapsed_ns: int
    derived_seed: int
    error: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    """Per-trial records plus the aggregate summary of an experiment."""

    config: ExperimentConfig
    r: int
    alpha: float
    delta: float
    records: tuple[TrialRecord, ...]
    summary: dict


def _estimate(name: str, obs: sample.ObservationSet, k: int):
    if name == "copeland":
        est = rank.copeland_topk(obs, k)
    else:
        est = rank.topk_from_scores(rank.spectral_baseline(obs), k)
    return est


def _run_trial(
    trial: int,
    matrix: model.ComparisonMatrix,
    truth: metrics.GroundTruth,
    family: setfamily.SetFamily,
    cfg: ExperimentConfig,
    r: int,
    seed: int,
) -> list[TrialRecord]:
    obs = sample.draw_observations(matrix, cfg.p, r, seed)
    records = []
    for name in cfg.estimators:
        start = time.perf_counter_ns()
        try:
            est = _estimate(name, obs, cfg.k)
            error = None
        except (rank.DisconnectedGraphError, rank.ConvergenceError) as exc:
            est = None
            error = f"{type(exc).__name__}: {exc}"
        elapsed = time.perf_counter_ns() - start
        if est is None:
            # worst-case outcomes keep failed trials visible in the table
            records.append(
                TrialRecord(trial, name, False, 2 * cfg.k, False, False, elapsed, seed, error)
            )
            continue
        ok_exact = metrics.exact_success(est, truth)
        _, distance = metrics.hamming_success(est, truth, cfg.h)
        ok_allowed = metrics.allowed_success(est, truth, family)
        records.append(
            TrialRecord(
                trial=trial,
                estimator=name,
                exact_success=ok_exact,
                hamming_error=distance,
                allowed_success=ok_allowed,
                tie_broken=est.tie_broken,
                elapsed_ns=elapsed,
                derived_seed=seed,
            )
        )
    return records


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run all trials of an experiment and aggregate the outcomes.

    The comparison matrix is instantiated once (per-trial when
    ``cfg.per_trial_model``); ``r`` is derived from the instantiated
    separation when ``alpha`` is given.  Trials may run on ``threads``
    workers; records are emitted in trial order and are independent of
    the thread count.
    """
    if threads < 1:
        raise ValueError("threads must be at least 1")
    base_seed = derive_seed(cfg.master_seed, _MODEL_STAGE, 0)
    base_matrix = model.instantiate(cfg.model, cfg.n, base_seed)
    delta = analysis.separation_hamming(base_matrix, cfg.k, cfg.h)
    if cfg.r is not None:
        r = cfg.r
        alpha = analysis.implied_alpha(cfg.n, cfg.p, r, delta)
    else:
        if delta <= 0:
            raise ValueError(
                "alpha target is infeasible: the instantiated matrix has zero separation"
            )
        r = analysis.required_repetitions(cfg.n, cfg.p, delta, cfg.alpha)
        alpha = cfg.alpha
    family = setfamily.parse_family_spec(cfg.family_spec(), cfg.n, cfg.k)
    base_truth = metrics.ground_truth(base_matrix, cfg.k)

    def trial_inputs(trial: int):
        if cfg.per_trial_model:
            m = model.instantiate(cfg.model, cfg.n, derive_seed(cfg.master_seed, _MODEL_STAGE, trial))
            t = metrics.ground_truth(m, cfg.k)
        else:
            m, t = base_matrix, base_truth
        return m, t, derive_seed(cfg.master_seed, _OBS_STAGE, trial)

    def run_one(trial: int) -> list[TrialRecord]:
        m, t, seed = trial_inputs(trial)
        return _run_trial(trial, m, t, family, cfg, r, seed)

    if threads == 1:
        batches = [run_one(t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(run_one, range(cfg.trials)))
    records = tuple(rec for batch in batches for rec in batch)
    summary = _summarize(cfg, r, alpha, delta, records)
    return ExperimentResult(cfg, r, alpha, delta, records, summary)


def _summarize(cfg, r, alpha, delta, records) -> dict:
    per_estimator = {}
    for name in cfg.estimators:
        recs = [rec for rec in records if rec.estimator == name]
        times = [rec.elapsed_ns for rec in recs]
        per_estimator[name] = {
            "trials": len(recs),
            "exact_failure_rate": sum(not rec.exact_success for rec in recs) / len(recs),
            "hamming_failure_rate": sum(rec.hamming_error > 2 * cfg.h for rec in recs) / len(recs),
            "allowed_failure_rate": sum(not rec.allowed_success for rec in recs) / len(recs),
            "mean_hamming_error": sum(rec.hamming_error for rec in recs) / len(recs),
            "tie_broken_trials": sum(rec.tie_broken for rec in recs),
            "errors": sum(rec.error is not None for rec in recs),
            "elapsed_ns": {"min": min(times), "max": max(times), "mean": sum(times) / len(times)},
        }
    quality = model.resolved_quality(cfg.model, cfg.n)
    return {
        "label": cfg.display_label,
        "model_kind": cfg.model.kind,
        "n": cfg.n,
        "k": cfg.k,
        "h": cfg.h,
        "p": cfg.p,
        "r": r,
        "alpha": alpha,
        "delta": delta,
        "trials": cfg.trials,
        "family": cfg.family_spec(),
        "master_seed": cfg.master_seed,
        "quality": None if quality is None else [float(x) for x in quality],
        "estimators": per_estimator,
    }


def figure_suite(
    n: int,
    k: int | None = None,
    p: float = 1.0,
    trials: int = 50,
    alpha: float = 4.0,
    master_seed: int = 20240901,
    quality_spread: float = 6.0,
    estimators: tuple[str, ...] = ESTIMATORS,
) -> list[ExperimentConfig]:
    """The six-model benchmark suite at a common (n, k, p, trials).

    Models: BTL, Thurstone, BTL with a non-transitive outlier, the
    independent-diagonals SST construction, a BTL mixture, and BTL run
    at one tenth of the target threshold constant (so the separation
    condition is deliberately violated).  ``k`` defaults to ``n // 4``.
    """
    if k is None:
        k = n // 4
    specs = [
        ("btl", model.ModelSpec(kind="btl", quality_spread=quality_spread), alpha),
        ("thurstone", model.ModelSpec(kind="thurstone", quality_spread=quality_spread), alpha),
        (
            "btl_outlier",
            model.ModelSpec(kind="btl_outlier", quality_spread=quality_spread, outlier=n - 1),
            alpha,
        ),
        ("sst_diagonal", model.ModelSpec(kind="sst_diagonal"), alpha),
        (
            "btl_mixture",
            model.ModelSpec(kind="btl_mixture", quality_spread=quality_spread, lam=0.8),
            alpha,
        ),
        ("btl_lowsep", model.ModelSpec(kind="btl", quality_spread=quality_spread), alpha / 10.0),
    ]
    configs = []
    for idx, (label, spec, a) in enumerate(specs):
        configs.append(
            ExperimentConfig(
                model=spec,
                label=label,
                n=n,
                k=k,
                trials=trials,
                p=p,
                alpha=a,
                estimators=estimators,
                master_seed=derive_seed(master_seed, _SUITE_STAGE, idx),
            )
        )
    return configs


@dataclass(frozen=True)
class RealDataRow:
    q: float
    trial: int
    estimator: str
    hamming_error: int | None
    tie_broken: bool
    error: str | None


@dataclass(frozen=True)
class RealDataResult:
    n: int
    k: int
    rows: tuple[RealDataRow, ...]
    summary: dict


def run_realdata(
    obs_file,
    truth_file,
    k: int | None = None,
    q_grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
    trials: int = 100,
    seed: int = 0,
    estimators: tuple[str, ...] = ESTIMATORS,
) -> RealDataResult:
    """Subsampling evaluation on an ingested comparison dataset.

    ``truth_file`` lists every item id, one per line, best first.  For
    each subsampling fraction ``q`` and each trial, every recorded
    comparison is kept independently with probability ``q``, the
    estimators select ``k`` items (default ``ceil(n / 4)``), and the
    Hamming error against the true top-k is recorded; per-``q``
    averages go into the summary.  Estimator failures (a subsample may
    disconnect the comparison graph) are recorded, not fatal.
    """
    records = sample.read_comparisons_csv(obs_file)
    truth_ids = [line.strip() for line in Path(truth_file).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not truth_ids:
        raise ValueError(f"{truth_file}: no items listed")
    if len(set(truth_ids)) != len(truth_ids):
        raise ValueError(f"{truth_file}: duplicate item ids")
    index = {item: i for i, item in enumerate(truth_ids)}
    n = len(truth_ids)
    for rec in records:
        for item in (rec.item_a, rec.item_b):
            if item not in index:
                raise ValueError(f"item {item!r} appears in comparisons but not in the truth file")
    if k is None:
        k = -(-n // 4)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    comparisons = np.zeros((n, n), dtype=np.int64)
    wins = np.zeros((n, n), dtype=np.int64)
    for rec in records:
        a, b, w = index[rec.item_a], index[rec.item_b], index[rec.winner]
        comparisons[a, b] += 1
        comparisons[b, a] += 1
        wins[w, a + b - w] += 1
    obs = sample.ObservationSet(
        n=n, r=int(comparisons.max()), p=None, comparisons=comparisons, wins=wins
    )
    true_topk = set(range(k))
    rows = []
    for qi, q in enumerate(q_grid):
        for trial in range(trials):
            sub = sample.subsample(obs, q, derive_seed(seed, _REAL_STAGE, qi, trial))
            for name in estimators:
                try:
                    est = _estimate(name, sub, k)
                    rows.append(
                        RealDataRow(
                            q=q,
                            trial=trial,
                            estimator=name,
                            hamming_error=metrics.hamming_distance(est.items, true_topk),
                            tie_broken=est.tie_broken,
                            error=None,
                        )
                    )
                except (rank.DisconnectedGraphError, rank.ConvergenceError) as exc:
                    rows.append(
                        RealDataRow(
                            q=q,
                            trial=trial,
                            estimator=name,
                            hamming_error=None,
                            tie_broken=False,
                            error=f"{type(exc).__name__}: {exc}",
                        )
                    )
    summary: dict = {"n": n, "k": k, "trials": trials, "items": truth_ids, "per_q": []}
    for q in q_grid:
        entry = {"q": q, "estimators": {}}
        for name in estimators:
            got = [row for row in rows if row.estimator == name and row.q == q]
            ok = [row.hamming_error for row in got if row.error is None]
            entry["estimators"][name] = {
                "mean_hamming_error": (sum(ok) / len(ok)) if ok else None,
                "failed_trials": sum(row.error is not None for row in got),
            }
        summary["per_q"].append(entry)
    return RealDataResult(n=n, k=k, rows=tuple(rows), summary=summary)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(result: ExperimentResult, path, timing_in_csv: bool = False) -> None:
    """Write per-trial records with the fixed benchmark column set.

    The ``elapsed_ns`` column is zeroed unless ``timing_in_csv`` is
    set, keeping the default output byte-identical across reruns
    (timing statistics live in the summary).
    """
    cfg = result.config
    lines = [",".join(RESULT_COLUMNS)]
    for rec in result.records:
        row = (
            cfg.display_label,
            cfg.n,
            cfg.k,
            cfg.h,
            float(cfg.p),
            result.r,
            float(result.alpha),
            rec.trial,
            rec.estimator,
            rec.exact_success,
            rec.hamming_error,
            rec.allowed_success,
            rec.tie_broken,
            rec.elapsed_ns if timing_in_csv else 0,
            rec.derived_seed,
        )
        lines.append(",".join(_format_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_realdata_csv(result: RealDataResult, path) -> None:
    """Write per-trial real-data rows: q,trial,estimator,hamming_error,tie_broken,error."""
    lines = ["q,trial,estimator,hamming_error,tie_broken,error"]
    for row in result.rows:
        lines.append(
            ",".join(
                [
                    repr(float(row.q)),
                    str(row.trial),
                    row.estimator,
                    "" if row.hamming_error is None else str(row.hamming_error),
                    _format_value(row.tie_broken),
                    "" if row.error is None else row.error.replace(",", ";"),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_CONFIG_KEYS = {
    "model": str,
    "label": str,
    "n": int,
    "k": int,
    "h": int,
    "p": float,
    "alpha": float,
    "r": int,
    "trials": int,
    "estimators": str,
    "family": str,
    "master_seed": int,
    "per_trial_model": bool,
    "quality_spread": float,
    "lam": float,
    "gap": float,
    "delta": float,
    "delta0": float,
    "outlier": int,
    "swap_index": int,
    "plant_index": int,
    "model_seed": int,
    "ordering_seed": int,
    "entries_path": str,
}

_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` configuration text with ``#`` comments."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown configuration key {key!r}")
        caster = _CONFIG_KEYS[key]
        if caster is bool:
            try:
                values[key] = _BOOL_VALUES[value.lower()]
            except KeyError:
                raise ValueError(f"line {lineno}: expected a boolean, got {value!r}")
        else:
            values[key] = caster(value)
    return values


def config_from_mapping(values: dict) -> ExperimentConfig:
    """Build an experiment config from parsed key/value pairs."""
    values = dict(values)
    kind = values.pop("model", None)
    if kind is None:
        raise ValueError("configuration must set 'model'")
    n = values.pop("n", None)
    if n is None:
        raise ValueError("configuration must set 'n'")
    k = values.pop("k", None)
    if k is None:
        raise ValueError("configuration must set 'k'")
    ordering = None
    if "ordering_seed" in values:
        rng = np.random.default_rng(values.pop("ordering_seed"))
        ordering = tuple(int(x) for x in rng.permutation(n))
    spec = model.ModelSpec(
        kind=kind,
        quality_spread=values.pop("quality_spread", 6.0),
        lam=values.pop("lam", 0.8),
        gap=values.pop("gap", None),
        k=k if kind in ("planted", "hamming_planted") else None,
        delta=values.pop("delta", None),
        delta0=values.pop("delta0", None),
        outlier=values.pop("outlier", None),
        swap_index=values.pop("swap_index", 0),
        plant_index=values.pop("plant_index", None),
        ordering=ordering,
        seed=values.pop("model_seed", None),
        entries_path=values.pop("entries_path", None),
    )
    estimators = values.pop("estimators", None)
    if estimators is not None:
        estimators = tuple(name.strip() for name in estimators.split(",") if name.strip())
    else:
        estimators = ESTIMATORS
    return ExperimentConfig(
        model=spec,
        n=n,
        k=k,
        trials=values.pop("trials", 1),
        master_seed=values.pop("master_seed", 0),
        h=values.pop("h", 0),
        p=values.pop("p", 1.0),
        alpha=values.pop("alpha", None),
        r=values.pop("r", None),
        estimators=estimators,
        family=values.pop("family", ""),
        label=values.pop("label", None),
        per_trial_model=values.pop("per_trial_model", False),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Load a config file; ``overrides`` replace file values key by key."""
    values = parse_config_text(Path(path).read_text(encoding="utf-8"))
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                values[key] = value
    return config_from_mapping(values)
