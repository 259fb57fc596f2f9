"""Command-line interface.

Subcommands: ``gen-matrix`` (model spec to matrix CSV), ``simulate``
(matrix to observations CSV), ``rank`` (observations to top-k /
ranking JSON), ``thresholds`` (separation report JSON), ``bench``
(experiment config to results CSV + summary JSON), and ``eval-real``
(subsampling evaluation of an ingested dataset).

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
``--error-json`` switches error reporting to machine-readable JSON on
stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, harness, model, rank, sample, setfamily


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pairrank", description=__doc__)
    parser.add_argument(
        "--error-json",
        action="store_true",
        help="report errors as JSON on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-matrix", help="generate a comparison matrix CSV")
    gen.add_argument("--model", required=True, choices=[k for k in model.MODEL_KINDS if k != "explicit"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--quality", help="comma-separated quality values (parametric models)")
    gen.add_argument("--quality-spread", type=float, default=6.0)
    gen.add_argument("--lam", type=float, default=0.8, help="mixture weight in (1/2, 1]")
    gen.add_argument("--gap", type=float, help="diagonal increment bound (sst_diagonal)")
    gen.add_argument("--delta", type=float, help="planted gap")
    gen.add_argument("--delta0", type=float, help="adjacent-swap / top-block gap")
    gen.add_argument("--k", type=int, help="planted / top-block size")
    gen.add_argument("--outlier", type=int, help="outlier item index")
    gen.add_argument("--swap-index", type=int, default=0)
    gen.add_argument("--plant-index", type=int)
    gen.add_argument("--ordering-seed", type=int, help="shuffle seed for hamming_planted ordering")
    gen.add_argument("--seed", type=int, help="model seed (sst_diagonal)")

    sim = sub.add_parser("simulate", help="draw observations from a matrix")
    sim.add_argument("--matrix", required=True)
    sim.add_argument("--p", type=float, required=True)
    sim.add_argument("--r", type=int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True)

    rk = sub.add_parser("rank", help="rank items from observations")
    rk.add_argument("--obs", required=True)
    rk.add_argument("--k", type=int, required=True)
    rk.add_argument("--out", help="write JSON here instead of stdout")

    th = sub.add_parser("thresholds", help="separation report for a matrix")
    th.add_argument("--matrix", required=True)
    th.add_argument("--k", type=int, required=True)
    th.add_argument("--h", type=int, default=0)
    th.add_argument("--family", help="requirement spec (overrides the h-window separation)")
    th.add_argument("--p", type=float)
    th.add_argument("--r", type=int)
    th.add_argument("--alpha", type=float, default=8.0, help="target threshold constant")
    th.add_argument("--out", help="write JSON here instead of stdout")

    be = sub.add_parser("bench", help="run a benchmark experiment")
    be.add_argument("--config", required=True)
    be.add_argument("--out", required=True, help="results CSV path")
    be.add_argument("--summary", help="summary JSON path")
    be.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("PAIRRANK_THREADS", "1")),
        help="worker threads (default: PAIRRANK_THREADS or 1)",
    )
    be.add_argument(
        "--timing-in-csv",
        action="store_true",
        help="write wall-clock timings into the results CSV (breaks byte-identical reruns)",
    )
    for key in ("model", "label", "family", "estimators"):
        be.add_argument(f"--{key}", help=f"override config key '{key}'")
    for key in ("n", "k", "h", "r", "trials", "master-seed", "swap-index", "outlier", "plant-index", "model-seed", "ordering-seed"):
        be.add_argument(f"--{key}", type=int, help=f"override config key '{key.replace('-', '_')}'")
    for key in ("p", "alpha", "quality-spread", "lam", "gap", "delta", "delta0"):
        be.add_argument(f"--{key}", type=float, help=f"override config key '{key.replace('-', '_')}'")

    ev = sub.add_parser("eval-real", help="subsampling evaluation on ingested comparisons")
    ev.add_argument("--obs", required=True, help="comparisons CSV (item_a,item_b,winner)")
    ev.add_argument("--truth", required=True, help="item ids in rank order, one per line")
    ev.add_argument("--k", type=int)
    ev.add_argument("--q-grid", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    ev.add_argument("--trials", type=int, default=100)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", required=True, help="per-trial results CSV path")
    ev.add_argument("--summary", help="summary JSON path")
    return parser


_MODEL_REQUIRED_FLAGS = {
    "sst_diagonal": ("seed",),
    "planted": ("k", "delta"),
    "adjacent_swap": ("delta0",),
    "hamming_planted": ("k", "delta0"),
}


def _cmd_gen_matrix(args) -> int:
    for attr in _MODEL_REQUIRED_FLAGS.get(args.model, ()):
        if getattr(args, attr) is None:
            raise _UsageError(f"model {args.model!r} requires --{attr.replace('_', '-')}")
    w = None
    if args.quality is not None:
        w = tuple(float(x) for x in args.quality.split(","))
    ordering = None
    if args.ordering_seed is not None:
        ordering = tuple(int(x) for x in np.random.default_rng(args.ordering_seed).permutation(args.n))
    spec = model.ModelSpec(
        kind=args.model,
        w=w,
        quality_spread=args.quality_spread,
        lam=args.lam,
        gap=args.gap,
        delta=args.delta,
        delta0=args.delta0,
        k=args.k,
        outlier=args.outlier,
        swap_index=args.swap_index,
        plant_index=args.plant_index,
        ordering=ordering,
        seed=args.seed,
    )
    matrix = model.instantiate(spec, args.n)
    model.write_matrix_csv(matrix, args.out)
    return 0


def _cmd_simulate(args) -> int:
    matrix = model.read_matrix_csv(args.matrix)
    obs = sample.draw_observations(matrix, args.p, args.r, args.seed)
    sample.write_observations_csv(obs, args.out)
    return 0


def _emit(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_rank(args) -> int:
    obs = sample.read_observations_csv(args.obs)
    if not 1 <= args.k <= obs.n:
        raise _UsageError(f"--k must lie in [1, {obs.n}], got {args.k}")
    top = rank.copeland_topk(obs, args.k)
    ranking = rank.copeland_ranking(obs)
    _emit(
        {
            "n": obs.n,
            "k": args.k,
            "topk": list(top.items),
            "tie_broken": top.tie_broken,
            "ranking": list(ranking.order),
        },
        args.out,
    )
    return 0


def _cmd_thresholds(args) -> int:
    matrix = model.read_matrix_csv(args.matrix)
    if args.family:
        family = setfamily.parse_family_spec(args.family, matrix.n, args.k)
        delta = setfamily.separation_family(analysis.scores(matrix), family)
        report = analysis.SeparationReport(
            n=matrix.n,
            k=args.k,
            h=args.h,
            delta=delta,
            alpha_implied=(
                analysis.implied_alpha(matrix.n, args.p, args.r, delta)
                if args.p is not None and args.r is not None
                else None
            ),
            r_required=(
                analysis.required_repetitions(matrix.n, args.p, delta, args.alpha)
                if args.p is not None and 0 < delta < float("inf")
                else None
            ),
        )
    else:
        report = analysis.separation_report(
            matrix, args.k, args.h, p=args.p, r=args.r, alpha=args.alpha
        )
    _emit(report.to_dict(), args.out)
    return 0


def _cmd_bench(args) -> int:
    overrides = {}
    for key in (
        "model", "label", "family", "estimators", "n", "k", "h", "r", "trials",
        "master_seed", "swap_index", "outlier", "plant_index", "model_seed",
        "ordering_seed", "p", "alpha", "quality_spread", "lam", "gap", "delta", "delta0",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    cfg = harness.load_config(args.config, overrides)
    result = harness.run_experiment(cfg, threads=max(1, args.threads))
    harness.write_results_csv(result, args.out, timing_in_csv=args.timing_in_csv)
    if args.summary:
        _emit(result.summary, args.summary)
    return 0


def _cmd_eval_real(args) -> int:
    q_grid = tuple(float(x) for x in args.q_grid.split(",") if x.strip())
    if not q_grid:
        raise _UsageError("--q-grid must list at least one fraction")
    result = harness.run_realdata(
        args.obs,
        args.truth,
        k=args.k,
        q_grid=q_grid,
        trials=args.trials,
        seed=args.seed,
    )
    harness.write_realdata_csv(result, args.out)
    if args.summary:
        _emit(result.summary, args.summary)
    return 0


_COMMANDS = {
    "gen-matrix": _cmd_gen_matrix,
    "simulate": _cmd_simulate,
    "rank": _cmd_rank,
    "thresholds": _cmd_thresholds,
    "bench": _cmd_bench,
    "eval-real": _cmd_eval_real,
}


def _report_error(message: str, category: str, code: int, as_json: bool) -> None:
    if as_json:
        print(
            json.dumps({"error": message, "category": category, "exit_code": code}),
            file=sys.stderr,
        )
    else:
        print(f"pairrank: error: {message}", file=sys.stderr)


def main(argv=None) -> int:
    as_json = "--error-json" in (argv if argv is not None else sys.argv[1:])
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        _report_error(str(exc), "usage", 1, as_json)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        _report_error(str(exc), "usage", 1, args.error_json)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        _report_error(str(exc), "data", 2, args.error_json)
        return 2
    except (rank.DisconnectedGraphError, rank.ConvergenceError, RuntimeError) as exc:
        _report_error(str(exc), "runtime", 3, args.error_json)
        return 3


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
