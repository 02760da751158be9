"""Command-line front end.

Subcommands: run (config file or preset), sweep (exploration-rate grid vs
closed-form bounds), matrix (generator to CSV), reduce (dueling-driven
two-pull bandit play). Everything prints a short plain-text summary; the
real output is CSV files.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ._kernels import backend_name
from .errors import DuelbenchError
from .harness import (
    PRESET_NAMES,
    PRESETS,
    REDUCTION_PRESETS,
    ExperimentConfig,
    ReductionConfig,
    gamma_sweep,
    load_config,
    run_experiment,
    run_reduction_experiment,
)
from .prefmat import bvs_matrix, preference_from_utilities, savage_matrix, save_matrix_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duelbench",
        description="Pairwise-comparison bandit experiment harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config or preset")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="key=value experiment file")
    src.add_argument("--preset", choices=PRESET_NAMES, help="shipped protocol")
    run_p.add_argument("--out", help="output directory override")
    run_p.add_argument("--runs", type=int, help="override the number of runs")
    run_p.add_argument("--horizon", type=int, help="override the horizon")
    run_p.add_argument("--seed", type=int, help="override the base seed")
    run_p.add_argument("--workers", type=int, help="parallel worker override")
    run_p.add_argument("--backend", choices=["compiled", "python"])

    sweep_p = sub.add_parser("sweep", help="fixed exploration rates vs halved bounds")
    sweep_p.add_argument(
        "--gammas",
        nargs="+",
        required=True,
        help="rates in (0, 1], or the word optimal",
    )
    sweep_p.add_argument("--env", default="savage", help="environment descriptor")
    sweep_p.add_argument("--k", type=int, help="arm count for generated environments")
    sweep_p.add_argument("--mu", help="comma-separated means for env utilities")
    sweep_p.add_argument("--horizon", type=int, default=10_000)
    sweep_p.add_argument("--runs", type=int, default=50)
    sweep_p.add_argument("--seed", type=int, default=0)
    sweep_p.add_argument("--name", default="sweep")
    sweep_p.add_argument("--out", default="results")
    sweep_p.add_argument("--workers", type=int)
    sweep_p.add_argument("--backend", choices=["compiled", "python"])

    mat_p = sub.add_parser("matrix", help="write a generated preference matrix")
    mat_p.add_argument(
        "--generate", required=True, choices=["savage", "bvs", "utilities"]
    )
    mat_p.add_argument("--k", type=int, help="arm count (savage; bvs defaults to 20)")
    mat_p.add_argument("--mu", help="comma-separated means (utilities)")
    mat_p.add_argument("--out", required=True, help="destination CSV path")

    red_p = sub.add_parser("reduce", help="dueling policy playing a two-pull bandit")
    red_p.add_argument("--preset", choices=sorted(REDUCTION_PRESETS))
    red_p.add_argument("--mu", help="comma-separated Bernoulli means")
    red_p.add_argument("--horizon", type=int)
    red_p.add_argument("--runs", type=int)
    red_p.add_argument("--seed", type=int)
    red_p.add_argument("--name", default="reduction")
    red_p.add_argument("--out", help="output directory")
    return parser


def _parse_mu(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise DuelbenchError(f"bad mu list {text!r}: {exc}") from exc


def _cmd_run(args) -> int:
    if args.preset is not None:
        if args.preset in REDUCTION_PRESETS:
            return _run_reduction_config(REDUCTION_PRESETS[args.preset], args)
        config = PRESETS[args.preset]
    else:
        config = load_config(args.config)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = replace(config, **overrides)
    results = run_experiment(config, workers=args.workers, backend=args.backend)
    print(f"# backend={backend_name(args.backend)} horizon={config.horizon} runs={config.runs}")
    for r in results:
        print(
            f"{r.policy_id} on {r.env_id}: final mean regret "
            f"{r.curve.mean[-1]:.6g} (min {r.curve.low[-1]:.6g}, "
            f"max {r.curve.high[-1]:.6g}) -> {r.csv_path}"
        )
    return 0


def _cmd_sweep(args) -> int:
    gammas = []
    for g in args.gammas:
        if g == "optimal":
            gammas.append("optimal")
        else:
            try:
                gammas.append(float(g))
            except ValueError as exc:
                raise DuelbenchError(f"bad gamma {g!r}") from exc
    config = ExperimentConfig(
        name=args.name,
        env=args.env,
        policies=("random",),  # placeholder; the sweep builds its own
        horizon=args.horizon,
        runs=args.runs,
        seed=args.seed,
        k=args.k,
        mu=_parse_mu(args.mu) if args.mu else None,
        out_dir=args.out,
    )
    rows = gamma_sweep(config, gammas, workers=args.workers, backend=args.backend)
    print("gamma\tmean_regret\thalved_bound(h/2)\thalved_bound(h/4)")
    for row in rows:
        print(
            f"{row.label}\t{row.mean_regret:.6g}\t"
            f"{row.bound_conservative:.6g}\t{row.bound_risky:.6g}"
        )
    print(f"-> {Path(args.out) / (args.name + '_sweep.csv')}")
    return 0


def _cmd_matrix(args) -> int:
    if args.generate == "savage":
        if args.k is None:
            raise DuelbenchError("--generate savage needs --k")
        m = savage_matrix(args.k)
    elif args.generate == "bvs":
        m = bvs_matrix(20 if args.k is None else args.k)
    else:
        if args.mu is None:
            raise DuelbenchError("--generate utilities needs --mu")
        m = preference_from_utilities(np.asarray(_parse_mu(args.mu)))
    save_matrix_csv(m, args.out)
    winner = m.condorcet_winner()
    print(
        f"wrote {m.k}x{m.k} matrix to {args.out} "
        f"(reference arm: {'none' if winner is None else winner})"
    )
    return 0


def _run_reduction_config(base: ReductionConfig, args) -> int:
    overrides = {}
    if getattr(args, "mu", None):
        overrides["mu"] = _parse_mu(args.mu)
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    config = replace(base, **overrides) if overrides else base
    rows = run_reduction_experiment(config)
    mean_classical = sum(r["classical_gain"] for r in rows) / len(rows)
    mean_regret = sum(r["pseudo_regret"] for r in rows) / len(rows)
    print(
        f"{config.name}: {config.runs} runs x {config.horizon} pulls on "
        f"{len(config.mu)} arms"
    )
    print(
        f"mean classical gain {mean_classical:.6g}, dueling gain is exactly "
        f"half, mean pseudo-regret {mean_regret:.6g}"
    )
    print(f"-> {Path(config.out_dir) / (config.name + '_rex3.csv')}")
    return 0


def _cmd_reduce(args) -> int:
    if args.preset is not None:
        return _run_reduction_config(REDUCTION_PRESETS[args.preset], args)
    if args.mu is None:
        raise DuelbenchError("reduce needs --mu or --preset")
    config = ReductionConfig(
        name=args.name,
        mu=_parse_mu(args.mu),
        horizon=args.horizon if args.horizon is not None else 10_000,
        runs=args.runs if args.runs is not None else 20,
        seed=args.seed if args.seed is not None else 0,
        out_dir=args.out if args.out is not None else "results",
    )
    # route through the override-free path; config is already final
    rows = run_reduction_experiment(config)
    mean_regret = sum(r["pseudo_regret"] for r in rows) / len(rows)
    print(f"{config.name}: mean pseudo-regret {mean_regret:.6g} over {config.runs} runs")
    print(f"-> {Path(config.out_dir) / (config.name + '_rex3.csv')}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "matrix": _cmd_matrix,
        "reduce": _cmd_reduce,
    }
    try:
        return handlers[args.command](args)
    except DuelbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
