"""Experiment orchestration: configs, presets, seeded multi-run execution.

Runs are embarrassingly parallel. Each run gets its own PCG64 stream seeded
from SeedSequence([base_seed, run_index]); results therefore depend only on
the config, never on worker count or completion order. The RNG family is
part of the output contract: changing it invalidates every golden trace.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._kernels import EnvSpec, PolicySpec, RunData, simulate
from .baselines import default_exp3_gamma
from .environments import load_sequence_csv
from .errors import ConfigInvalidError
from .metrics import (
    AggregateCurve,
    RunRecord,
    aggregate,
    checkpoint_grid,
    corollary2_bound,
    write_aggregate_csv,
)
from .prefmat import PreferenceMatrix, bvs_matrix, load_matrix_csv, savage_matrix
from .reduction import (
    BernoulliBandit,
    pseudo_regret,
    run_reduction,
    verify_gain_accounting,
)
from .rex3 import GammaSchedule, Rex3Policy, optimal_gamma, tau

_CONFIG_KEYS = {
    "name",
    "env",
    "policies",
    "horizon",
    "runs",
    "seed",
    "k",
    "mu",
    "checkpoints",
    "out",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs; env and policies are descriptors.

    Environment descriptors: savage | bvs | utilities | drift |
    matrix:<csv path> | adversarial:<csv path>. Policy descriptors:
    rex3:<gamma> | rex3:optimal | rex3:adaptive | sparring | random.
    """

    name: str
    env: str
    policies: tuple[str, ...]
    horizon: int
    runs: int
    seed: int = 0
    k: int | None = None
    mu: tuple[float, ...] | None = None
    checkpoints: tuple[int, ...] | None = None
    out_dir: str = "results"

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigInvalidError(f"horizon must be >= 1, got {self.horizon}")
        if self.runs < 1:
            raise ConfigInvalidError(f"runs must be >= 1, got {self.runs}")
        if not self.policies:
            raise ConfigInvalidError("at least one policy is required")


@dataclass(frozen=True)
class ReductionConfig:
    """Dueling-driven two-pull bandit play on Bernoulli arms."""

    name: str
    mu: tuple[float, ...]
    horizon: int
    runs: int
    seed: int = 0
    out_dir: str = "results"


@dataclass(frozen=True)
class ExperimentResult:
    policy_id: str
    env_id: str
    curve: AggregateCurve
    records: tuple[RunRecord, ...]
    csv_path: str | None


@dataclass(frozen=True)
class SweepRow:
    """One swept exploration rate with its measured and predicted regret.

    Both bound columns are the closed-form ceiling halved (matrix-regret
    units), under the conservative best-gain guess horizon/2 and the
    riskier horizon/4.
    """

    label: str
    gamma: float
    mean_regret: float
    bound_conservative: float
    bound_risky: float


def parse_config(text: str) -> ExperimentConfig:
    """key = value lines; blank lines and # comments are skipped."""
    seen: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigInvalidError(f"line {ln}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigInvalidError(f"line {ln}: unknown key {key!r}")
        if key in seen:
            raise ConfigInvalidError(f"line {ln}: duplicate key {key!r}")
        if not value:
            raise ConfigInvalidError(f"line {ln}: empty value for {key!r}")
        seen[key] = value
    for required in ("env", "policies", "horizon"):
        if required not in seen:
            raise ConfigInvalidError(f"missing required key {required!r}")
    try:
        horizon = int(seen["horizon"])
        runs = int(seen.get("runs", "1"))
        seed = int(seen.get("seed", "0"))
        k = int(seen["k"]) if "k" in seen else None
        mu = (
            tuple(float(v) for v in seen["mu"].split(","))
            if "mu" in seen
            else None
        )
        checkpoints = (
            tuple(int(v) for v in seen["checkpoints"].split(","))
            if "checkpoints" in seen
            else None
        )
    except ValueError as exc:
        raise ConfigInvalidError(f"bad numeric value: {exc}") from exc
    policies = tuple(p.strip() for p in seen["policies"].split(",") if p.strip())
    return ExperimentConfig(
        name=seen.get("name", "experiment"),
        env=seen["env"],
        policies=policies,
        horizon=horizon,
        runs=runs,
        seed=seed,
        k=k,
        mu=mu,
        checkpoints=checkpoints,
        out_dir=seen.get("out", "results"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalidError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _matrix_env(m: PreferenceMatrix) -> EnvSpec:
    winner = m.condorcet_winner()
    istar = winner if winner is not None else int(np.argmax(m.copeland_scores()))
    return EnvSpec("matrix", m.k, istar, matrix=m.p)


def resolve_env(config: ExperimentConfig) -> tuple[EnvSpec, str]:
    """Environment descriptor to a kernel spec plus a file-name-safe id."""
    desc = config.env
    if desc == "savage":
        if config.k is None:
            raise ConfigInvalidError("env savage needs k")
        return _matrix_env(savage_matrix(config.k)), f"savage{config.k}"
    if desc == "bvs":
        k = 20 if config.k is None else config.k
        return _matrix_env(bvs_matrix(k)), f"bvs{k}"
    if desc == "utilities":
        if config.mu is None:
            raise ConfigInvalidError("env utilities needs mu")
        mu = np.asarray(config.mu, dtype=np.float64)
        spec = EnvSpec("utility", int(mu.size), int(np.argmax(mu)), mu=mu)
        return spec, f"bernoulli{mu.size}"
    if desc == "drift":
        if config.k is None:
            raise ConfigInvalidError("env drift needs k")
        return EnvSpec("drift", config.k, 0), f"drift{config.k}"
    if desc.startswith("matrix:"):
        path = desc.partition(":")[2]
        if not path:
            raise ConfigInvalidError("matrix: descriptor needs a file path")
        return _matrix_env(load_matrix_csv(path)), Path(path).stem
    if desc.startswith("adversarial:"):
        path = desc.partition(":")[2]
        if not path:
            raise ConfigInvalidError("adversarial: descriptor needs a file path")
        rewards = load_sequence_csv(path)
        istar = int(np.argmax(rewards.sum(axis=0)))
        spec = EnvSpec("adversarial", int(rewards.shape[1]), istar, rewards=rewards)
        return spec, Path(path).stem
    raise ConfigInvalidError(f"unknown environment descriptor {desc!r}")


def resolve_policy(desc: str, k: int, horizon: int) -> tuple[PolicySpec, str]:
    """Policy descriptor to a kernel spec plus a file-name-safe id."""
    if desc == "random":
        return PolicySpec("random"), "random"
    if desc == "sparring":
        return (
            PolicySpec("sparring", gamma_e=default_exp3_gamma(k, horizon)),
            "sparring",
        )
    if desc.startswith("sparring:"):
        try:
            ge = float(desc.partition(":")[2])
        except ValueError as exc:
            raise ConfigInvalidError(f"bad sparring rate in {desc!r}") from exc
        if not 0.0 < ge <= 1.0:
            raise ConfigInvalidError(f"sparring rate must lie in (0, 1], got {ge}")
        return PolicySpec("sparring", gamma_e=ge), f"sparring-g{ge:g}"
    if desc == "rex3:adaptive":
        return PolicySpec("rex3", "adaptive", gmax_div=2.0), "rex3-adaptive"
    if desc == "rex3:optimal":
        gval = optimal_gamma(k, tau(horizon / 2.0, 0.0))
        return PolicySpec("rex3", "fixed", gamma=gval), "rex3-gopt"
    if desc.startswith("rex3:"):
        try:
            gval = float(desc.partition(":")[2])
        except ValueError as exc:
            raise ConfigInvalidError(f"bad exploration rate in {desc!r}") from exc
        if not 0.0 < gval <= 1.0:
            raise ConfigInvalidError(f"exploration rate must lie in (0, 1], got {gval}")
        return PolicySpec("rex3", "fixed", gamma=gval), f"rex3-g{gval:g}"
    raise ConfigInvalidError(f"unknown policy descriptor {desc!r}")


def resolve_workers(explicit: int | None = None) -> int:
    """Explicit argument wins; DUELBENCH_WORKERS next; serial otherwise."""
    if explicit is None:
        raw = os.environ.get("DUELBENCH_WORKERS", "1")
        try:
            explicit = int(raw)
        except ValueError as exc:
            raise ConfigInvalidError(f"DUELBENCH_WORKERS={raw!r} is not an integer") from exc
    if explicit < 1:
        raise ConfigInvalidError(f"worker count must be >= 1, got {explicit}")
    return explicit


def _run_one(args) -> RunData:
    policy_spec, env_spec, horizon, cps, base_seed, run_index, backend = args
    bg = np.random.PCG64(np.random.SeedSequence([base_seed, run_index]))
    return simulate(policy_spec, env_spec, horizon, cps, bg, backend=backend)


def run_experiment(
    config: ExperimentConfig,
    workers: int | None = None,
    backend: str | None = None,
    write_csv: bool = True,
    keep_records: bool = False,
) -> list[ExperimentResult]:
    """Execute every policy in the config over N seeded runs and aggregate.

    One CSV per policy, named <config.name>_<policy_id>.csv. Run n of every
    policy draws from PCG64(SeedSequence([seed, n])); worker count cannot
    change any output byte.
    """
    env_spec, env_id = resolve_env(config)
    pairs = []
    seen_ids: set[str] = set()
    for desc in config.policies:
        spec, pid = resolve_policy(desc, env_spec.k, config.horizon)
        if pid in seen_ids:
            raise ConfigInvalidError(f"duplicate policy id {pid!r}")
        seen_ids.add(pid)
        pairs.append((spec, pid))
    explicit = list(config.checkpoints) if config.checkpoints is not None else None
    try:
        cps = checkpoint_grid(config.horizon, explicit)
    except ValueError as exc:
        raise ConfigInvalidError(f"bad checkpoint grid: {exc}") from exc
    n_workers = resolve_workers(workers)
    jobs = [
        (spec, env_spec, config.horizon, cps, config.seed, run, backend)
        for spec, _ in pairs
        for run in range(config.runs)
    ]
    if n_workers == 1:
        outs = [_run_one(job) for job in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * n_workers))
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outs = list(pool.map(_run_one, jobs, chunksize=chunk))

    results = []
    idx = 0
    for spec, pid in pairs:
        records = []
        for run in range(config.runs):
            rd = outs[idx]
            idx += 1
            records.append(
                RunRecord(
                    policy_id=pid,
                    env_id=env_id,
                    base_seed=config.seed,
                    run_index=run,
                    istar=env_spec.istar,
                    ts=rd.ts,
                    cum_regret=rd.cum_regret,
                    arm_a=rd.arm_a,
                    arm_b=rd.arm_b,
                    hits=rd.hits,
                    hit_counts=rd.hit_counts,
                )
            )
        curve = aggregate(records)
        csv_path = None
        if write_csv:
            out_dir = Path(config.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            csv_path = str(out_dir / f"{config.name}_{pid}.csv")
            write_aggregate_csv(curve, csv_path)
        results.append(
            ExperimentResult(
                policy_id=pid,
                env_id=env_id,
                curve=curve,
                records=tuple(records) if keep_records else (),
                csv_path=csv_path,
            )
        )
    return results


def gamma_sweep(
    config: ExperimentConfig,
    gammas: list,
    workers: int | None = None,
    backend: str | None = None,
    write_csv: bool = True,
) -> list[SweepRow]:
    """Mean final regret at each exploration rate next to the halved bound.

    Entries may be floats or the string "optimal", which re-tunes from the
    horizon with the conservative best-gain guess horizon/2.
    """
    if not gammas:
        raise ConfigInvalidError("sweep needs at least one exploration rate")
    env_spec, _ = resolve_env(config)
    rows = []
    for g in gammas:
        if g == "optimal":
            descriptor = "rex3:optimal"
            label = "optimal"
            gval = optimal_gamma(env_spec.k, tau(config.horizon / 2.0, 0.0))
        else:
            gval = float(g)
            descriptor = f"rex3:{gval!r}"
            label = f"{gval:g}"
        sub = replace(config, policies=(descriptor,))
        result = run_experiment(sub, workers=workers, backend=backend, write_csv=False)[0]
        rows.append(
            SweepRow(
                label=label,
                gamma=gval,
                mean_regret=float(result.curve.mean[-1]),
                bound_conservative=corollary2_bound(
                    env_spec.k, gval, config.horizon / 2.0, 0.0
                )
                / 2.0,
                bound_risky=corollary2_bound(env_spec.k, gval, config.horizon / 4.0, 0.0)
                / 2.0,
            )
        )
    if write_csv:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["gamma,mean_regret,halved_bound_conservative,halved_bound_risky"]
        for row in rows:
            lines.append(
                f"{row.label},{row.mean_regret:.12g},"
                f"{row.bound_conservative:.12g},{row.bound_risky:.12g}"
            )
        (out_dir / f"{config.name}_sweep.csv").write_text("\n".join(lines) + "\n")
    return rows


def run_reduction_experiment(
    config: ReductionConfig, write_csv: bool = True
) -> list[dict]:
    """Anytime dueling policy driving a two-pull bandit; per-run gain rows.

    Every trace is re-checked for exact gain accounting before it is
    reported.
    """
    bandit = BernoulliBandit(np.asarray(config.mu, dtype=np.float64))
    rows = []
    for run in range(config.runs):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([config.seed, run]))
        )
        policy = Rex3Policy(bandit.arms(), GammaSchedule.adaptive())
        trace = run_reduction(policy, bandit, config.horizon, rng)
        verify_gain_accounting(trace)
        rows.append(
            {
                "run": run,
                "iterations": trace.n_iterations,
                "classical_gain": trace.classical_gain,
                "dueling_gain": trace.dueling_gain,
                "pseudo_regret": pseudo_regret(trace, bandit.mu),
            }
        )
    if write_csv:
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["run,iterations,classical_gain,dueling_gain,pseudo_regret"]
        for r in rows:
            lines.append(
                f"{r['run']},{r['iterations']},{r['classical_gain']:.12g},"
                f"{r['dueling_gain']:.12g},{r['pseudo_regret']:.12g}"
            )
        (out_dir / f"{config.name}_rex3.csv").write_text("\n".join(lines) + "\n")
    return rows


# Shipped protocols at desk scale; runs/horizon stay overridable knobs.
# External preference matrices plug in through env = matrix:<path> configs.
PRESETS: dict[str, ExperimentConfig] = {
    "fig1-sweep": ExperimentConfig(
        name="fig1-sweep",
        env="savage",
        k=30,
        policies=("rex3:0.05", "rex3:0.1", "rex3:0.2", "rex3:0.4", "rex3:optimal"),
        horizon=10_000,
        runs=50,
        seed=101,
    ),
    "savage30": ExperimentConfig(
        name="savage30",
        env="savage",
        k=30,
        policies=("rex3:adaptive", "sparring", "random"),
        horizon=100_000,
        runs=50,
        seed=102,
    ),
    "bvs20": ExperimentConfig(
        name="bvs20",
        env="bvs",
        k=20,
        policies=("rex3:adaptive", "sparring", "random"),
        horizon=100_000,
        runs=20,
        seed=103,
    ),
    "nonstationary10": ExperimentConfig(
        name="nonstationary10",
        env="drift",
        k=10,
        policies=("rex3:adaptive", "sparring", "random"),
        horizon=100_000,
        runs=20,
        seed=104,
    ),
}

REDUCTION_PRESETS: dict[str, ReductionConfig] = {
    "lowerbound-reduction": ReductionConfig(
        name="lowerbound-reduction",
        mu=(0.8, 0.6, 0.4, 0.2),
        horizon=10_000,
        runs=20,
        seed=105,
    ),
}

PRESET_NAMES = tuple(sorted([*PRESETS, *REDUCTION_PRESETS]))
