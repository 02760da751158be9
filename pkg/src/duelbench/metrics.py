"""Regret measures, the tuned regret bound, and run aggregation.

A run is summarized on a logarithmic checkpoint grid: at each recorded step
the cumulative regret, the pull made at that step, and whether it hit the
(reference, reference) pair. Aggregating N runs gives the mean/min/max
regret band and the per-checkpoint hit rate the result CSVs report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ArmOutOfRangeError,
    GridMismatchError,
    MissingCheckpointError,
)
from .prefmat import PreferenceMatrix
from .rex3 import tau

CHECKPOINTS_PER_DECADE = 200


def condorcet_regret(m: PreferenceMatrix, a: int, b: int, istar: int | None = None) -> float:
    """Average advantage the reference arm holds over the pulled pair."""
    k = m.k
    if not 0 <= a < k or not 0 <= b < k:
        raise ArmOutOfRangeError(f"pair ({a}, {b}) outside [0, {k})")
    if istar is None:
        winner = m.condorcet_winner()
        istar = winner if winner is not None else int(np.argmax(m.copeland_scores()))
    return float((m.p[istar, a] + m.p[istar, b] - 1.0) / 2.0)


def bandit_regret(x: np.ndarray, istar: int, a: int, b: int) -> float:
    """Realized reward shortfall of the pull against the reference arm."""
    k = x.shape[0]
    if not 0 <= a < k or not 0 <= b < k or not 0 <= istar < k:
        raise ArmOutOfRangeError(f"indices ({istar}, {a}, {b}) outside [0, {k})")
    return float((2.0 * x[istar] - x[a] - x[b]) / 2.0)


def corollary2_bound(k: int, gamma: float, gmax: float, gmin: float) -> float:
    """Expected-regret ceiling k ln k / gamma + gamma * tau(gmax, gmin).

    At the unclamped tuned gamma this equals 2 sqrt(k ln k tau). Experiment
    plots conventionally halve it; callers do that themselves.
    """
    if not (0.0 < gamma <= 1.0) or not math.isfinite(gamma):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    return k * math.log(k) / gamma + gamma * tau(gmax, gmin)


def log_checkpoints(horizon: int, per_decade: int = CHECKPOINTS_PER_DECADE) -> np.ndarray:
    """Roughly log-spaced integer steps from 1 to horizon inclusive."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    decades = math.log10(horizon) if horizon > 1 else 0.0
    n = max(2, int(math.ceil(decades * per_decade)) + 1)
    ts = np.unique(np.round(np.logspace(0.0, decades, n)).astype(np.int64))
    ts = ts[(ts >= 1) & (ts <= horizon)]
    if ts.size == 0 or ts[-1] != horizon:
        ts = np.append(ts, horizon)
    return ts


def checkpoint_grid(horizon: int, explicit: list[int] | None = None) -> np.ndarray:
    """Explicit grids are validated and completed; None means the log grid."""
    if explicit is None:
        return log_checkpoints(horizon)
    ts = np.asarray(sorted(set(int(t) for t in explicit)), dtype=np.int64)
    if ts.size == 0 or ts[0] < 1 or ts[-1] > horizon:
        raise ValueError(f"checkpoints must lie in [1, {horizon}], got {explicit!r}")
    if ts[-1] != horizon:
        ts = np.append(ts, horizon)
    return ts


@dataclass(frozen=True)
class RunRecord:
    """One simulated run sampled on a checkpoint grid.

    `hits[i]` flags whether the pull at step ts[i] was (istar, istar);
    `hit_counts[i]` counts such pulls over all steps up to ts[i].
    """

    policy_id: str
    env_id: str
    base_seed: int
    run_index: int
    istar: int
    ts: np.ndarray
    cum_regret: np.ndarray
    arm_a: np.ndarray
    arm_b: np.ndarray
    hits: np.ndarray
    hit_counts: np.ndarray


@dataclass(frozen=True)
class AggregateCurve:
    policy_id: str
    env_id: str
    n_runs: int
    ts: np.ndarray
    mean: np.ndarray
    low: np.ndarray
    high: np.ndarray
    hit_rate: np.ndarray


def aggregate(records: list[RunRecord]) -> AggregateCurve:
    """Mean/min/max regret band plus hit rate across runs on one grid."""
    if not records:
        raise ValueError("nothing to aggregate")
    ts = records[0].ts
    for r in records[1:]:
        if r.ts.shape != ts.shape or not np.array_equal(r.ts, ts):
            raise GridMismatchError(
                f"run {r.run_index} uses a different checkpoint grid than run "
                f"{records[0].run_index}"
            )
    regret = np.stack([r.cum_regret for r in records])
    hits = np.stack([r.hits for r in records])
    return AggregateCurve(
        policy_id=records[0].policy_id,
        env_id=records[0].env_id,
        n_runs=len(records),
        ts=ts.copy(),
        mean=regret.mean(axis=0),
        low=regret.min(axis=0),
        high=regret.max(axis=0),
        hit_rate=hits.mean(axis=0),
    )


def accuracy(records: list[RunRecord], t: int) -> float:
    """Fraction of runs whose pull at checkpoint t was (istar, istar)."""
    if not records:
        raise ValueError("no records")
    idx = None
    for r in records:
        where = np.flatnonzero(r.ts == t)
        if where.size == 0:
            raise MissingCheckpointError(f"step {t} is not on the checkpoint grid")
        idx = int(where[0])
    return float(sum(bool(r.hits[idx]) for r in records) / len(records))


def write_aggregate_csv(curve: AggregateCurve, path: str | Path) -> None:
    """Result table: one checkpoint per row, 12 significant digits."""
    lines = ["t,mean,min,max,hit_rate"]
    for i in range(curve.ts.shape[0]):
        lines.append(
            f"{int(curve.ts[i])},{curve.mean[i]:.12g},{curve.low[i]:.12g},"
            f"{curve.high[i]:.12g},{curve.hit_rate[i]:.12g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
