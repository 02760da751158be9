"""Driving a classical bandit with a dueling policy.

One iteration consumes two classical steps: the dueling policy names a pair
(a, b), the classical environment pays out both pulls, and the policy is
updated with the reward difference as its relative feedback. The classical
gain is therefore exactly twice the dueling-gain bookkeeping, which is the
accounting identity `verify_gain_accounting` checks on realized traces.

The step counter starts at 1 and advances by 2; iterations run while
t <= horizon, i.e. ceil(horizon/2) of them, so an odd horizon still pulls
both arms on its last iteration and overshoots by one classical step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ArmCountMismatchError,
    HorizonTooSmallError,
    MeanOutOfRangeError,
    TooFewArmsError,
)


class BernoulliBandit:
    """Stationary classical bandit paying 0/1 rewards."""

    def __init__(self, mu: np.ndarray):
        mu = np.ascontiguousarray(mu, dtype=np.float64)
        if mu.ndim != 1 or mu.size < 2:
            raise TooFewArmsError(f"need at least 2 means, got shape {mu.shape}")
        if (~np.isfinite(mu) | (mu < 0.0) | (mu > 1.0)).any():
            raise MeanOutOfRangeError(f"means must lie in [0, 1], got {mu!r}")
        self.mu = mu

    def arms(self) -> int:
        return self.mu.size

    def get_reward(self, arm: int, rng: np.random.Generator) -> float:
        return float(rng.random() < self.mu[arm])


@dataclass(frozen=True)
class ReductionTrace:
    a: np.ndarray
    b: np.ndarray
    reward_a: np.ndarray
    reward_b: np.ndarray
    psi: np.ndarray
    horizon: int
    classical_gain: float
    dueling_gain: float

    @property
    def n_iterations(self) -> int:
        return self.a.shape[0]

    @property
    def classical_pulls(self) -> int:
        return 2 * self.n_iterations


def run_reduction(policy, bandit, horizon: int, rng: np.random.Generator) -> ReductionTrace:
    """Run the pair-pull loop to the classical horizon and record everything."""
    if horizon < 2:
        raise HorizonTooSmallError(f"horizon must be >= 2, got {horizon}")
    if policy.arms() != bandit.arms():
        raise ArmCountMismatchError(
            f"policy has {policy.arms()} arms, bandit has {bandit.arms()}"
        )
    n = (horizon + 1) // 2
    a = np.empty(n, dtype=np.int32)
    b = np.empty(n, dtype=np.int32)
    ra = np.empty(n)
    rb = np.empty(n)
    classical_gain = 0.0
    dueling_gain = 0.0
    t = 1
    i = 0
    while t <= horizon:
        a_i, b_i = policy.select_pair(rng)
        r_a = bandit.get_reward(a_i, rng)
        r_b = bandit.get_reward(b_i, rng)
        policy.update(a_i, b_i, r_a - r_b)
        a[i], b[i] = a_i, b_i
        ra[i], rb[i] = r_a, r_b
        classical_gain += r_a + r_b
        dueling_gain += (r_a + r_b) / 2.0
        t += 2
        i += 1
    return ReductionTrace(
        a=a,
        b=b,
        reward_a=ra,
        reward_b=rb,
        psi=ra - rb,
        horizon=horizon,
        classical_gain=classical_gain,
        dueling_gain=dueling_gain,
    )


def verify_gain_accounting(trace: ReductionTrace) -> None:
    """Exact accounting identity on realized rewards; raises on any drift."""
    total = 0.0
    half = 0.0
    for i in range(trace.n_iterations):
        step = float(trace.reward_a[i]) + float(trace.reward_b[i])
        total += step
        half += step / 2.0
    if total != trace.classical_gain:
        raise ValueError(
            f"classical gain {trace.classical_gain!r} does not match replayed sum {total!r}"
        )
    if half != trace.dueling_gain or trace.dueling_gain != trace.classical_gain / 2.0:
        raise ValueError(
            f"dueling gain {trace.dueling_gain!r} is not half of classical {trace.classical_gain!r}"
        )


def pseudo_regret(trace: ReductionTrace, mu: np.ndarray) -> float:
    """Classical pseudo-regret: pulls times the best mean, minus realized gain."""
    return trace.classical_pulls * float(np.max(mu)) - trace.classical_gain


def save_trace_csv(trace: ReductionTrace, path) -> None:
    from pathlib import Path

    lines = ["iteration,a,b,reward_a,reward_b,feedback"]
    for i in range(trace.n_iterations):
        lines.append(
            f"{i + 1},{int(trace.a[i])},{int(trace.b[i])},{trace.reward_a[i]:.12g},"
            f"{trace.reward_b[i]:.12g},{trace.psi[i]:.12g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
