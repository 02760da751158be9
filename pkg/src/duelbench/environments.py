"""Duel environments: where the relative feedback comes from.

Each environment answers one duel per call: given a pair (a, b) and the
one-based time step t, it returns the relative feedback psi = x_a - x_b in
[-1, 1], the instantaneous regret of that pull against the environment's
reference arm, and whether the pull hit (reference, reference).

Regret conventions:

- matrix environments measure Condorcet regret
  (p[ref, a] + p[ref, b] - 1) / 2, nonnegative whenever a true Condorcet
  winner exists (cyclic tournaments fall back to the best Copeland arm and
  may go negative);
- reward environments measure bandit regret (2 x_ref - x_a - x_b) / 2 on the
  realized reward vector.

Uniform-variate consumption is part of each environment's contract, because
the compiled simulation kernel replays the identical stream: a matrix duel
consumes exactly one uniform, a utility or drifting duel consumes exactly k
(one per arm, ascending index), an adversarial duel consumes none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ArmOutOfRangeError,
    DuelbenchError,
    EntryOutOfRangeError,
    MeanOutOfRangeError,
    StepOutOfRangeError,
    TooFewArmsError,
)
from .prefmat import PreferenceMatrix


@dataclass(frozen=True)
class DuelFeedback:
    psi: float
    regret: float
    hit: bool


def _check_arm(arm: int, k: int) -> None:
    if not 0 <= arm < k:
        raise ArmOutOfRangeError(f"arm {arm} outside [0, {k})")


class MatrixEnvironment:
    """Stationary stochastic duels judged by a preference matrix."""

    def __init__(self, matrix: PreferenceMatrix, name: str | None = None):
        self.matrix = matrix
        winner = matrix.condorcet_winner()
        self.has_condorcet = winner is not None
        # Cyclic tournaments get the best Copeland arm as reference; regret
        # against it can be negative for duels it loses.
        self._ref = winner if winner is not None else int(np.argmax(matrix.copeland_scores()))
        self.name = name or f"matrix{matrix.k}"

    def arms(self) -> int:
        return self.matrix.k

    def best_arm(self) -> int:
        return self._ref

    def duel(self, a: int, b: int, t: int, rng: np.random.Generator) -> DuelFeedback:
        p = self.matrix.p
        k = p.shape[0]
        _check_arm(a, k)
        _check_arm(b, k)
        win = rng.random() < p[a, b]
        psi = 1.0 if win else -1.0
        ref = self._ref
        regret = (p[ref, a] + p[ref, b] - 1.0) / 2.0
        return DuelFeedback(psi=psi, regret=float(regret), hit=a == ref and b == ref)


class UtilityEnvironment:
    """Independent Bernoulli rewards per arm; feedback is their difference.

    One reward vector is drawn per duel, so the feedback and the bandit
    regret of the same step are measured on the same realization.
    """

    def __init__(self, mu: np.ndarray, name: str | None = None):
        mu = np.ascontiguousarray(mu, dtype=np.float64)
        if mu.ndim != 1 or mu.size < 2:
            raise TooFewArmsError(f"need at least 2 means, got shape {mu.shape}")
        if (~np.isfinite(mu) | (mu < 0.0) | (mu > 1.0)).any():
            raise MeanOutOfRangeError(f"means must lie in [0, 1], got {mu!r}")
        self.mu = mu
        self._best = int(np.argmax(mu))
        self.name = name or f"bernoulli{mu.size}"

    def arms(self) -> int:
        return self.mu.size

    def best_arm(self) -> int:
        return self._best

    def duel(self, a: int, b: int, t: int, rng: np.random.Generator) -> DuelFeedback:
        k = self.mu.size
        _check_arm(a, k)
        _check_arm(b, k)
        x = (rng.random(k) < self.mu).astype(np.float64)
        best = self._best
        psi = float(x[a] - x[b])
        regret = (2.0 * float(x[best]) - float(x[a]) - float(x[b])) / 2.0
        return DuelFeedback(psi=psi, regret=regret, hit=a == best and b == best)

    def duel_many(self, a: int, b: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """Vectorized feedback draws for Monte-Carlo measurement of p[a, b]."""
        k = self.mu.size
        _check_arm(a, k)
        _check_arm(b, k)
        x = (rng.random((n, k)) < self.mu).astype(np.float64)
        return x[:, a] - x[:, b]


class AdversarialEnvironment:
    """Fixed reward sequence; regret is measured against the arm that is
    best in hindsight over the whole sequence, so single steps can have
    negative regret."""

    def __init__(self, rewards: np.ndarray, name: str | None = None):
        rewards = np.ascontiguousarray(rewards, dtype=np.float64)
        if rewards.ndim != 2 or rewards.shape[1] < 2:
            raise TooFewArmsError(f"need a (T, k>=2) reward array, got shape {rewards.shape}")
        if (~np.isfinite(rewards) | (rewards < 0.0) | (rewards > 1.0)).any():
            raise EntryOutOfRangeError("adversarial rewards must lie in [0, 1]")
        self.rewards = rewards
        self.horizon = rewards.shape[0]
        self._best = int(np.argmax(rewards.sum(axis=0)))
        self.name = name or f"adversarial{self.horizon}x{rewards.shape[1]}"

    def arms(self) -> int:
        return self.rewards.shape[1]

    def best_arm(self) -> int:
        return self._best

    def duel(self, a: int, b: int, t: int, rng: np.random.Generator) -> DuelFeedback:
        k = self.rewards.shape[1]
        _check_arm(a, k)
        _check_arm(b, k)
        if not 1 <= t <= self.horizon:
            raise StepOutOfRangeError(f"step {t} outside [1, {self.horizon}]")
        x = self.rewards[t - 1]
        best = self._best
        psi = float(x[a] - x[b])
        regret = (2.0 * float(x[best]) - float(x[a]) - float(x[b])) / 2.0
        return DuelFeedback(psi=psi, regret=regret, hit=a == best and b == best)


def drift_delta(k: int, t: int) -> float:
    """Drift of the moving arm at step t: min(1/2, sqrt(k ln t / t))."""
    if t < 1:
        raise StepOutOfRangeError(f"step {t} must be >= 1")
    return min(0.5, math.sqrt(k * math.log(t) / t))


class NonstationaryEnvironment:
    """Bernoulli rewards where arm 0 starts far ahead and decays toward the
    pack: mean 1/2 + drift_delta(k, t) against 1/2 for everyone else."""

    def __init__(self, k: int, name: str | None = None):
        if k < 2:
            raise TooFewArmsError(f"need at least 2 arms, got {k}")
        self.k = k
        self.name = name or f"drift{k}"

    def arms(self) -> int:
        return self.k

    def best_arm(self) -> int:
        return 0

    def duel(self, a: int, b: int, t: int, rng: np.random.Generator) -> DuelFeedback:
        k = self.k
        _check_arm(a, k)
        _check_arm(b, k)
        delta = drift_delta(k, t)
        u = rng.random(k)
        x = (u < 0.5).astype(np.float64)
        x[0] = 1.0 if u[0] < 0.5 + delta else 0.0
        psi = float(x[a] - x[b])
        regret = (2.0 * float(x[0]) - float(x[a]) - float(x[b])) / 2.0
        return DuelFeedback(psi=psi, regret=regret, hit=a == 0 and b == 0)


def save_sequence_csv(rewards: np.ndarray, path: str | Path) -> None:
    """Adversarial reward sequence as plain CSV, one step per row."""
    rewards = np.asarray(rewards, dtype=np.float64)
    lines = [",".join(f"{x:.12g}" for x in row) for row in rewards]
    Path(path).write_text("\n".join(lines) + "\n")


def load_sequence_csv(path: str | Path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DuelbenchError(f"cannot parse reward sequence CSV {path}: {exc}") from exc
