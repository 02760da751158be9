"""Baseline policies the harness compares against.

EXP3 is the classical exponential-weight bandit on absolute rewards in
[0, 1]. Sparring runs two independent EXP3 instances, one choosing the left
arm of each duel and one the right, and converts the relative feedback into
per-side rewards (1 + psi)/2 and (1 - psi)/2. The random policy pulls
uniform independent pairs and learns nothing.

The same numerical discipline as the core algorithm applies (max-normalized
mixtures, sequential sums, libm exponentials, one uniform per sampled arm),
so the compiled kernel can replay these policies bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArmOutOfRangeError, TooFewArmsError
from .rex3 import maybe_renormalize, sample_index


@dataclass
class Exp3State:
    k: int
    gamma_e: float
    weights: np.ndarray


def default_exp3_gamma(k: int, horizon: int) -> float:
    """Classic fixed-horizon tuning sqrt(k ln k / ((e-1) g)), clamped to 1."""
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    return min(1.0, math.sqrt(k * math.log(k) / ((math.e - 1.0) * horizon)))


def exp3_init(k: int, gamma_e: float) -> Exp3State:
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    if not (0.0 < gamma_e <= 1.0) or not math.isfinite(gamma_e):
        raise ValueError(f"gamma_e must lie in (0, 1], got {gamma_e!r}")
    return Exp3State(k=k, gamma_e=gamma_e, weights=np.ones(k))


def _exp3_mixture(state: Exp3State) -> tuple[np.ndarray, np.ndarray]:
    v = state.weights / state.weights.max()
    total = np.cumsum(v)[-1]
    p = (1.0 - state.gamma_e) * (v / total) + state.gamma_e / state.k
    return p, np.cumsum(p)


def exp3_distribution(state: Exp3State) -> np.ndarray:
    p, _ = _exp3_mixture(state)
    return p


def exp3_select(state: Exp3State, rng: np.random.Generator) -> int:
    _, cs = _exp3_mixture(state)
    return sample_index(cs, rng.random())


def exp3_update(state: Exp3State, arm: int, reward: float) -> None:
    """Importance-weighted exponential bump for the pulled arm."""
    if not 0 <= arm < state.k:
        raise ArmOutOfRangeError(f"arm {arm} outside [0, {state.k})")
    if not math.isfinite(reward) or not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward must lie in [0, 1], got {reward!r}")
    p, _ = _exp3_mixture(state)
    state.weights[arm] = float(state.weights[arm]) * math.exp(
        state.gamma_e * reward / (state.k * p[arm])
    )
    maybe_renormalize(state.weights)


class SparringPolicy:
    """Two EXP3 learners facing each other across the duel."""

    def __init__(self, k: int, horizon: int, gamma_e: float | None = None):
        if gamma_e is None:
            gamma_e = default_exp3_gamma(k, horizon)
        self.left = exp3_init(k, gamma_e)
        self.right = exp3_init(k, gamma_e)

    def arms(self) -> int:
        return self.left.k

    def select_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        a = exp3_select(self.left, rng)
        b = exp3_select(self.right, rng)
        return a, b

    def update(self, a: int, b: int, psi: float) -> None:
        exp3_update(self.left, a, (1.0 + psi) / 2.0)
        exp3_update(self.right, b, (1.0 - psi) / 2.0)


class RandomPolicy:
    """Uniform independent pairs; the do-nothing control."""

    def __init__(self, k: int):
        if k < 2:
            raise TooFewArmsError(f"need at least 2 arms, got {k}")
        self.k = k

    def arms(self) -> int:
        return self.k

    def select_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        a = min(int(rng.random() * self.k), self.k - 1)
        b = min(int(rng.random() * self.k), self.k - 1)
        return a, b

    def update(self, a: int, b: int, psi: float) -> None:
        pass
