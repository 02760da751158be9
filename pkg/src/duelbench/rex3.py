"""Relative exponential-weight algorithm for adversarial dueling feedback.

The learner keeps one positive weight per arm and plays duels (a, b) drawn
independently from the gamma-mixed softmax of those weights. After observing
relative feedback psi = x_a - x_b it nudges the winner's weight up and the
loser's down by exp(+-(gamma/k) * psi / (2 p)), an importance-weighted update
built from the per-arm estimator in `regret_estimates`.

Numerical discipline, shared verbatim with the compiled kernel so that both
backends produce bit-identical runs:

- weights are canonicalized by their maximum before mixing, which makes the
  sampling distribution exactly invariant under renormalization;
- all reductions are sequential left-to-right sums;
- scalar transcendentals go through libm (math.exp / math.log / math.sqrt);
- one uniform variate is consumed per sampled arm via `rng.random()`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArmOutOfRangeError,
    NegativeTauError,
    TooFewArmsError,
    ZeroProbabilityError,
)

# Gain-spread constant of the tuning rule: e * gmax - (4 - e) * gmin.
E = math.e

# Exploration rate is capped at 1/2 whenever it is derived from a bound.
GAMMA_CAP = 0.5

# Weight renormalization band. Update factors are bounded by exp(1/2) per
# step, so checking after each update keeps every weight finite.
RENORM_UPPER = 1e100
RENORM_LOWER = 1e-100


@dataclass
class Rex3State:
    k: int
    gamma: float
    weights: np.ndarray
    t: int = 1


def init_state(k: int, gamma: float) -> Rex3State:
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    if not (0.0 < gamma <= 1.0) or not math.isfinite(gamma):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    return Rex3State(k=k, gamma=gamma, weights=np.ones(k), t=1)


def _check_arm(arm: int, k: int) -> None:
    if not 0 <= arm < k:
        raise ArmOutOfRangeError(f"arm {arm} outside [0, {k})")


def mixture_cumulative(weights: np.ndarray, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Sampling distribution and its running sums, scale-canonicalized.

    Dividing by the max weight first is what makes the distribution exactly
    invariant under weight renormalization (and under any rescaling that is
    computed exactly).
    """
    k = weights.shape[0]
    v = weights / weights.max()
    total = np.cumsum(v)[-1]
    p = (1.0 - gamma) * (v / total) + gamma / k
    return p, np.cumsum(p)


def distribution(state: Rex3State) -> np.ndarray:
    """Probability of pulling each arm: (1-gamma) softmax + gamma/k floor."""
    p, _ = mixture_cumulative(state.weights, state.gamma)
    return p


def sample_index(cumulative: np.ndarray, u: float) -> int:
    """First index whose running sum exceeds u; clamped to the last arm."""
    i = int(np.searchsorted(cumulative, u, side="right"))
    return min(i, cumulative.shape[0] - 1)


def select_pair(state: Rex3State, rng: np.random.Generator) -> tuple[int, int]:
    """Draw both duel arms independently (a == b is allowed, uninformative)."""
    _, cs = mixture_cumulative(state.weights, state.gamma)
    a = sample_index(cs, rng.random())
    b = sample_index(cs, rng.random())
    return a, b


def regret_estimates(a: int, b: int, p: np.ndarray, psi: float) -> np.ndarray:
    """Per-arm importance-weighted estimates built from one duel.

    Only the two pulled arms carry information: +psi/(2 p_a) for the first
    pull, -psi/(2 p_b) for the second. Averaged over pair draws this is an
    unbiased estimate of x_i - E[x], and its p-weighted sum is always zero.
    """
    k = p.shape[0]
    _check_arm(a, k)
    _check_arm(b, k)
    chat = np.zeros(k)
    if a != b:
        if p[a] == 0.0 or p[b] == 0.0:
            raise ZeroProbabilityError(f"pulled arm has zero probability: p[{a}]={p[a]}, p[{b}]={p[b]}")
        chat[a] = psi / (2.0 * p[a])
        chat[b] = -psi / (2.0 * p[b])
    return chat


def maybe_renormalize(weights: np.ndarray) -> bool:
    """Divide all weights by their max once the max leaves the safe band."""
    m = weights.max()
    if m > RENORM_UPPER or m < RENORM_LOWER:
        weights /= m
        return True
    return False


def update(state: Rex3State, a: int, b: int, psi: float) -> None:
    """Apply one duel's feedback in place and advance the step counter.

    A same-arm pull carries no information and changes no weight. Feedback
    must lie in [-1, 1].
    """
    _check_arm(a, state.k)
    _check_arm(b, state.k)
    if not math.isfinite(psi) or abs(psi) > 1.0:
        raise ValueError(f"relative feedback must lie in [-1, 1], got {psi!r}")
    if a != b:
        p, _ = mixture_cumulative(state.weights, state.gamma)
        g_over_k = state.gamma / state.k
        state.weights[a] = float(state.weights[a]) * math.exp(g_over_k * psi / (2.0 * p[a]))
        state.weights[b] = float(state.weights[b]) * math.exp(-(g_over_k * psi / (2.0 * p[b])))
        maybe_renormalize(state.weights)
    state.t += 1


def tau(gmax: float, gmin: float) -> float:
    """Gain-spread constant e * gmax - (4 - e) * gmin of the tuning rule."""
    value = E * gmax - (4.0 - E) * gmin
    if value < 0.0:
        raise NegativeTauError(
            f"gain spread is negative for gmax={gmax}, gmin={gmin}; clamp gamma to {GAMMA_CAP}"
        )
    return value


def optimal_gamma(k: int, tau_value: float) -> float:
    """Exploration rate minimizing the regret bound, capped at 1/2."""
    if k < 2:
        raise TooFewArmsError(f"need at least 2 arms, got {k}")
    if tau_value <= 0.0:
        return GAMMA_CAP
    return min(GAMMA_CAP, math.sqrt(k * math.log(k) / tau_value))


def adaptive_gamma_step(k: int, t: int, gmax_div: float = 2.0) -> float:
    """Anytime tuning: at step t the gain ceiling is estimated as t/gmax_div."""
    return optimal_gamma(k, tau(t / gmax_div, 0.0))


def snapshot(state: Rex3State) -> str:
    """Single-line full-precision state record for golden-trace tests."""
    w = ",".join(repr(float(x)) for x in state.weights)
    return f"k={state.k} gamma={state.gamma!r} t={state.t} w={w}"


def restore(text: str) -> Rex3State:
    fields = dict(part.split("=", 1) for part in text.strip().split(" "))
    weights = np.array([float(x) for x in fields["w"].split(",")])
    return Rex3State(
        k=int(fields["k"]),
        gamma=float(fields["gamma"]),
        weights=weights,
        t=int(fields["t"]),
    )


@dataclass(frozen=True)
class GammaSchedule:
    """How the exploration rate evolves over a run.

    kind "fixed" plays one value for the whole run; "optimal" resolves the
    bound-minimizing value once from the horizon (gain ceiling horizon/div);
    "adaptive" re-tunes from the elapsed step count before every pull.
    """

    kind: str
    gamma: float = 0.0
    gmax_div: float = 2.0

    @classmethod
    def fixed(cls, gamma: float) -> "GammaSchedule":
        return cls(kind="fixed", gamma=gamma)

    @classmethod
    def optimal(cls, gmax_div: float = 2.0) -> "GammaSchedule":
        return cls(kind="optimal", gmax_div=gmax_div)

    @classmethod
    def adaptive(cls, gmax_div: float = 2.0) -> "GammaSchedule":
        return cls(kind="adaptive", gmax_div=gmax_div)

    def resolve(self, k: int, horizon: int | None) -> float:
        """Initial exploration rate for a run of the given length."""
        if self.kind == "fixed":
            if not (0.0 < self.gamma <= 1.0):
                raise ValueError(f"fixed gamma must lie in (0, 1], got {self.gamma!r}")
            return self.gamma
        if self.kind == "optimal":
            if horizon is None:
                raise ValueError("optimal gamma schedule needs a horizon")
            return optimal_gamma(k, tau(horizon / self.gmax_div, 0.0))
        if self.kind == "adaptive":
            return adaptive_gamma_step(k, 1, self.gmax_div)
        raise ValueError(f"unknown schedule kind {self.kind!r}")


class Rex3Policy:
    """Stateful wrapper bundling the algorithm with a gamma schedule.

    Exposes the two-method surface the harness and the reduction drive:
    select_pair(rng) -> (a, b) and update(a, b, psi).
    """

    def __init__(self, k: int, schedule: GammaSchedule, horizon: int | None = None):
        self.schedule = schedule
        self.adaptive = schedule.kind == "adaptive"
        self.state = init_state(k, schedule.resolve(k, horizon))

    def arms(self) -> int:
        return self.state.k

    def select_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        if self.adaptive:
            self.state.gamma = adaptive_gamma_step(
                self.state.k, self.state.t, self.schedule.gmax_div
            )
        return select_pair(self.state, rng)

    def update(self, a: int, b: int, psi: float) -> None:
        update(self.state, a, b, psi)
