"""Pure-Python simulation loop, composed from the library's own objects.

This is the readable reference the compiled kernel must reproduce bit for
bit, so the draw order per step is a contract:

  1. policy draws (pair selection; adaptive re-tuning consumes nothing),
  2. environment draws (matrix: one uniform; utility/drift: k uniforms in
     ascending arm order; adversarial: none),
  3. update and bookkeeping (consume nothing).
"""

from __future__ import annotations

import numpy as np

from ._kernels import EnvSpec, PolicySpec, RunData
from .baselines import RandomPolicy, SparringPolicy
from .environments import (
    AdversarialEnvironment,
    MatrixEnvironment,
    NonstationaryEnvironment,
    UtilityEnvironment,
)
from .prefmat import PreferenceMatrix
from .rex3 import GammaSchedule, Rex3Policy


def build_policy(spec: PolicySpec, k: int, horizon: int):
    if spec.kind == "rex3":
        if spec.gamma_mode == "adaptive":
            schedule = GammaSchedule.adaptive(spec.gmax_div)
        else:
            schedule = GammaSchedule.fixed(spec.gamma)
        return Rex3Policy(k, schedule, horizon)
    if spec.kind == "sparring":
        return SparringPolicy(k, horizon, gamma_e=spec.gamma_e)
    if spec.kind == "random":
        return RandomPolicy(k)
    raise ValueError(f"unknown policy kind {spec.kind!r}")


def build_env(spec: EnvSpec):
    if spec.kind == "matrix":
        return MatrixEnvironment(PreferenceMatrix(spec.matrix))
    if spec.kind == "utility":
        return UtilityEnvironment(spec.mu)
    if spec.kind == "adversarial":
        return AdversarialEnvironment(spec.rewards)
    if spec.kind == "drift":
        return NonstationaryEnvironment(spec.k)
    raise ValueError(f"unknown environment kind {spec.kind!r}")


def _final_weights(policy) -> np.ndarray | None:
    if isinstance(policy, Rex3Policy):
        return policy.state.weights.copy()
    if isinstance(policy, SparringPolicy):
        return np.concatenate([policy.left.weights, policy.right.weights])
    return None


def simulate(
    policy_spec: PolicySpec,
    env_spec: EnvSpec,
    horizon: int,
    checkpoints: np.ndarray,
    bit_generator: np.random.BitGenerator,
) -> RunData:
    rng = np.random.Generator(bit_generator)
    env = build_env(env_spec)
    policy = build_policy(policy_spec, env_spec.k, horizon)

    n_cp = checkpoints.shape[0]
    cp_regret = np.empty(n_cp)
    cp_a = np.empty(n_cp, dtype=np.int32)
    cp_b = np.empty(n_cp, dtype=np.int32)
    cp_hit = np.empty(n_cp, dtype=np.uint8)
    cp_hit_count = np.empty(n_cp, dtype=np.int64)

    cum_regret = 0.0
    hits = 0
    ci = 0
    for t in range(1, horizon + 1):
        a, b = policy.select_pair(rng)
        fb = env.duel(a, b, t, rng)
        policy.update(a, b, fb.psi)
        cum_regret += fb.regret
        if fb.hit:
            hits += 1
        if ci < n_cp and t == checkpoints[ci]:
            cp_regret[ci] = cum_regret
            cp_a[ci] = a
            cp_b[ci] = b
            cp_hit[ci] = 1 if fb.hit else 0
            cp_hit_count[ci] = hits
            ci += 1

    return RunData(
        ts=checkpoints.copy(),
        cum_regret=cp_regret,
        arm_a=cp_a,
        arm_b=cp_b,
        hits=cp_hit,
        hit_counts=cp_hit_count,
        final_regret=cum_regret,
        final_hits=hits,
        final_weights=_final_weights(policy),
    )
