"""Simulation-loop backends and the import-time dispatch between them.

A full run (policy x environment x horizon) is one long sequential loop that
dominates experiment runtime, so it is implemented twice: a compiled Cython
kernel and a pure-Python twin built directly from the library's policy and
environment objects. Both consume the same PCG64 stream through the same
draw order and the same floating-point operation order, and are required to
produce bit-identical results; the test suite enforces that and
benchmarks/bench_kernels.py measures the gap.

Backend choice: the compiled kernel when the extension imported cleanly,
the Python twin otherwise. DUELBENCH_BACKEND=python|compiled overrides.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ArmCountMismatchError, HorizonTooSmallError, StepOutOfRangeError

try:
    from . import _kernels_cy

    _HAVE_COMPILED = True
except ImportError:
    _kernels_cy = None
    _HAVE_COMPILED = False

_POLICY_CODES = {"rex3": 0, "sparring": 1, "random": 2}
_ENV_CODES = {"matrix": 0, "utility": 1, "adversarial": 2, "drift": 3}


@dataclass(frozen=True)
class PolicySpec:
    """Plain-data policy description both backends can consume.

    For the core algorithm, gamma_mode is "fixed" (gamma holds the value,
    already resolved if it came from the horizon-tuned rule) or "adaptive"
    (re-tuned every step from gmax_div). Sparring needs its resolved
    exploration rate in gamma_e.
    """

    kind: str
    gamma_mode: str = "fixed"
    gamma: float = 0.5
    gmax_div: float = 2.0
    gamma_e: float = 0.1


@dataclass(frozen=True)
class EnvSpec:
    """Plain-data environment description; unused fields stay None."""

    kind: str
    k: int
    istar: int
    matrix: np.ndarray | None = None
    mu: np.ndarray | None = None
    rewards: np.ndarray | None = None


@dataclass(frozen=True)
class RunData:
    """Checkpoint samples plus end-of-run state of one simulated run."""

    ts: np.ndarray
    cum_regret: np.ndarray
    arm_a: np.ndarray
    arm_b: np.ndarray
    hits: np.ndarray
    hit_counts: np.ndarray
    final_regret: float
    final_hits: int
    final_weights: np.ndarray | None


def have_compiled() -> bool:
    return _HAVE_COMPILED


def backend_name(backend: str | None = None) -> str:
    """Resolve the requested or default backend to 'compiled' or 'python'."""
    if backend is None:
        backend = os.environ.get("DUELBENCH_BACKEND")
    if backend is None:
        return "compiled" if _HAVE_COMPILED else "python"
    if backend not in ("compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "compiled" and not _HAVE_COMPILED:
        raise RuntimeError("compiled kernel requested but the extension is not importable")
    return backend


def _validate(policy: PolicySpec, env: EnvSpec, horizon: int, checkpoints: np.ndarray) -> None:
    if policy.kind not in _POLICY_CODES:
        raise ValueError(f"unknown policy kind {policy.kind!r}")
    if env.kind not in _ENV_CODES:
        raise ValueError(f"unknown environment kind {env.kind!r}")
    if horizon < 1:
        raise HorizonTooSmallError(f"horizon must be >= 1, got {horizon}")
    if env.kind == "adversarial" and horizon > env.rewards.shape[0]:
        raise StepOutOfRangeError(
            f"horizon {horizon} exceeds the {env.rewards.shape[0]}-step reward sequence"
        )
    if env.kind == "matrix" and env.matrix.shape[0] != env.k:
        raise ArmCountMismatchError(
            f"matrix has {env.matrix.shape[0]} arms, spec says {env.k}"
        )
    if checkpoints.size == 0 or checkpoints[0] < 1 or checkpoints[-1] != horizon:
        raise ValueError("checkpoint grid must be nonempty, start >= 1, end at the horizon")


def simulate(
    policy: PolicySpec,
    env: EnvSpec,
    horizon: int,
    checkpoints: np.ndarray,
    bit_generator: np.random.BitGenerator,
    backend: str | None = None,
) -> RunData:
    """Run one full simulation on the selected backend."""
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    _validate(policy, env, horizon, checkpoints)
    if backend_name(backend) == "compiled":
        empty2 = np.empty((0, 0))
        empty1 = np.empty(0)
        out = _kernels_cy.simulate(
            _POLICY_CODES[policy.kind],
            float(policy.gamma),
            1 if policy.gamma_mode == "adaptive" else 0,
            float(policy.gmax_div),
            float(policy.gamma_e),
            _ENV_CODES[env.kind],
            int(env.k),
            int(env.istar),
            np.ascontiguousarray(env.matrix) if env.matrix is not None else empty2,
            np.ascontiguousarray(env.mu) if env.mu is not None else empty1,
            np.ascontiguousarray(env.rewards) if env.rewards is not None else empty2,
            int(horizon),
            checkpoints,
            bit_generator,
        )
        return RunData(ts=checkpoints.copy(), **out)
    from . import _kernels_py

    return _kernels_py.simulate(policy, env, horizon, checkpoints, bit_generator)
