"""Timing comparison of the compiled and pure-Python simulation cores.

Runs identically seeded workloads through both backends, checks that the
outputs agree bit for bit, and reports throughput plus the speedup. The
pure-Python core is the reference implementation; the compiled one exists
only to make the desk-scale protocols cheap, so any divergence here is a
bug, not a tolerance question.

Usage:
    python3 benchmarks/bench_kernels.py [--horizon N] [--repeats R]
"""

import argparse
import time

import numpy as np

from duelbench._kernels import EnvSpec, PolicySpec, have_compiled, simulate
from duelbench.baselines import default_exp3_gamma
from duelbench.prefmat import bvs_matrix, savage_matrix


def _bitgen(seed: int, run: int) -> np.random.PCG64:
    return np.random.PCG64(np.random.SeedSequence([seed, run]))


def _workloads(horizon: int):
    k = 20
    spar = default_exp3_gamma(k, horizon)
    yield (
        "rex3-adaptive / savage20",
        PolicySpec("rex3", gamma_mode="adaptive"),
        EnvSpec("matrix", k=k, istar=0, matrix=savage_matrix(k).p),
    )
    yield (
        "rex3-g0.1 / bvs20",
        PolicySpec("rex3", gamma=0.1),
        EnvSpec("matrix", k=k, istar=0, matrix=bvs_matrix(k).p),
    )
    yield (
        "sparring / drift10",
        PolicySpec("sparring", gamma_e=spar),
        EnvSpec("drift", k=10, istar=0),
    )
    yield (
        "random / utilities5",
        PolicySpec("random"),
        EnvSpec("utility", k=5, istar=0, mu=np.linspace(0.9, 0.1, 5)),
    )


def _time_one(policy, env, horizon, checkpoints, seed, backend, repeats):
    best = float("inf")
    data = None
    for rep in range(repeats):
        bg = _bitgen(seed, 0)
        t0 = time.perf_counter()
        data = simulate(policy, env, horizon, checkpoints, bg, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, data


def _same(lhs, rhs) -> bool:
    if lhs.final_regret != rhs.final_regret or lhs.final_hits != rhs.final_hits:
        return False
    if not np.array_equal(lhs.cum_regret, rhs.cum_regret):
        return False
    if (lhs.final_weights is None) != (rhs.final_weights is None):
        return False
    if lhs.final_weights is not None and not np.array_equal(
        lhs.final_weights, rhs.final_weights
    ):
        return False
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--horizon", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not have_compiled():
        print("compiled core not importable; nothing to compare against")
        return 1

    horizon = args.horizon
    checkpoints = np.array([horizon], dtype=np.int64)
    print(f"horizon={horizon}, best of {args.repeats} repeats per backend\n")
    header = f"{'workload':<26} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    diverged = False
    for idx, (name, policy, env) in enumerate(_workloads(horizon)):
        t_py, d_py = _time_one(policy, env, horizon, checkpoints, 7000 + idx, "python", 1)
        t_cy, d_cy = _time_one(
            policy, env, horizon, checkpoints, 7000 + idx, "compiled", args.repeats
        )
        tag = ""
        if not _same(d_py, d_cy):
            diverged = True
            tag = "  MISMATCH"
        print(
            f"{name:<26} {horizon / t_py:>10.0f}/s {horizon / t_cy:>10.0f}/s"
            f" {t_py / t_cy:>8.1f}x{tag}"
        )
    if diverged:
        print("\nbackends disagree on identical seeds; see tests/test_kernels.py")
        return 1
    print("\nall workloads bit-identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
