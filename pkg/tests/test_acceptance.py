"""Acceptance gate: one test per shipped claim, exact protocol and scale.

Each test prints a single summary line with the measured quantity and its
threshold, then asserts. Criteria 1-7 are exact or near-exact numerical
identities; 8-13 are seeded desk-scale statistical reproductions; 14 is
the byte-level determinism contract.
"""

import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from duelbench import rex3
from duelbench.baselines import RandomPolicy
from duelbench.environments import UtilityEnvironment
from duelbench.harness import (
    PRESETS,
    REDUCTION_PRESETS,
    ExperimentConfig,
    gamma_sweep,
    run_experiment,
    run_reduction_experiment,
)
from duelbench.metrics import condorcet_regret, corollary2_bound
from duelbench.prefmat import bvs_matrix, preference_from_utilities
from duelbench.reduction import BernoulliBandit, run_reduction, verify_gain_accounting


def _report(num: int, label: str, ok: bool, detail: str) -> None:
    print(f"[criterion {num:02d}] {label}: {detail} -> {'PASS' if ok else 'FAIL'}")


def _state(weights, gamma):
    s = rex3.init_state(len(weights), gamma)
    s.weights[:] = np.asarray(weights, dtype=np.float64)
    return s


def test_criterion_01_estimator_unbiased_exhaustive():
    """1000 random (weights, gamma, x) triples, K in {2,3,5,8}: enumerating
    all K^2 pairs, the pair-weighted estimate equals x_i - E[x] per arm."""
    rng = np.random.default_rng(1001)
    started = time.perf_counter()
    worst = 0.0
    for trial in range(1000):
        k = (2, 3, 5, 8)[trial % 4]
        s = _state(rng.random(k) + 0.05, float(rng.uniform(0.05, 1.0)))
        p = rex3.distribution(s)
        x = rng.random(k)
        acc = np.zeros(k)
        for a in range(k):
            for b in range(k):
                acc += p[a] * p[b] * rex3.regret_estimates(a, b, p, x[a] - x[b])
        expect = x - float(np.dot(p, x))
        worst = max(worst, float(np.max(np.abs(acc - expect))))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-12 and elapsed < 1.0
    _report(
        1,
        "estimator unbiasedness (exhaustive)",
        ok,
        f"max|err|={worst:.3e} (tol 1e-12), {elapsed:.2f}s (limit 1s)",
    )
    assert ok


def test_criterion_02_weighted_estimate_sums_to_zero():
    """10^5 realized duels, each on a fresh random state: the probability-
    weighted sum of the per-arm estimates vanishes."""
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(10**5):
        k = int(rng.integers(2, 9))
        s = _state(rng.random(k) + 0.05, float(rng.uniform(0.05, 1.0)))
        p, cs = rex3.mixture_cumulative(s.weights, s.gamma)
        a = rex3.sample_index(cs, rng.random())
        b = rex3.sample_index(cs, rng.random())
        psi = 0.0 if a == b else float(rng.uniform(-1.0, 1.0))
        chat = rex3.regret_estimates(a, b, p, psi)
        worst = max(worst, abs(float(np.dot(p, chat))))
    ok = worst <= 1e-12
    _report(2, "zero-mean identity", ok, f"max|sum p_i c_i|={worst:.3e} (tol 1e-12)")
    assert ok


def test_criterion_03_second_moment_identity():
    """Exhaustive expectation of M2 = (1/K) sum_i p_i c_i^2 equals
    E(x_a^2)/2 - E(x_a) mean(x) + sum(x^2)/(2K) over 1000 random triples."""
    rng = np.random.default_rng(1003)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(2, 9))
        s = _state(rng.random(k) + 0.05, float(rng.uniform(0.05, 1.0)))
        p = rex3.distribution(s)
        x = rng.random(k)
        m2 = 0.0
        for a in range(k):
            for b in range(k):
                chat = rex3.regret_estimates(a, b, p, x[a] - x[b])
                m2 += p[a] * p[b] * float(np.dot(p, chat * chat)) / k
        expect = (
            0.5 * float(np.dot(p, x * x))
            - float(np.dot(p, x)) * float(np.mean(x))
            + float(np.sum(x * x)) / (2.0 * k)
        )
        worst = max(worst, abs(m2 - expect))
    ok = worst <= 1e-10
    _report(3, "second-moment identity", ok, f"max|err|={worst:.3e} (tol 1e-10)")
    assert ok


def test_criterion_04_distribution_scale_invariance_exact():
    """Scaling all weights by c in {1e-90, 1, 1e90} leaves the sampling
    distribution bit-identical, including when the rescaled weights cross
    the renormalization band."""
    rng = np.random.default_rng(1004)
    cases = [
        np.ldexp(1.0, rng.integers(-20, 20, size=9)),  # band never crossed
        np.ldexp(1.0, np.arange(0, 41, 5)),  # 1e90 scaling crosses 1e100
        np.ldexp(1.0, np.arange(-60, -34, 3)),  # 1e-90 scaling crosses 1e-100
    ]
    checked = 0
    for w in cases:
        base = rex3.distribution(_state(w, 0.23))
        for c in (1e-90, 1.0, 1e90):
            s = _state(c * w, 0.23)
            rex3.maybe_renormalize(s.weights)
            scaled = rex3.distribution(s)
            assert np.array_equal(scaled, base), (w, c)
            checked += 1
    ok = checked == 9
    _report(4, "scale invariance (exact)", ok, f"{checked}/9 scalings bit-identical")
    assert ok


def test_criterion_05_tuned_bound_identity():
    """At the unclamped tuned rate the closed-form ceiling collapses to
    2 sqrt(K ln K tau); 100 random (K, gain-spread) draws, rel err 1e-9."""
    rng = np.random.default_rng(1005)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 500))
        klnk = k * math.log(k)
        gmin = float(rng.uniform(0.0, 50.0))
        # keep the tuned rate strictly below the 1/2 cap
        target = 4.2 * klnk * float(10.0 ** rng.uniform(0.1, 4.0))
        gmax = (target + (4.0 - math.e) * gmin) / math.e
        tau_v = rex3.tau(gmax, gmin)
        gstar = rex3.optimal_gamma(k, tau_v)
        assert gstar < 0.5
        bound = corollary2_bound(k, gstar, gmax, gmin)
        closed = 2.0 * math.sqrt(klnk * tau_v)
        worst = max(worst, abs(bound - closed) / closed)
    ok = worst <= 1e-9
    _report(5, "tuned bound identity", ok, f"max rel err={worst:.3e} (tol 1e-9)")
    assert ok


def test_criterion_06_bvs_borda_values():
    borda = bvs_matrix(20).borda_scores()
    err0 = abs(float(borda[0]) - 9.69)
    err1 = abs(float(borda[1]) - 18.49)
    ok = err0 <= 1e-12 and err1 <= 1e-12
    _report(
        6,
        "near-winner Borda scores",
        ok,
        f"|b0-9.69|={err0:.2e}, |b1-18.49|={err1:.2e} (tol 1e-12)",
    )
    assert ok


def test_criterion_07_reduction_gain_accounting():
    """100 random traces: classical gain is exactly twice the dueling gain
    and the step counter advances by 2 per iteration (ceil(T/2) total)."""
    rng_cfg = np.random.default_rng(1007)
    checked = 0
    for _ in range(100):
        k = int(rng_cfg.integers(2, 7))
        mu = rng_cfg.random(k)
        horizon = int(rng_cfg.integers(2, 300))
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([1007, checked]))
        )
        trace = run_reduction(RandomPolicy(k), BernoulliBandit(mu), horizon, rng)
        verify_gain_accounting(trace)
        assert trace.n_iterations == (horizon + 1) // 2
        assert trace.a.shape[0] == trace.n_iterations
        checked += 1
    ok = checked == 100
    _report(7, "reduction gain accounting", ok, f"{checked}/100 traces exact")
    assert ok


def test_criterion_08_swept_rates_stay_under_halved_bound(tmp_path):
    """Strong-separation 30-arm tournament, T=10^4, 50 runs per rate: the
    measured mean regret sits below the halved conservative ceiling at
    every swept exploration rate."""
    started = time.perf_counter()
    config = replace(PRESETS["fig1-sweep"], out_dir=str(tmp_path))
    rows = gamma_sweep(config, [0.05, 0.1, 0.2, 0.4, "optimal"], write_csv=False)
    elapsed = time.perf_counter() - started
    margins = [(r.label, r.mean_regret, r.bound_conservative) for r in rows]
    ok = all(m <= b for _, m, b in margins) and elapsed < 30.0
    detail = ", ".join(f"{l}: {m:.0f}<={b:.0f}" for l, m, b in margins)
    _report(8, "bound validation sweep", ok, f"{detail}; {elapsed:.1f}s (limit 30s)")
    assert ok


def test_criterion_09_sqrt_growth_of_anytime_regret():
    """Anytime-tuned play on the 10-arm tournament: quadrupling the horizon
    roughly doubles the regret (ratio within [1.5, 2.7])."""
    config = ExperimentConfig(
        name="sqrt",
        env="savage",
        k=10,
        policies=("rex3:adaptive",),
        horizon=40_000,
        runs=50,
        seed=1009,
        checkpoints=(10_000, 40_000),
    )
    curve = run_experiment(config, write_csv=False)[0].curve
    ratio = float(curve.mean[-1] / curve.mean[0])
    ok = 1.5 <= ratio <= 2.7
    _report(9, "square-root regret growth", ok, f"ratio={ratio:.3f} in [1.5, 2.7]")
    assert ok


def test_criterion_10_beats_random_by_half():
    config = ExperimentConfig(
        name="vsrand",
        env="savage",
        k=10,
        policies=("rex3:optimal", "random"),
        horizon=10_000,
        runs=50,
        seed=1010,
    )
    results = {r.policy_id: float(r.curve.mean[-1]) for r in run_experiment(config, write_csv=False)}
    ok = results["rex3-gopt"] < 0.5 * results["random"]
    _report(
        10,
        "tuned play beats uniform play",
        ok,
        f"{results['rex3-gopt']:.1f} < 0.5 x {results['random']:.1f}",
    )
    assert ok


def test_criterion_11_beats_sparring_on_near_tie_tournament():
    """20-arm tournament whose winner leads by 0.01, T=10^5, 20 runs:
    anytime-tuned play stays within 1.1x of the two-learner baseline."""
    config = ExperimentConfig(
        name="vsspar",
        env="bvs",
        k=20,
        policies=("rex3:adaptive", "sparring"),
        horizon=100_000,
        runs=20,
        seed=1011,
    )
    results = {r.policy_id: float(r.curve.mean[-1]) for r in run_experiment(config, write_csv=False)}
    ok = results["rex3-adaptive"] <= 1.1 * results["sparring"]
    _report(
        11,
        "anytime play vs two-learner baseline",
        ok,
        f"{results['rex3-adaptive']:.1f} <= 1.1 x {results['sparring']:.1f}",
    )
    assert ok


def test_criterion_12_utility_matrix_consistency():
    """Bernoulli means (0.8, 0.6, 0.4, 0.2): the empirical win-plus-half-tie
    rate over 10^6 duels matches the induced matrix within 4 sigma per
    pair, and the measured mean pair regret is twice the matrix regret."""
    mu = np.array([0.8, 0.6, 0.4, 0.2])
    pm = preference_from_utilities(mu)
    env = UtilityEnvironment(mu)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([1012, 0])))
    n = 10**6
    worst_z = 0.0
    for a in range(4):
        for b in range(a + 1, 4):
            psi = env.duel_many(a, b, n, rng)
            rate = float(np.mean(psi > 0) + 0.5 * np.mean(psi == 0))
            p_gt = mu[a] * (1.0 - mu[b])
            p_eq = mu[a] * mu[b] + (1.0 - mu[a]) * (1.0 - mu[b])
            var = (p_gt + 0.25 * p_eq) - pm.p[a, b] ** 2
            z = abs(rate - pm.p[a, b]) / math.sqrt(var / n)
            worst_z = max(worst_z, z)
    # realized pair regret of (2, 3) vs twice the matrix regret
    x = (rng.random((n, 4)) < mu).astype(np.float64)
    r = (2.0 * x[:, 0] - x[:, 2] - x[:, 3]) / 2.0
    target = 2.0 * condorcet_regret(pm, 2, 3)
    var_r = (4.0 * mu[0] * (1 - mu[0]) + mu[2] * (1 - mu[2]) + mu[3] * (1 - mu[3])) / 4.0
    z_r = abs(float(np.mean(r)) - target) / math.sqrt(var_r / n)
    ok = worst_z <= 4.0 and z_r <= 4.0
    _report(
        12,
        "utility and matrix views agree",
        ok,
        f"max pair z={worst_z:.2f}, pair-regret z={z_r:.2f} (limit 4)",
    )
    assert ok


def test_criterion_13_drifting_environment_sublinear_regret():
    """Decaying-lead environment, K=10, T=10^5: the per-step regret rate at
    T falls below half its value at T/10."""
    config = ExperimentConfig(
        name="drifty",
        env="drift",
        k=10,
        policies=("rex3:adaptive",),
        horizon=100_000,
        runs=20,
        seed=1013,
        checkpoints=(10_000, 100_000),
    )
    curve = run_experiment(config, write_csv=False)[0].curve
    early = float(curve.mean[0]) / 10_000.0
    late = float(curve.mean[-1]) / 100_000.0
    ok = late < 0.5 * early
    _report(
        13,
        "sublinear regret under drift",
        ok,
        f"rate(T)={late:.4f} < 0.5 x rate(T/10)={early:.4f}",
    )
    assert ok


def test_criterion_14_preset_reruns_are_byte_identical(tmp_path):
    """The shipped protocols, scaled down through their exposed knobs, must
    reproduce every output file byte for byte on a second run."""
    preset = replace(PRESETS["savage30"], horizon=2000, runs=3)
    run_experiment(replace(preset, out_dir=str(tmp_path / "a")))
    run_experiment(replace(preset, out_dir=str(tmp_path / "b")))
    files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    files_b = sorted(p.name for p in (tmp_path / "b").iterdir())
    assert files_a == files_b and len(files_a) == 3
    same = all(
        (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for name in files_a
    )
    red = replace(
        REDUCTION_PRESETS["lowerbound-reduction"],
        horizon=500,
        runs=3,
        out_dir=str(tmp_path / "ra"),
    )
    run_reduction_experiment(red)
    run_reduction_experiment(replace(red, out_dir=str(tmp_path / "rb")))
    red_name = "lowerbound-reduction_rex3.csv"
    same_red = (tmp_path / "ra" / red_name).read_bytes() == (
        tmp_path / "rb" / red_name
    ).read_bytes()
    ok = same and same_red
    _report(
        14,
        "byte-identical preset reruns",
        ok,
        f"{len(files_a)} experiment files + reduction file identical",
    )
    assert ok
