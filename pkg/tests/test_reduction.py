"""Dueling-to-classical reduction: pair pulls driven by a dueling policy."""

from __future__ import annotations

import numpy as np
import pytest

from duelbench import reduction, rex3
from duelbench.baselines import RandomPolicy
from duelbench.errors import ArmCountMismatchError, HorizonTooSmallError, MeanOutOfRangeError


class AlwaysPair:
    """Degenerate dueling policy pinned to one pair; for accounting tests."""

    def __init__(self, k, a, b):
        self.k, self.a, self.b = k, a, b

    def arms(self):
        return self.k

    def select_pair(self, rng):
        return self.a, self.b

    def update(self, a, b, psi):
        pass


class TestLoopShape:
    def test_even_horizon_exact_cover(self):
        bandit = reduction.BernoulliBandit(np.array([1.0, 0.0]))
        trace = reduction.run_reduction(AlwaysPair(2, 0, 0), bandit, 10, np.random.default_rng(0))
        assert trace.n_iterations == 5
        assert trace.classical_pulls == 10
        assert trace.classical_gain == 10.0
        assert np.all(trace.psi == 0.0)

    def test_odd_horizon_overshoots_one_pull(self):
        bandit = reduction.BernoulliBandit(np.array([1.0, 0.0]))
        trace = reduction.run_reduction(AlwaysPair(2, 0, 0), bandit, 11, np.random.default_rng(0))
        assert trace.n_iterations == 6
        assert trace.classical_pulls == 12

    def test_minimum_horizon(self):
        bandit = reduction.BernoulliBandit(np.array([0.5, 0.5]))
        trace = reduction.run_reduction(AlwaysPair(2, 0, 1), bandit, 2, np.random.default_rng(0))
        assert trace.n_iterations == 1
        with pytest.raises(HorizonTooSmallError):
            reduction.run_reduction(AlwaysPair(2, 0, 1), bandit, 1, np.random.default_rng(0))

    def test_arm_count_mismatch(self):
        bandit = reduction.BernoulliBandit(np.array([0.5, 0.5]))
        with pytest.raises(ArmCountMismatchError):
            reduction.run_reduction(AlwaysPair(3, 0, 1), bandit, 10, np.random.default_rng(0))

    def test_feedback_is_reward_difference(self):
        bandit = reduction.BernoulliBandit(np.array([1.0, 0.0]))
        trace = reduction.run_reduction(AlwaysPair(2, 0, 1), bandit, 6, np.random.default_rng(0))
        assert np.all(trace.reward_a == 1.0)
        assert np.all(trace.reward_b == 0.0)
        assert np.all(trace.psi == 1.0)


class TestAccounting:
    def test_gain_identity_random_traces(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            k = int(rng.integers(2, 6))
            mu = rng.random(k)
            bandit = reduction.BernoulliBandit(mu)
            pol = RandomPolicy(k)
            horizon = int(rng.integers(2, 400))
            trace = reduction.run_reduction(pol, bandit, horizon, rng)
            reduction.verify_gain_accounting(trace)
            assert trace.dueling_gain == trace.classical_gain / 2.0

    def test_accounting_catches_corruption(self):
        bandit = reduction.BernoulliBandit(np.array([1.0, 0.0]))
        trace = reduction.run_reduction(AlwaysPair(2, 0, 0), bandit, 10, np.random.default_rng(2))
        broken = reduction.ReductionTrace(
            a=trace.a,
            b=trace.b,
            reward_a=trace.reward_a,
            reward_b=trace.reward_b,
            psi=trace.psi,
            horizon=trace.horizon,
            classical_gain=trace.classical_gain + 1.0,
            dueling_gain=trace.dueling_gain,
        )
        with pytest.raises(ValueError):
            reduction.verify_gain_accounting(broken)


class TestBernoulliBandit:
    def test_validates_means(self):
        with pytest.raises(MeanOutOfRangeError):
            reduction.BernoulliBandit(np.array([0.5, 1.1]))

    def test_reward_frequency(self):
        bandit = reduction.BernoulliBandit(np.array([0.3, 0.9]))
        rng = np.random.default_rng(3)
        n = 10**5
        mean = sum(bandit.get_reward(1, rng) for _ in range(n)) / n
        assert abs(mean - 0.9) < 0.005

    def test_one_uniform_per_pull(self):
        bandit = reduction.BernoulliBandit(np.array([0.3, 0.9]))
        r1 = np.random.default_rng(4)
        bandit.get_reward(0, r1)
        r2 = np.random.default_rng(4)
        r2.random()
        assert r1.random() == r2.random()


class TestLearningThroughReduction:
    def test_rex3_gets_sublinear_classical_regret(self):
        mu = np.array([0.8, 0.5, 0.5, 0.35])
        short, long_ = 2000, 8000
        regs = {}
        for horizon in (short, long_):
            totals = []
            for run in range(8):
                rng = np.random.default_rng([97, run])
                pol = rex3.Rex3Policy(4, rex3.GammaSchedule.adaptive())
                trace = reduction.run_reduction(pol, reduction.BernoulliBandit(mu), horizon, rng)
                totals.append(reduction.pseudo_regret(trace, mu))
            regs[horizon] = float(np.mean(totals))
        # linear growth would quadruple the regret; sqrt-like growth doubles it
        assert regs[long_] < 3.0 * regs[short]
        assert regs[long_] > 0.0


class TestTraceCsv:
    def test_round_trip_format(self, tmp_path):
        bandit = reduction.BernoulliBandit(np.array([0.9, 0.1]))
        trace = reduction.run_reduction(AlwaysPair(2, 0, 1), bandit, 8, np.random.default_rng(5))
        path = tmp_path / "trace.csv"
        reduction.save_trace_csv(trace, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iteration,a,b,reward_a,reward_b,feedback"
        assert len(lines) == 1 + trace.n_iterations
        first = lines[1].split(",")
        assert first[0] == "1" and first[1] == "0" and first[2] == "1"
