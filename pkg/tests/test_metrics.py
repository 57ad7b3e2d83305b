import math

import numpy as np
import pytest

from vegascore.metrics import (
    kendall_tau,
    kendall_tau_top5,
    oracle,
    ranking_metrics,
    top1_accuracy,
    top5_recall,
)


def sign(x):
    return 0.0 if x == 0 else math.copysign(1.0, x)


def tau_direct(acc, scores):
    """Pair-enumeration oracle for the tau-a correlation."""
    m = len(acc)
    total = sum(
        sign(acc[i] - acc[j]) * sign(scores[i] - scores[j])
        for i in range(m)
        for j in range(i + 1, m)
    )
    return 2.0 * total / (m * (m - 1))


def top5_direct(values):
    """Set oracle: five best values, ties to the lower index."""
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    return set(order[:5])


class TestTop5Recall:
    def test_identical_rankings(self):
        vals = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3]
        assert top5_recall(vals, vals) == 1.0

    def test_disjoint(self):
        acc = [9, 8, 7, 6, 5, 0, 0, 0, 0, 0]
        scores = [0, 0, 0, 0, 0, 5, 6, 7, 8, 9]
        assert top5_recall(acc, scores) == 0.0

    def test_three_of_five_overlap(self):
        acc = [10, 9, 8, 7, 6, 5, 4, 3]
        scores = [0, 0, 3, 4, 5, 2, 1, 0]  # predicted top5 = {2,3,4,5,6}
        assert top5_recall(acc, scores) == pytest.approx(0.6)

    def test_too_few_models(self):
        with pytest.raises(ValueError):
            top5_recall([1, 2, 3, 4], [1, 2, 3, 4])

    def test_matches_set_oracle(self, rng):
        for _ in range(200):
            m = int(rng.integers(5, 13))
            acc = rng.integers(0, 6, size=m).astype(float)  # ties likely
            scores = rng.integers(0, 6, size=m).astype(float)
            expected = len(top5_direct(acc) & top5_direct(scores)) / 5.0
            assert top5_recall(acc, scores) == expected


class TestKendallTau:
    def test_identity(self):
        vals = [0.1, 0.5, 0.3, 0.9]
        assert kendall_tau(vals, vals) == 1.0

    def test_reversal(self):
        acc = [1.0, 2.0, 3.0, 4.0]
        assert kendall_tau(acc, acc[::-1]) == -1.0

    def test_one_discordant_pair(self):
        acc = [0.85, 0.80, 0.72, 0.40]
        scores = [0.9, 0.7, 0.8, 0.1]
        assert kendall_tau(acc, scores) == pytest.approx((5 - 1) / 6)

    def test_matches_bruteforce_with_ties(self, rng):
        for _ in range(300):
            m = int(rng.integers(2, 8))
            acc = rng.integers(0, 4, size=m).astype(float)
            scores = rng.integers(0, 4, size=m).astype(float)
            assert kendall_tau(acc, scores) == tau_direct(acc, scores)

    def test_monotone_transform_invariance(self, rng):
        acc = rng.standard_normal(12)
        scores = rng.standard_normal(12)
        warped = np.exp(3.0 * scores) + 7.0
        assert kendall_tau(acc, scores) == kendall_tau(acc, warped)

    def test_negation_antisymmetry(self, rng):
        acc = rng.standard_normal(10)
        scores = rng.standard_normal(10)  # continuous, no ties
        assert kendall_tau(acc, -scores) == -kendall_tau(acc, scores)

    def test_too_few(self):
        with pytest.raises(ValueError):
            kendall_tau([1.0], [1.0])


class TestKendallTauTop5:
    def test_single_shared_model_is_zero(self):
        acc = [10, 9, 8, 7, 6, 0, 0, 0, 0, 0]
        scores = [0, 0, 0, 0, 1, 5, 4, 3, 2, 0]  # predicted top5 = {4,5,6,7,8}
        assert kendall_tau_top5(acc, scores) == 0.0

    def test_identical_rankings(self):
        vals = [0.9, 0.8, 0.7, 0.6, 0.5, 0.1]
        assert kendall_tau_top5(vals, vals) == 1.0

    def test_two_shared_reversed(self):
        acc = [9, 8, 7, 6, 5, 0, 0, 0, 0, 0]
        scores = [0, 0, 0, 3, 4, 5, 2, 1, 0, 0]  # predicted top5 = {3,4,5,6,7}
        # F5 = {3, 4}: truth has 3 above 4, prediction reverses them
        assert kendall_tau_top5(acc, scores) == -1.0

    def test_restricted_to_intersection(self, rng):
        for _ in range(200):
            m = int(rng.integers(5, 13))
            acc = rng.integers(0, 8, size=m).astype(float)
            scores = rng.integers(0, 8, size=m).astype(float)
            shared = sorted(top5_direct(acc) & top5_direct(scores))
            if len(shared) < 2:
                expected = 0.0
            else:
                k = len(shared)
                total = sum(
                    sign(acc[i] - acc[j]) * sign(scores[i] - scores[j])
                    for ai, i in enumerate(shared)
                    for j in shared[ai + 1 :]
                )
                expected = 2.0 * total / (k * (k - 1))
            assert kendall_tau_top5(acc, scores) == expected


class TestTop1AndOracle:
    def test_argmax_lookup(self):
        assert top1_accuracy([0.3, 0.8], [0.1, 0.9]) == 0.8

    def test_tie_goes_low(self):
        assert top1_accuracy([0.3, 0.8], [0.5, 0.5]) == 0.3

    def test_single_model(self):
        assert top1_accuracy([0.42], [7.0]) == 0.42

    def test_oracle_values(self):
        assert oracle([0.3, 0.8, 0.5]) == 0.8
        assert oracle([0.4, 0.4]) == 0.4
        assert oracle([0.1]) == 0.1

    def test_top1_never_exceeds_oracle(self, rng):
        for _ in range(100):
            m = int(rng.integers(1, 15))
            acc = rng.random(m)
            scores = rng.random(m)
            assert top1_accuracy(acc, scores) <= oracle(acc)


class TestRankingMetrics:
    def test_bundles_all_five(self, rng):
        acc = rng.random(9)
        scores = rng.random(9)
        m = ranking_metrics(acc, scores)
        assert m.r5 == top5_recall(acc, scores)
        assert m.tau == kendall_tau(acc, scores)
        assert m.tau5 == kendall_tau_top5(acc, scores)
        assert m.top1_acc == top1_accuracy(acc, scores)
        assert m.oracle == oracle(acc)
        assert set(m.as_dict()) == {"r5", "tau5", "tau", "top1_acc", "oracle"}
