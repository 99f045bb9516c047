"""Choquet integral, sorted chains, usage counts and the Möbius oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.bags import Bag, BagSet
from src.choquet import (
    choquet_batch,
    choquet_integral,
    mobius_choquet_oracle,
    mobius_transform,
    sort_chain,
    sort_chains,
    usage_counts,
)
from src.errors import DimensionMismatch, MeasureError, RangeError
from src.measure import InitMode, build_measure, init_measure

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_pair(seed, m):
    rng = np.random.default_rng(seed)
    return init_measure(m, InitMode.COIN_FLIP, rng), rng.random(m)


def additive(weights):
    m = len(weights)
    return build_measure(m, [
        1.0 if mask == (1 << m) - 1 else sum(w for i, w in enumerate(weights) if mask >> i & 1)
        for mask in range(1, 1 << m)
    ])


class TestSortChain:
    def test_three_sensor_example(self):
        assert sort_chain([0.8, 0.2, 0.1]) == [0b001, 0b011, 0b111]

    def test_ties_by_ascending_index(self):
        assert sort_chain([0.5, 0.5]) == [0b01, 0b11]

    def test_unsorted_input(self):
        assert sort_chain([0.1, 0.9, 0.4]) == [0b010, 0b110, 0b111]

    def test_batch_gaps_telescope(self):
        x = np.random.default_rng(0).random((50, 4))
        ch = sort_chains(x)
        assert np.allclose(ch.gaps.sum(axis=1), x.max(axis=1))
        assert np.all(ch.masks[:, -1] == 0b1111)


class TestChoquetIntegral:
    def test_hand_example(self):
        g = build_measure(2, [0.5, 0.5, 1.0])
        assert choquet_integral(g, [0.8, 0.2]) == pytest.approx(0.5, abs=1e-15)

    def test_constant_instance(self):
        g, _ = random_pair(4, 5)
        assert abs(choquet_integral(g, [0.37] * 5) - 0.37) < 1e-12

    def test_max_and_min_operators(self):
        rng = np.random.default_rng(2)
        ones = build_measure(4, np.ones(15))
        zeros = build_measure(4, np.r_[np.zeros(14), 1.0])
        for x in rng.random((1000, 4)):
            assert abs(choquet_integral(ones, x) - x.max()) < 1e-12
            assert abs(choquet_integral(zeros, x) - x.min()) < 1e-12

    def test_additive_is_weighted_mean(self):
        rng = np.random.default_rng(3)
        w = rng.dirichlet(np.ones(4))
        g = additive(w)
        for x in rng.random((1000, 4)):
            assert abs(choquet_integral(g, x) - float(w @ x)) < 1e-12

    def test_dimension_mismatch(self):
        g = build_measure(2, [0.3, 0.4, 1.0])
        with pytest.raises(DimensionMismatch):
            choquet_integral(g, [0.1, 0.2, 0.3])

    def test_confidence_out_of_range(self):
        g = build_measure(2, [0.3, 0.4, 1.0])
        with pytest.raises(RangeError):
            choquet_integral(g, [0.1, 1.5])

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, m=st.integers(2, 6))
    def test_bounded_by_min_and_max(self, seed, m):
        g, x = random_pair(seed, m)
        ci = choquet_integral(g, x)
        assert x.min() - 1e-12 <= ci <= x.max() + 1e-12

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, m=st.integers(2, 6), bump=st.floats(0.0, 1.0))
    def test_monotone_in_inputs(self, seed, m, bump):
        g, x = random_pair(seed, m)
        k = seed % m
        y = x.copy()
        y[k] = x[k] + bump * (1.0 - x[k])
        assert choquet_integral(g, y) >= choquet_integral(g, x) - 1e-12

    def test_tie_order_does_not_change_value(self):
        g, _ = random_pair(11, 4)
        x = [0.6, 0.3, 0.6, 0.3]
        # the other tie-break walks {2} → {0,2} → {0,2,3}; zero-gap steps vanish
        other = 0.0 * g.g(0b0100) + 0.3 * g.g(0b0101) + 0.0 * g.g(0b1101) + 0.3 * g.g(0b1111)
        assert sort_chain(x) == [0b0001, 0b0101, 0b0111, 0b1111]
        assert choquet_integral(g, x) == pytest.approx(other, abs=1e-15)

    def test_batch_matches_single(self):
        g, _ = random_pair(8, 5)
        x = np.random.default_rng(8).random((40, 5))
        batch = choquet_batch(g.values, sort_chains(x))
        single = np.array([choquet_integral(g, row) for row in x])
        assert np.array_equal(batch, single)

    def test_batch_over_measure_stack(self):
        rng = np.random.default_rng(1)
        gs = [init_measure(3, InitMode.COIN_FLIP, rng) for _ in range(4)]
        x = rng.random((10, 3))
        stack = choquet_batch(np.stack([g.values for g in gs]), sort_chains(x))
        assert stack.shape == (4, 10)
        for k, g in enumerate(gs):
            assert np.array_equal(stack[k], choquet_batch(g.values, sort_chains(x)))


class TestUsageCounts:
    def test_single_instance(self):
        counts = usage_counts(BagSet([Bag("a", 1, [[0.8, 0.2, 0.1]])]))
        expected = np.zeros(7, dtype=int)
        expected[[0b001 - 1, 0b011 - 1, 0b111 - 1]] = 1
        assert np.array_equal(counts.counts, expected)
        assert counts.of(0b111) == 1 and counts.non_full.size == 6

    def test_empty_bagset(self):
        assert not usage_counts(BagSet([], num_sources=3)).counts.any()

    def test_duplicate_doubles(self):
        x = [[0.3, 0.9, 0.5]]
        once = usage_counts(BagSet([Bag("a", 0, x)]))
        twice = usage_counts(BagSet([Bag("a", 0, x), Bag("b", 1, x)]))
        assert np.array_equal(twice.counts, 2 * once.counts)

    def test_total_is_m_per_instance(self):
        x = np.random.default_rng(0).random((25, 4))
        counts = usage_counts(BagSet([Bag("a", 0, x[:10]), Bag("b", 1, x[10:])]))
        assert counts.counts.sum() == 4 * 25


class TestMobius:
    def test_hand_example(self):
        g = build_measure(2, [0.5, 0.5, 1.0])
        assert np.allclose(mobius_transform(g), [0.0, 0.5, 0.5, 0.0])
        assert mobius_choquet_oracle(g, [0.8, 0.2]) == pytest.approx(0.5, abs=1e-15)

    def test_masses_sum_to_one(self):
        g, _ = random_pair(6, 5)
        assert mobius_transform(g).sum() == pytest.approx(1.0, abs=1e-12)
        assert mobius_choquet_oracle(g, [0.42] * 5) == pytest.approx(0.42, abs=1e-12)

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(2024)
        for trial in range(10_000):
            m = 2 + trial % 4
            g = init_measure(m, InitMode.COIN_FLIP, rng)
            x = rng.random(m)
            assert abs(choquet_integral(g, x) - mobius_choquet_oracle(g, x)) < 1e-12

    def test_oracle_source_limit(self):
        g = build_measure(13, np.r_[np.zeros((1 << 13) - 2), 1.0])
        with pytest.raises(MeasureError):
            mobius_choquet_oracle(g, np.zeros(13))
