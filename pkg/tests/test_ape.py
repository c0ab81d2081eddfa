"""Accumulated prediction errors: refit oracle, leakage, exact identities."""
import numpy as np
import pytest

from arselect import (
    ApeResult,
    ArModel,
    Series,
    ape_direct,
    ape_excess,
    ape_plugin,
    ma_coefficients,
    simulate,
    start_index,
)
from arselect.errors import LengthMismatchError, NoValidStartError
from arselect.methods import Method

from test_estimation import naive_direct, naive_plugin


def naive_ape(values, h, k, m, method):
    """Full refit from scratch at every step."""
    n = values.size
    errors = []
    for i in range(m, n - h + 1):
        prefix = values[:i]
        coeffs = (naive_direct(prefix, h, k) if method is Method.DIRECT
                  else naive_plugin(prefix, h, k))
        pred = float(prefix[::-1][:k] @ coeffs)
        errors.append(values[i + h - 1] - pred)
    errors = np.array(errors)
    return float(np.sum(errors ** 2)), errors


@pytest.fixture(scope="module")
def path():
    return simulate(ArModel((0.9, -0.81), 1.0), 160, seed=42)


class TestStartIndex:
    def test_structural_minimum_on_benign_data(self, path):
        assert start_index(path.series, 1, 1) == 2
        assert start_index(path.series, 3, 2) == 6
        assert start_index(path.series, 3, 4) == 10

    def test_degenerate_prefix_pushes_start(self):
        rng = np.random.default_rng(5)
        values = np.concatenate([np.zeros(20), rng.normal(size=60)])
        start = start_index(Series(values), 1, 2)
        assert start > 20

    def test_too_short_series_raises(self):
        values = simulate(ArModel((0.5,), 1.0), 11, seed=1).series.values
        with pytest.raises(NoValidStartError):
            start_index(Series(values), 3, 4)


class TestApeAgainstRefitOracle:
    def test_matches_naive_refit(self, path):
        values = path.series.values
        m = start_index(path.series, 3, 4)
        for k in (1, 2, 3, 4):
            for method, func in ((Method.DIRECT, ape_direct),
                                 (Method.PLUGIN, ape_plugin)):
                got = func(path.series, 3, k, m, keep_steps=True)
                want, want_errors = naive_ape(values, 3, k, m, method)
                assert abs(got.ape - want) / want < 1e-8
                assert np.max(np.abs(got.step_errors - want_errors)) < 1e-6

    def test_summand_count_and_sum_identity(self, path):
        m = start_index(path.series, 3, 4)
        n = len(path.series.values)
        res = ape_direct(path.series, 3, 2, m, keep_steps=True)
        assert res.step_errors.size == n - 3 - m + 1
        assert res.ape == float(np.sum(res.step_errors ** 2))
        assert res.ape >= 0.0

    def test_horizon_one_methods_coincide_exactly(self, path):
        m = start_index(path.series, 1, 4)
        for k in (1, 2, 3):
            a = ape_plugin(path.series, 1, k, m, keep_steps=True)
            b = ape_direct(path.series, 1, k, m, keep_steps=True)
            assert a.ape == b.ape
            assert np.array_equal(a.step_errors, b.step_errors)

    def test_prefix_sum_property(self, path):
        # truncating the series truncates the error sequence, bit for bit
        m = start_index(path.series, 3, 2)
        full = ape_direct(path.series, 3, 2, m, keep_steps=True)
        shorter = Series(path.series.values[:120])
        part = ape_direct(shorter, 3, 2, m, keep_steps=True)
        assert np.array_equal(part.step_errors,
                              full.step_errors[:part.step_errors.size])


class TestNoLeakage:
    def test_future_tampering_leaves_past_errors_alone(self, path):
        rng = np.random.default_rng(9)
        values = path.series.values
        m = start_index(path.series, 3, 4)
        cut = m + 40
        tampered = values.copy()
        tampered[cut:] = rng.normal(size=values.size - cut) * 10.0
        before = ape_direct(path.series, 3, 2, m, keep_steps=True)
        after = ape_direct(Series(tampered), 3, 2, m, keep_steps=True)
        agree = cut - 3 - m + 1  # steps whose target precedes the cut
        assert np.array_equal(before.step_errors[:agree],
                              after.step_errors[:agree])


class TestMaskedCandidates:
    def test_contiguous_masks_reproduce_dense_sums_exactly(self, path):
        m = start_index(path.series, 3, 4)
        for k in (1, 2, 3):
            mask = (1,) * k + (0,) * (4 - k)
            assert ape_direct(path.series, 3, mask, m).ape == \
                ape_direct(path.series, 3, k, m).ape
        assert ape_plugin(path.series, 3, (1, 1, 1, 1), m).ape == \
            ape_plugin(path.series, 3, 4, m).ape

    def test_gap_mask_runs_and_differs(self, path):
        m = start_index(path.series, 3, 4)
        gap = ape_direct(path.series, 3, (1, 0, 1, 0), m)
        dense = ape_direct(path.series, 3, 2, m)
        assert isinstance(gap, ApeResult)
        assert gap.ape != dense.ape


class TestExcess:
    def test_horizon_one_excess_subtracts_innovations(self):
        model = ArModel((0.9, -0.81), 1.0)
        sim = simulate(model, 300, seed=11)
        m = start_index(sim.series, 1, 2)
        res = ape_direct(sim.series, 1, 2, m)
        ma = ma_coefficients(model, 0)
        got = ape_excess(res, sim.innovations, ma)
        eps = sim.innovations
        n = len(sim.series.values)
        want = res.ape - float(np.sum(eps[m: n] ** 2))
        assert got == pytest.approx(want, abs=1e-9)

    def test_multi_step_excess_uses_weighted_noise(self):
        model = ArModel((0.9, -0.81), 1.0)
        sim = simulate(model, 400, seed=12)
        h = 3
        m = start_index(sim.series, h, 2)
        res = ape_direct(sim.series, h, 1, m)
        ma = ma_coefficients(model, h - 1)
        got = ape_excess(res, sim.innovations, ma)
        eps = sim.innovations
        n = len(sim.series.values)
        total = 0.0
        for i in range(m, n - h + 1):
            eta = sum(ma.b[j] * eps[i + h - 1 - j] for j in range(h))
            total += eta ** 2
        assert got == pytest.approx(res.ape - total, abs=1e-8)

    def test_length_mismatch_rejected(self):
        model = ArModel((0.9, -0.81), 1.0)
        sim = simulate(model, 100, seed=3)
        m = start_index(sim.series, 1, 1)
        res = ape_direct(sim.series, 1, 1, m)
        with pytest.raises(LengthMismatchError):
            ape_excess(res, sim.innovations[:-5], ma_coefficients(model, 0))
