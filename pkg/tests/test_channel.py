import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otapriv.config import FadingModel, paper_default_config
from otapriv.channel import (
    align,
    align_batch,
    audit_power,
    draw_channel,
    sample_participation,
    superpose,
    transmit_signal,
)


class TestDrawChannel:
    def test_constant_kind_is_deterministic(self):
        model = FadingModel(kind="constant", mean_power=1.0)
        h = draw_channel(model, 5, np.random.default_rng(0))
        np.testing.assert_array_equal(h, np.ones(5))

    def test_large_k_factor_concentrates(self):
        model = FadingModel(kind="rician", k_factor=1e8, mean_power=1.0)
        h = draw_channel(model, 10_000, np.random.default_rng(1))
        assert np.std(h) < 0.01 * np.mean(h)
        assert np.mean(h) == pytest.approx(1.0, rel=0.01)

    def test_mean_square_matches_mean_power(self):
        model = FadingModel(kind="rician", k_factor=3.0, mean_power=2.5)
        h = draw_channel(model, 100_000, np.random.default_rng(2))
        assert np.mean(h ** 2) == pytest.approx(2.5, rel=0.02)

    def test_floor_respected(self):
        model = FadingModel(kind="rician", k_factor=0.0, mean_power=1.0,
                            h_floor=0.05)
        h = draw_channel(model, 50_000, np.random.default_rng(3))
        assert np.all(h >= 0.05)

    def test_unknown_kind_raises(self):
        with pytest.raises(ValueError):
            draw_channel(FadingModel(kind="rayleigh"), 2,
                         np.random.default_rng(0))


class TestAlign:
    def test_all_unit_case(self):
        a = align(np.array([1.0]), np.array([1.0]), 1.0)
        np.testing.assert_array_equal(a, [1.0])

    def test_pinned_arithmetic(self):
        a = align(np.array([0.5]), np.array([0.9]), 1.0)
        assert a[0] == pytest.approx(1.8)

    def test_alignment_identity_across_heterogeneous_channels(self):
        rng = np.random.default_rng(4)
        h = rng.uniform(0.2, 3.0, 12)
        p = rng.uniform(0.1, 1.0, 12)
        a = align(h, p, 1.0)
        np.testing.assert_allclose(h * a / p, np.ones(12), rtol=1e-12)

    def test_zero_probability_gets_zero_scaling(self):
        a = align(np.array([0.5, 1.0]), np.array([0.0, 1.0]), 2.0)
        assert a[0] == 0.0 and a[1] == 2.0

    def test_batch_matches_rowwise(self):
        rng = np.random.default_rng(5)
        h = rng.uniform(0.1, 2.0, (7, 4))
        p = np.array([0.0, 0.5, 0.9, 1.0])
        batch = align_batch(h, p, 1.5)
        for i in range(7):
            np.testing.assert_allclose(batch[i], align(h[i], p, 1.5))


class TestParticipation:
    def test_all_ones(self):
        tau = sample_participation(np.ones(6), np.random.default_rng(0))
        np.testing.assert_array_equal(tau, np.ones(6, dtype=np.int8))

    def test_all_zeros(self):
        tau = sample_participation(np.zeros(6), np.random.default_rng(0))
        np.testing.assert_array_equal(tau, np.zeros(6, dtype=np.int8))

    def test_default_rate(self):
        p = np.full(12, 0.9)
        rng = np.random.default_rng(6)
        counts = np.zeros(12)
        n = 100_000 // 10
        tau = sample_participation(np.broadcast_to(p, (n * 10, 12)), rng)
        rates = tau.mean(axis=0)
        assert np.all(np.abs(rates - 0.9) < 0.01)


class TestTransmit:
    def test_non_participation_zeroes_signal(self):
        x = transmit_signal(np.array([5.0, -2.0]), 3.0, 0.5, 0)
        np.testing.assert_array_equal(x, np.zeros(2))

    def test_unit_scaling(self):
        z = np.array([1.5, 2.5])
        np.testing.assert_array_equal(transmit_signal(z, 1.0, 1.0, 1), z)

    def test_pinned_arithmetic(self):
        x = transmit_signal(np.array([1.0, 0.0]), 1.8, 0.9, 1)
        np.testing.assert_allclose(x, [2.0, 0.0])

    def test_participating_with_zero_probability_raises(self):
        with pytest.raises(ValueError):
            transmit_signal(np.ones(2), 1.0, 0.0, 1)


class TestSuperpose:
    def test_noiseless_single_user(self):
        x = np.array([1.0, -2.0, 3.0])
        y = superpose([x], np.array([1.0]), 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(y, x)

    def test_noiseless_two_users(self):
        x1, x2 = np.array([1.0, 0.0]), np.array([0.0, 2.0])
        h = np.array([0.5, 2.0])
        y = superpose([x1, x2], h, 0.0, np.random.default_rng(0))
        np.testing.assert_allclose(y, 0.5 * x1 + 2.0 * x2)

    def test_receiver_noise_variance(self):
        r = 100_000
        y = superpose([np.zeros(r)], np.array([1.0]), 0.1,
                      np.random.default_rng(8))
        assert np.var(y) == pytest.approx(0.1, rel=0.05)

    def test_empty_signal_list_raises(self):
        with pytest.raises(ValueError):
            superpose([], np.array([]), 0.0, np.random.default_rng(0))

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            superpose([np.zeros(3), np.zeros(4)], np.array([1.0, 1.0]), 0.0,
                      np.random.default_rng(0))

    @given(st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=25)
    def test_linearity_in_channel_gains(self, h1, h2):
        x1, x2 = np.array([1.0, 2.0]), np.array([-1.0, 0.5])
        y = superpose([x1, x2], np.array([h1, h2]), 0.0,
                      np.random.default_rng(0))
        np.testing.assert_allclose(y, h1 * x1 + h2 * x2, atol=1e-12)


class TestPowerAudit:
    def test_zero_transmissions_within_budget(self):
        reports = audit_power(np.zeros(3), 10, np.ones(3))
        assert all(r.empirical_power_watts == 0.0 for r in reports)
        assert not any(r.exceeded for r in reports)

    def test_flag_raised_when_exceeded(self):
        # one trial with ||x||^2 = 2 against a 1 W budget
        reports = audit_power(np.array([2.0]), 1, np.array([1.0]))
        assert reports[0].exceeded
        assert isinstance(reports[0].exceeded, bool)
        assert reports[0].empirical_power_watts == pytest.approx(2.0)

    def test_report_for_all_default_devices(self):
        cfg = paper_default_config()
        reports = audit_power(np.ones(12), 4, cfg.powers())
        assert len(reports) == 12
        assert all(r.budget_watts == pytest.approx(1.0) for r in reports)

    def test_zero_trials_raises(self):
        with pytest.raises(ValueError):
            audit_power(np.zeros(1), 0, np.ones(1))
