import numpy as np
import pytest

from chirpvote._rng import keyed_rng
from chirpvote.channel import (
    EPA_DELAYS_NS,
    EPA_POWERS_DB,
    ChannelRealization,
    draw_epa,
    draw_sync_offset,
    epa_rms_delay_spread_ns,
    min_guard_bins,
    propagate,
    superpose,
)
from chirpvote.errors import FramingError, InfeasibleError
from chirpvote.waveform import ComplexSignal, WaveformConfig

CFG = WaveformConfig()


def _sig(x):
    return ComplexSignal(samples=np.asarray(x, dtype=complex), sample_period=1 / CFG.sample_rate)


class TestProfile:
    def test_profile_values(self):
        assert EPA_DELAYS_NS == (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0)
        assert EPA_POWERS_DB == (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8)

    def test_rms_delay_spread_frozen(self):
        assert epa_rms_delay_spread_ns() == pytest.approx(43.129, abs=0.01)

    def test_delays_snap_to_sample_grid(self):
        real = draw_epa(CFG, keyed_rng(0, "epa"))
        np.testing.assert_array_equal(real.delays, [0, 0, 1, 1, 2, 3, 6])
        assert real.max_delay == 6

    def test_average_tap_power_normalized(self):
        total = 0.0
        n = 4000
        rng = keyed_rng(1, "epa-power")
        for _ in range(n):
            real = draw_epa(CFG, rng)
            total += float(np.sum(np.abs(real.gains) ** 2))
        assert total / n == pytest.approx(1.0, rel=0.05)

    def test_draws_are_keyed_deterministic(self):
        a = draw_epa(CFG, keyed_rng(5, "epa"))
        b = draw_epa(CFG, keyed_rng(5, "epa"))
        np.testing.assert_array_equal(a.gains, b.gains)


class TestFrequencyResponse:
    def test_single_tap_phase_ramp(self):
        real = ChannelRealization(delays=np.array([3]), gains=np.array([0.5 + 0.5j]))
        j = np.array([-2, 0, 5])
        h = real.frequency_response(j, 64)
        ref = (0.5 + 0.5j) * np.exp(-2j * np.pi * j * 3 / 64)
        np.testing.assert_allclose(h, ref, atol=1e-15)

    def test_offset_adds_to_delay(self):
        real = ChannelRealization(delays=np.array([2]), gains=np.array([1.0 + 0j]))
        j = np.arange(-27, 27)
        shifted = real.frequency_response(j, 64, offset_samples=4)
        combined = ChannelRealization(
            delays=np.array([6]), gains=np.array([1.0 + 0j])
        ).frequency_response(j, 64)
        np.testing.assert_allclose(shifted, combined, atol=1e-15)


class TestPropagate:
    def test_pure_delay_shifts_and_truncates(self):
        real = ChannelRealization(delays=np.array([3]), gains=np.array([1.0 + 0j]))
        x = np.arange(1, 11, dtype=complex)
        y = propagate(real, 0, _sig(x)).samples
        assert y.size == x.size
        np.testing.assert_allclose(y[:3], 0.0)
        np.testing.assert_allclose(y[3:], x[:-3])

    def test_sync_offset_compounds(self):
        real = ChannelRealization(delays=np.array([1]), gains=np.array([1.0 + 0j]))
        x = np.arange(1, 9, dtype=complex)
        y = propagate(real, 2, _sig(x)).samples
        np.testing.assert_allclose(y[3:], x[:-3])

    def test_linearity(self):
        rng = np.random.default_rng(0)
        real = draw_epa(CFG, rng)
        a = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        b = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        lhs = propagate(real, 1, _sig(2.0 * a - 3.0 * b)).samples
        rhs = 2.0 * propagate(real, 1, _sig(a)).samples - 3.0 * propagate(
            real, 1, _sig(b)
        ).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_negative_offset_rejected(self):
        real = draw_epa(CFG, np.random.default_rng(0))
        with pytest.raises(ValueError):
            propagate(real, -1, _sig(np.ones(8)))


class TestSuperpose:
    def test_weighted_sum_noiseless(self):
        x = np.ones(16, dtype=complex)
        y = 1j * np.ones(16, dtype=complex)
        out = superpose([(_sig(x), 4.0), (_sig(y), 9.0)], 0.0, np.random.default_rng(0))
        np.testing.assert_allclose(out.samples, 2.0 * x + 3.0 * y)

    def test_noise_variance(self):
        x = np.zeros(200_000, dtype=complex)
        out = superpose([(_sig(x), 1.0)], 0.25, np.random.default_rng(1))
        assert out.mean_power == pytest.approx(0.25, rel=0.03)

    def test_length_mismatch_rejected(self):
        with pytest.raises(FramingError):
            superpose(
                [(_sig(np.ones(8)), 1.0), (_sig(np.ones(9)), 1.0)],
                0.0,
                np.random.default_rng(0),
            )

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            superpose([], 0.0, np.random.default_rng(0))


class TestSyncOffset:
    def test_range_and_determinism(self):
        rng = keyed_rng(0, "sync")
        draws = [draw_sync_offset(4, rng) for _ in range(200)]
        assert set(draws) <= {0, 1, 2, 3, 4}
        assert min(draws) == 0 and max(draws) == 4
        with pytest.raises(ValueError):
            draw_sync_offset(-1, np.random.default_rng(0))


class TestGuardSizing:
    def test_epa_plus_sync_needs_ten_guard_bins(self):
        # 470 ns delay spread allowance + 240 ns sync budget against the
        # 77.16 ns per-bin aperture of a 4.167 us symbol
        assert min_guard_bins(CFG, 470e-9, 240e-9) == 10

    def test_zero_budget_needs_no_guard(self):
        assert min_guard_bins(CFG, 0.0, 0.0) == 0

    def test_exact_multiple_boundary(self):
        aperture = CFG.symbol_period / CFG.num_bins
        assert min_guard_bins(CFG, 3 * aperture, 0.0) == 3

    def test_infeasible_when_exceeding_symbol(self):
        with pytest.raises(InfeasibleError):
            min_guard_bins(CFG, 5e-6, 0.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            min_guard_bins(CFG, -1e-9, 0.0)
