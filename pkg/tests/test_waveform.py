import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chirpvote.errors import ConfigError, FramingError
from chirpvote.waveform import (
    ComplexSignal,
    WaveformConfig,
    analog_body,
    assemble_stream,
    build_fdss,
    demodulate_ofdm,
    despread,
    modulate_ofdm,
    ofdm_grid,
    precode,
    spread,
)

CFG = WaveformConfig()


def _fold_weights(cfg, fdss):
    g2 = np.zeros(cfg.num_bins)
    g2[cfg.bin_indices % cfg.num_bins] = np.abs(fdss) ** 2
    return g2


def _reference_roundtrip(cfg, fdss, bins):
    g2 = _fold_weights(cfg, fdss)
    return np.fft.ifft(g2 * np.fft.fft(bins, norm="ortho"), norm="ortho")


class TestConfig:
    def test_defaults(self):
        assert CFG.num_bins == 54
        assert CFG.idft_size == 64
        assert CFG.bin_high - CFG.bin_low + 1 == CFG.num_bins
        assert CFG.symbol_period == pytest.approx(64 / 15.36e6)

    def test_bin_indices_cover_contiguous_range(self):
        assert set(CFG.bin_indices) == set(range(CFG.bin_low, CFG.bin_high + 1))

    def test_bad_span_rejected(self):
        with pytest.raises(ConfigError):
            WaveformConfig(num_bins=54, bin_low=-26, bin_high=26)

    def test_sweep_must_fit_in_band(self):
        with pytest.raises(ConfigError):
            WaveformConfig(sweep_cycles=80.0)

    def test_cp_bounds(self):
        with pytest.raises(ConfigError):
            WaveformConfig(cp_len=-1)
        with pytest.raises(ConfigError):
            WaveformConfig(cp_len=64)

    def test_window_must_fit_in_cp(self):
        with pytest.raises(ConfigError):
            WaveformConfig(window_rolloff=17)


class TestSignal:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ComplexSignal(samples=np.array([]), sample_period=1.0)

    def test_rejects_bad_period(self):
        with pytest.raises(ValueError):
            ComplexSignal(samples=np.ones(4), sample_period=0.0)

    def test_mean_power(self):
        sig = ComplexSignal(samples=2.0 * np.ones(8, dtype=complex), sample_period=1.0)
        assert sig.mean_power == pytest.approx(4.0)
        assert sig.sample_rate == pytest.approx(1.0)


class TestShaping:
    def test_total_shaping_power_equals_bin_count(self):
        f = build_fdss(CFG)
        assert np.sum(np.abs(f) ** 2) == pytest.approx(CFG.num_bins, abs=1e-9)

    def test_magnitude_symmetric_in_bin_index(self):
        f = build_fdss(CFG)
        mag = {j: abs(v) for j, v in zip(CFG.bin_indices, f)}
        for j in range(1, 27):
            assert mag[j] == pytest.approx(mag[-j], rel=1e-9)

    def test_interior_band_flat_edges_rolled_off(self):
        # Fresnel shaping: bounded ripple over the swept band, steep rolloff
        # at the outermost bins.
        f = build_fdss(CFG)
        db = 20 * np.log10(np.abs(f))
        j = CFG.bin_indices
        interior = db[np.abs(j) <= 18]
        assert interior.max() - interior.min() < 3.2
        edge = db[np.abs(j) >= 26]
        assert edge.max() < np.median(interior) - 10.0


class TestChirpSynthesis:
    def test_impulse_bin_shift_is_circular_time_shift(self):
        # bins b and 0 differ by a circular shift of b*N/M samples when that
        # is an integer: 27 * 64/54 = 32.
        f = build_fdss(CFG)
        e0 = np.zeros(CFG.num_bins, dtype=complex)
        e27 = np.zeros(CFG.num_bins, dtype=complex)
        e0[0] = 1.0
        e27[27] = 1.0
        body0 = spread(CFG, f, e0).samples[CFG.cp_len :]
        body27 = spread(CFG, f, e27).samples[CFG.cp_len :]
        assert np.max(np.abs(body27 - np.roll(body0, 32))) < 1e-12

    def test_single_chirp_envelope_nearly_constant(self):
        f = build_fdss(CFG)
        e = np.zeros(CFG.num_bins, dtype=complex)
        e[5] = 1.0
        body = analog_body(CFG, precode(CFG, f, e), oversample=4)
        env = np.abs(body) ** 2
        assert env.max() / env.mean() < 10 ** (2.5 / 10)  # under 2.5 dB peak

    def test_symbol_length_and_cyclic_prefix(self):
        f = build_fdss(CFG)
        rng = np.random.default_rng(0)
        s = rng.standard_normal(CFG.num_bins) + 1j * rng.standard_normal(CFG.num_bins)
        sym = spread(CFG, f, s).samples
        assert sym.size == CFG.cp_len + CFG.idft_size
        w = CFG.window_rolloff
        body = sym[CFG.cp_len :]
        # CP equals the body tail except for the windowed head samples
        np.testing.assert_allclose(
            sym[w : CFG.cp_len], body[-(CFG.cp_len - w) :], atol=1e-12
        )


class TestRoundTrip:
    def test_operator_identity_against_reference(self):
        f = build_fdss(CFG)
        rng = np.random.default_rng(42)
        for _ in range(100):
            s = rng.standard_normal(CFG.num_bins) + 1j * rng.standard_normal(
                CFG.num_bins
            )
            got = despread(CFG, f, spread(CFG, f, s))
            ref = _reference_roundtrip(CFG, f, s)
            assert np.max(np.abs(got - ref)) < 1e-9

    def test_unit_shaping_gives_exact_identity(self):
        ones = np.ones(CFG.num_bins, dtype=complex)
        rng = np.random.default_rng(1)
        s = rng.standard_normal(CFG.num_bins) + 1j * rng.standard_normal(CFG.num_bins)
        got = despread(CFG, ones, spread(CFG, ones, s))
        assert np.max(np.abs(got - s)) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(
        arrays(np.float64, 54, elements=st.floats(-5, 5)),
        arrays(np.float64, 54, elements=st.floats(-5, 5)),
        st.floats(-3, 3),
        st.floats(-3, 3),
    )
    def test_chain_is_linear(self, re1, re2, a, b):
        f = build_fdss(CFG)
        s1 = re1 + 0.5j * re2
        s2 = re2 - 0.25j * re1
        lhs = despread(CFG, f, spread(CFG, f, a * s1 + b * s2))
        rhs = a * despread(CFG, f, spread(CFG, f, s1)) + b * despread(
            CFG, f, spread(CFG, f, s2)
        )
        assert np.max(np.abs(lhs - rhs)) < 1e-8

    def test_despread_rejects_wrong_length(self):
        f = build_fdss(CFG)
        for bad in (79, 96):  # one symbol is exactly cp_len + N = 80 samples
            with pytest.raises(FramingError):
                despread(
                    CFG, f, ComplexSignal(np.ones(bad, dtype=complex), 1 / CFG.sample_rate)
                )

    def test_plain_ofdm_roundtrip(self):
        rng = np.random.default_rng(2)
        qpsk = (
            rng.integers(0, 2, CFG.num_bins) * 2
            - 1
            + 1j * (rng.integers(0, 2, CFG.num_bins) * 2 - 1)
        ) / np.sqrt(2)
        got = demodulate_ofdm(CFG, modulate_ofdm(CFG, qpsk))
        assert np.max(np.abs(got - qpsk)) < 1e-9


class TestAnalogPaths:
    def test_oversampled_body_preserves_mean_power(self):
        f = build_fdss(CFG)
        rng = np.random.default_rng(3)
        s = rng.standard_normal((10, CFG.num_bins)) + 1j * rng.standard_normal(
            (10, CFG.num_bins)
        )
        grids = precode(CFG, f, s)
        body1 = analog_body(CFG, grids, oversample=1)
        body4 = analog_body(CFG, grids, oversample=4)
        p1 = np.mean(np.abs(body1) ** 2, axis=-1)
        p4 = np.mean(np.abs(body4) ** 2, axis=-1)
        np.testing.assert_allclose(p1, p4, rtol=1e-12)

    def test_oversample_validity(self):
        with pytest.raises(ValueError):
            analog_body(CFG, np.ones(CFG.idft_size, dtype=complex), oversample=0)

    def test_stream_shape_and_rate(self):
        f = build_fdss(CFG)
        rng = np.random.default_rng(4)
        n = 12
        s = rng.standard_normal((n, CFG.num_bins)) + 1j * rng.standard_normal(
            (n, CFG.num_bins)
        )
        grids = precode(CFG, f, s)
        stream = assemble_stream(CFG, grids, oversample=4)
        stride = (CFG.cp_len + CFG.idft_size) * 4
        # n full symbol strides plus the last symbol's windowed suffix
        assert len(stream) == n * stride + CFG.window_rolloff * 4
        assert stream.sample_rate == pytest.approx(4 * CFG.sample_rate)

    def test_stream_mean_power_close_to_symbol_power(self):
        f = build_fdss(CFG)
        rng = np.random.default_rng(5)
        n = 64
        s = rng.standard_normal((n, CFG.num_bins)) + 1j * rng.standard_normal(
            (n, CFG.num_bins)
        )
        grids = precode(CFG, f, s)
        stream = assemble_stream(CFG, grids, oversample=2)
        bodies = analog_body(CFG, grids, oversample=2)
        assert stream.mean_power == pytest.approx(
            float(np.mean(np.abs(bodies) ** 2)), rel=0.05
        )

    def test_ofdm_grid_maps_bins_to_subcarriers(self):
        s = np.arange(1, CFG.num_bins + 1, dtype=complex)
        grid = ofdm_grid(CFG, s)
        assert grid.shape == (CFG.idft_size,)
        for j, v in zip(CFG.bin_indices, s):
            assert grid[j % CFG.idft_size] == v
        occupied = set(np.asarray(CFG.bin_indices) % CFG.idft_size)
        for idx in set(range(CFG.idft_size)) - occupied:
            assert grid[idx] == 0
