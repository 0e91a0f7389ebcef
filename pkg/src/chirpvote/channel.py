"""Multipath fading, synchronization error, and multi-device superposition.

The fading model is the standard Extended Pedestrian A tapped delay line
(RMS delay spread about 43 ns), redrawn independently per device per
communication round with Rayleigh tap gains normalized to unit average
power. Tap delays are snapped to the nearest sample at the configured rate;
timing errors add an integer sample offset, absorbed — together with the
delay spread — by the cyclic prefix when the guard condition holds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FramingError, InfeasibleError
from .waveform import ComplexSignal, WaveformConfig

EPA_DELAYS_NS: tuple[float, ...] = (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0)
EPA_POWERS_DB: tuple[float, ...] = (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8)


def epa_rms_delay_spread_ns() -> float:
    """RMS delay spread of the continuous-time profile (before grid snapping)."""
    p = 10.0 ** (np.asarray(EPA_POWERS_DB) / 10.0)
    d = np.asarray(EPA_DELAYS_NS)
    mean = np.sum(p * d) / np.sum(p)
    return float(np.sqrt(np.sum(p * d**2) / np.sum(p) - mean**2))


@dataclass(frozen=True)
class ChannelRealization:
    """Tapped delay line: integer sample delays with complex gains."""

    delays: np.ndarray
    gains: np.ndarray

    @property
    def max_delay(self) -> int:
        return int(self.delays.max())

    def frequency_response(
        self, bin_indices: np.ndarray, idft_size: int, offset_samples: int = 0
    ) -> np.ndarray:
        """Response at the given (signed) subcarrier indices, including an
        extra timing offset in samples."""
        j = np.asarray(bin_indices)[:, None]
        d = (self.delays + offset_samples)[None, :]
        phases = np.exp(-2j * np.pi * j * d / idft_size)
        return phases @ self.gains


def draw_epa(cfg: WaveformConfig, rng: np.random.Generator) -> ChannelRealization:
    """One EPA realization: Rayleigh gains on the profile snapped to the
    sample grid, unit average power."""
    delays = np.rint(np.asarray(EPA_DELAYS_NS) * 1e-9 * cfg.sample_rate).astype(int)
    powers = 10.0 ** (np.asarray(EPA_POWERS_DB) / 10.0)
    powers = powers / powers.sum()
    n = len(delays)
    gains = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(powers / 2.0)
    return ChannelRealization(delays=delays, gains=gains)


def draw_sync_offset(max_offset: int, rng: np.random.Generator) -> int:
    """Uniform integer timing error in [0, max_offset] samples."""
    if max_offset < 0:
        raise ValueError("max_offset must be non-negative")
    return int(rng.integers(0, max_offset + 1))


def propagate(
    realization: ChannelRealization, sync_offset: int, tx: ComplexSignal
) -> ComplexSignal:
    """Convolve with the tap line, delayed by the timing error; the output is
    truncated to the transmit length (the receiver's window)."""
    if sync_offset < 0:
        raise ValueError("sync_offset must be non-negative")
    x = tx.samples
    y = np.zeros_like(x)
    for d, g in zip(realization.delays, realization.gains):
        shift = int(d) + sync_offset
        if shift < x.size:
            y[shift:] += g * x[: x.size - shift]
    return ComplexSignal(samples=y, sample_period=tx.sample_period)


def superpose(
    contributions: Sequence[tuple[ComplexSignal, float]],
    noise_power: float,
    rng: np.random.Generator,
) -> ComplexSignal:
    """Sum sqrt(P_k)-weighted signals and add complex white Gaussian noise of
    the given per-sample variance."""
    if not contributions:
        raise ValueError("need at least one signal")
    length = len(contributions[0][0])
    period = contributions[0][0].sample_period
    total = np.zeros(length, dtype=complex)
    for sig, power in contributions:
        if len(sig) != length:
            raise FramingError("superposed signals must share a common length")
        total += math.sqrt(power) * sig.samples
    if noise_power > 0:
        scale = math.sqrt(noise_power / 2.0)
        total = total + scale * (rng.standard_normal(length) + 1j * rng.standard_normal(length))
    return ComplexSignal(samples=total, sample_period=period)


def min_guard_bins(cfg: WaveformConfig, t_chn: float, t_sync: float) -> int:
    """Smallest guard width (in bins) whose time aperture covers the channel
    delay spread plus the synchronization error."""
    if t_chn < 0 or t_sync < 0:
        raise ValueError("durations must be non-negative")
    need = t_chn + t_sync
    symbol = cfg.symbol_period
    if need > symbol:
        raise InfeasibleError("guard requirement exceeds the symbol duration")
    spacing = symbol / cfg.num_bins
    guard = int(math.ceil(need / spacing - 1e-9)) if need > 0 else 0
    if cfg.num_bins // (2 + 2 * guard) < 1:
        raise InfeasibleError("guard width leaves no room for votes")
    return guard
