"""Cell geometry, path-loss-based power control, and coverage.

Devices sit at radial distances drawn uniformly on [r_min, r_max] (uniform in
radius, not in area). Fractional power control with exponent ``beta``
compensates path loss (exponent ``alpha``) up to the coverage radius

    r_p = r_ref * 10^((obo_ref - obo_min) / (10 * beta)),

beyond which the transmit-power clamp binds and the received SNR decays at
10 * alpha dB per decade of distance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import keyed_rng
from .errors import ConfigError


@dataclass(frozen=True)
class PowerControlParams:
    """Path-loss and power-control parameters for one scheme."""

    alpha: float = 4.0
    beta: float = 4.0
    r_ref: float = 10.0
    p_ref: float = 1.0
    obo_ref: float = 30.0
    obo_min: float = 10.5
    noise_power: float = 0.01

    def __post_init__(self) -> None:
        if not 0 <= self.beta <= self.alpha:
            raise ConfigError("compensation exponent beta must lie in [0, alpha]")
        if self.r_ref <= 0:
            raise ConfigError("r_ref must be positive")
        if self.p_ref <= 0:
            raise ConfigError("p_ref must be positive")
        if self.obo_min > self.obo_ref:
            raise ConfigError("obo_min cannot exceed obo_ref")
        if self.noise_power <= 0:
            raise ConfigError("noise_power must be positive")


@dataclass(frozen=True)
class Deployment:
    """Radial positions of the edge devices in an annular cell."""

    ed_distances: np.ndarray
    r_min: float
    r_max: float
    seed: int

    def __post_init__(self) -> None:
        d = np.asarray(self.ed_distances, dtype=float)
        if d.size == 0:
            raise ConfigError("deployment must contain at least one device")
        if self.r_min > self.r_max or self.r_min < 0:
            raise ConfigError("need 0 <= r_min <= r_max")
        if np.any(d < self.r_min) or np.any(d > self.r_max):
            raise ConfigError("device distances must lie within [r_min, r_max]")
        object.__setattr__(self, "ed_distances", d)

    @property
    def num_eds(self) -> int:
        return int(self.ed_distances.size)

    @classmethod
    def sample(cls, num_eds: int, r_min: float, r_max: float, seed: int) -> "Deployment":
        """Draw device distances uniformly in radius on [r_min, r_max]."""
        rng = keyed_rng(seed, "deployment")
        d = r_min + (r_max - r_min) * rng.random(num_eds)
        return cls(ed_distances=d, r_min=r_min, r_max=r_max, seed=seed)


def coverage_radius(pc: PowerControlParams) -> float:
    """Largest distance at which power control sustains the target power."""
    if pc.beta == 0:
        raise ValueError("coverage radius is undefined for beta = 0")
    return pc.r_ref * 10.0 ** ((pc.obo_ref - pc.obo_min) / (10.0 * pc.beta))


def received_power(pc: PowerControlParams, r_p: float, d: np.ndarray | float):
    """Received power under fractional power control, clamped at r_p.

    P(d) = p_ref * (d/r_ref)^(beta - alpha) for d < r_p, frozen at the r_p
    value beyond. With full compensation (beta = alpha) this is p_ref
    everywhere; the beyond-coverage decay appears in the link SNR, where the
    transmit clamp binds (see snr_vs_distance).
    """
    d = np.asarray(d, dtype=float)
    base = np.minimum(d, r_p) / pc.r_ref
    expo = pc.beta - pc.alpha
    with np.errstate(divide="ignore"):
        power = pc.p_ref * base**expo
    return power if power.ndim else float(power)


def link_power(pc: PowerControlParams, r_p: float, d: np.ndarray | float):
    """Delivered power with the transmit clamp binding beyond coverage:

    p_ref inside r_p, then p_ref * (d/r_p)^(-alpha).
    """
    d = np.asarray(d, dtype=float)
    ratio = np.minimum(1.0, r_p / np.maximum(d, np.finfo(float).tiny))
    power = pc.p_ref * ratio**pc.alpha
    return power if power.ndim else float(power)


def snr_vs_distance(
    pc: PowerControlParams, r_p: float, distances: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Uplink SNR over a distance grid: flat at the target up to r_p, then
    decaying at 10*alpha dB per decade."""
    d = np.asarray(distances, dtype=float)
    snr_db = 10.0 * np.log10(link_power(pc, r_p, d) / pc.noise_power)
    return d, snr_db
