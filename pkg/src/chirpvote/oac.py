"""Over-the-air computation layer: vote placement, energy detection, and the
one-bit digital-aggregation (OBDA) baseline.

A gradient sign is carried by activating exactly one of two guard-separated
bins (one chirp of a complementary pair); devices transmit simultaneously and
the server compares the aggregate energy of the two bin groups — no channel
knowledge needed, and any CP-admissible delay only smears energy within a
group. OBDA instead maps sign pairs to QPSK subcarriers with truncated
channel inversion at each device, and the server takes component signs of the
aggregated subcarriers.

Sign convention: sign(0) = +1 everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FramingError, InfeasibleError


def sign_pm1(x: np.ndarray) -> np.ndarray:
    """Elementwise sign with sign(0) = +1, values in {+1, -1}."""
    return np.where(np.asarray(x) >= 0, 1, -1).astype(int)


def votes_per_block(num_bins: int, guard_bins: int) -> int:
    """How many vote pairs fit in one symbol at the given guard width."""
    return num_bins // (2 + 2 * guard_bins)


def guard_for_votes(num_bins: int, votes: int) -> int:
    """Widest guard that still fits the requested votes per symbol."""
    if votes < 1 or votes > num_bins // 2:
        raise InfeasibleError(f"cannot fit {votes} vote pairs in {num_bins} bins")
    guard = (num_bins // votes - 2) // 2
    assert votes_per_block(num_bins, guard) >= votes
    return guard


@dataclass(frozen=True)
class VotePlan:
    """Deterministic gradient-index -> (block, bin-pair) resource mapping.

    Gradient i (0-based) lands in block i // votes_per_block at within-block
    slot u = i % votes_per_block; its +1 chirp occupies bin 2u*(1+guard) and
    its -1 chirp bin (2u+1)*(1+guard), each heading a group of 1+guard bins
    reserved for delay smear.
    """

    grad_dim: int
    num_bins: int
    guard_bins: int
    votes_per_block: int
    num_blocks: int

    @property
    def group_width(self) -> int:
        return 1 + self.guard_bins

    @property
    def block_index(self) -> np.ndarray:
        return np.arange(self.grad_dim) // self.votes_per_block

    @property
    def slot_index(self) -> np.ndarray:
        return np.arange(self.grad_dim) % self.votes_per_block

    @property
    def pos_bin(self) -> np.ndarray:
        return 2 * self.slot_index * self.group_width

    @property
    def neg_bin(self) -> np.ndarray:
        return (2 * self.slot_index + 1) * self.group_width


def build_vote_plan(grad_dim: int, num_bins: int, guard_bins: int) -> VotePlan:
    if grad_dim < 1:
        raise ValueError("grad_dim must be positive")
    if guard_bins < 0:
        raise ValueError("guard_bins must be non-negative")
    per_block = votes_per_block(num_bins, guard_bins)
    if per_block < 1:
        raise InfeasibleError(
            f"guard width {guard_bins} leaves no room for votes in {num_bins} bins"
        )
    num_blocks = -(-grad_dim // per_block)
    return VotePlan(
        grad_dim=grad_dim,
        num_bins=num_bins,
        guard_bins=guard_bins,
        votes_per_block=per_block,
        num_blocks=num_blocks,
    )


def encode_csc(plan: VotePlan, votes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Bin symbols for one device: a fresh unit-circle symbol on the bin
    selected by each vote's sign. Returns (num_blocks, num_bins)."""
    votes = np.asarray(votes)
    if votes.shape != (plan.grad_dim,):
        raise FramingError("vote vector length must equal grad_dim")
    phases = np.exp(2j * np.pi * rng.random(plan.grad_dim))
    bins = np.where(votes > 0, plan.pos_bin, plan.neg_bin)
    blocks = np.zeros((plan.num_blocks, plan.num_bins), dtype=complex)
    blocks[plan.block_index, bins] = phases
    return blocks


@dataclass(frozen=True)
class DetectorReport:
    """Majority-vote decisions with their energy margins."""

    mv: np.ndarray
    margins: np.ndarray


def group_energies(plan: VotePlan, blocks: np.ndarray) -> np.ndarray:
    """Energy per (block, bin group): sums |.|^2 over each group of
    1+guard_bins consecutive bins. Returns (num_blocks, 2*votes_per_block)."""
    blocks = np.asarray(blocks)
    if blocks.shape != (plan.num_blocks, plan.num_bins):
        raise FramingError(
            f"expected {(plan.num_blocks, plan.num_bins)} received blocks, got {blocks.shape}"
        )
    groups = 2 * plan.votes_per_block
    used = groups * plan.group_width
    energy = np.abs(blocks[:, :used]) ** 2
    return energy.reshape(plan.num_blocks, groups, plan.group_width).sum(axis=-1)


def detect_mv(plan: VotePlan, blocks: np.ndarray) -> DetectorReport:
    """Non-coherent majority vote: sign of the energy difference between each
    gradient's two bin groups."""
    energy = group_energies(plan, blocks)
    pos = energy[plan.block_index, 2 * plan.slot_index]
    neg = energy[plan.block_index, 2 * plan.slot_index + 1]
    margins = pos - neg
    return DetectorReport(mv=sign_pm1(margins), margins=margins)


def random_csc_traffic(
    num_bins: int, votes: int, n_symbols: int, rng: np.random.Generator
) -> np.ndarray:
    """Training-like traffic ensemble: i.i.d. equiprobable signs, fresh
    unit-circle symbols, widest guard for the vote count. (n_symbols, num_bins)."""
    plan = build_vote_plan(votes * n_symbols, num_bins, guard_for_votes(num_bins, votes))
    signs = sign_pm1(rng.integers(0, 2, votes * n_symbols) * 2 - 1)
    return encode_csc(plan, signs, rng)


def random_qpsk(num_bins: int, n_symbols: int, rng: np.random.Generator) -> np.ndarray:
    """Random unit-power QPSK subcarrier loading. (n_symbols, num_bins)."""
    re = rng.integers(0, 2, (n_symbols, num_bins)) * 2 - 1
    im = rng.integers(0, 2, (n_symbols, num_bins)) * 2 - 1
    return (re + 1j * im) / np.sqrt(2.0)


def obda_blocks_needed(grad_dim: int, num_bins: int) -> int:
    """OFDM symbols per round for OBDA: two signs per subcarrier."""
    return -(-grad_dim // (2 * num_bins))


def encode_obda(
    votes: np.ndarray,
    channel_response: np.ndarray,
    tci_threshold: float = 0.1,
) -> np.ndarray:
    """QPSK + truncated channel inversion for one device.

    Consecutive sign pairs load I and Q of one subcarrier. Each subcarrier is
    precoded by conj(h)/|h|^2 when |h| clears tci_threshold * rms(|h|) and
    silenced otherwise; each symbol is then renormalized to the nominal
    per-symbol power budget (sum |x|^2 = num_bins).
    """
    votes = np.asarray(votes, dtype=float)
    h = np.asarray(channel_response)
    num_bins = h.size
    n_blocks = obda_blocks_needed(votes.size, num_bins)
    padded = np.zeros(2 * n_blocks * num_bins)
    padded[: votes.size] = votes
    qpsk = (padded[0::2] + 1j * padded[1::2]) / np.sqrt(2.0)
    qpsk = qpsk.reshape(n_blocks, num_bins)

    mag = np.abs(h)
    usable = mag >= tci_threshold * np.sqrt(np.mean(mag**2))
    inv = np.zeros_like(h)
    inv[usable] = np.conj(h[usable]) / mag[usable] ** 2
    x = qpsk * inv
    power = np.sum(np.abs(x) ** 2, axis=1, keepdims=True)
    scale = np.sqrt(np.where(power > 0, num_bins / np.maximum(power, 1e-300), 0.0))
    return x * scale


def decode_obda(
    received: np.ndarray, grad_dim: int, noise_power: float = 0.0
) -> np.ndarray:
    """Component-sign detection on the aggregated subcarriers.

    noise_power is accepted for interface symmetry with the energy detector's
    report; a sign decision needs no noise scaling.
    """
    del noise_power
    r = np.asarray(received).ravel()
    signs = np.empty(2 * r.size)
    signs[0::2] = r.real
    signs[1::2] = r.imag
    if grad_dim > signs.size:
        raise FramingError("received blocks carry fewer signs than grad_dim")
    return sign_pm1(signs[:grad_dim])
