"""Federated sign-vote training over the simulated radio links.

Each round, every edge device computes a mini-batch gradient of a shared
two-layer MLP, reduces it to per-coordinate sign votes, and the votes are
aggregated to a majority decision that all devices apply with a common step
size.  Three aggregation paths are provided:

* ``ideal``    -- error-free majority vote (upper bound);
* ``csc_mv``   -- votes ride on chirp tones with energy detection at the
                  receiver (no channel knowledge anywhere);
* ``obda``     -- QPSK sign modulation with truncated channel inversion at
                  the transmitters (needs channel knowledge).

The radio paths share batch, channel, timing-offset and noise draws through
keyed RNG streams so schemes can be compared on identical realisations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import keyed_rng
from .channel import draw_epa, draw_sync_offset, propagate, superpose
from .datasets import Dataset
from .deployment import Deployment, PowerControlParams, link_power
from .errors import ConfigError
from .oac import (
    VotePlan,
    build_vote_plan,
    detect_mv,
    decode_obda,
    encode_csc,
    encode_obda,
    guard_for_votes,
    obda_blocks_needed,
    sign_pm1,
)
from .waveform import WaveformConfig, build_fdss, despread, spread

INPUT_DIM = 64
HIDDEN_DIM = 32
NUM_CLASSES = 10
#: total trainable parameters: 64*32 + 32 + 32*10 + 10
PARAM_DIM = INPUT_DIM * HIDDEN_DIM + HIDDEN_DIM + HIDDEN_DIM * NUM_CLASSES + NUM_CLASSES


def init_params(seed: int) -> np.ndarray:
    """Flat parameter vector; scaled-Gaussian weights, zero biases."""
    rng = keyed_rng(seed, "model-init")
    w1 = rng.standard_normal((INPUT_DIM, HIDDEN_DIM)) / math.sqrt(INPUT_DIM)
    w2 = rng.standard_normal((HIDDEN_DIM, NUM_CLASSES)) / math.sqrt(HIDDEN_DIM)
    return np.concatenate(
        [w1.ravel(), np.zeros(HIDDEN_DIM), w2.ravel(), np.zeros(NUM_CLASSES)]
    )


def _unpack(w: np.ndarray):
    i = 0
    w1 = w[i : i + INPUT_DIM * HIDDEN_DIM].reshape(INPUT_DIM, HIDDEN_DIM)
    i += INPUT_DIM * HIDDEN_DIM
    b1 = w[i : i + HIDDEN_DIM]
    i += HIDDEN_DIM
    w2 = w[i : i + HIDDEN_DIM * NUM_CLASSES].reshape(HIDDEN_DIM, NUM_CLASSES)
    i += HIDDEN_DIM * NUM_CLASSES
    b2 = w[i : i + NUM_CLASSES]
    return w1, b1, w2, b2


def forward_logits(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    w1, b1, w2, b2 = _unpack(np.asarray(w, dtype=float))
    h = np.tanh(x @ w1 + b1)
    return h @ w2 + b2


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_gradient(
    w: np.ndarray, x: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its flat gradient."""
    w = np.asarray(w, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=int)
    if w.shape != (PARAM_DIM,):
        raise ValueError(f"parameter vector must have length {PARAM_DIM}")
    w1, b1, w2, b2 = _unpack(w)
    n = x.shape[0]
    h = np.tanh(x @ w1 + b1)
    probs = _softmax(h @ w2 + b2)
    loss = float(-np.mean(np.log(probs[np.arange(n), y] + 1e-300)))
    delta2 = probs.copy()
    delta2[np.arange(n), y] -= 1.0
    delta2 /= n
    g_w2 = h.T @ delta2
    g_b2 = delta2.sum(axis=0)
    delta1 = (delta2 @ w2.T) * (1.0 - h**2)
    g_w1 = x.T @ delta1
    g_b1 = delta1.sum(axis=0)
    return loss, np.concatenate([g_w1.ravel(), g_b1, g_w2.ravel(), g_b2])


def mean_loss(w: np.ndarray, data: Dataset) -> float:
    loss, _ = loss_and_gradient(w, data.features, data.labels)
    return loss


def predict(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.argmax(forward_logits(w, np.atleast_2d(x)), axis=1)


def evaluate(w: np.ndarray, data: Dataset) -> float:
    """Classification accuracy on the dataset."""
    return float(np.mean(predict(w, data.features) == data.labels))


def local_gradient(
    w: np.ndarray, data: Dataset, batch_size: int, rng: np.random.Generator
) -> np.ndarray:
    """Mini-batch gradient on a uniform without-replacement draw."""
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    n = len(data)
    take = min(batch_size, n)
    idx = rng.choice(n, size=take, replace=False)
    _, grad = loss_and_gradient(w, data.features[idx], data.labels[idx])
    return grad


def ideal_mv(votes: np.ndarray) -> np.ndarray:
    """Error-free majority vote over per-device sign votes (num_eds, dim)."""
    votes = np.atleast_2d(np.asarray(votes))
    if votes.shape[0] < 1:
        raise ValueError("need at least one voter")
    return sign_pm1(votes.sum(axis=0))


def partition_dataset(
    full: Dataset, deployment: Deployment, mode: str = "homogeneous"
) -> list[Dataset]:
    """Split a dataset across the deployed devices (a true partition).

    ``homogeneous``   -- each label's samples round-robin over all devices.
    ``heterogeneous`` -- devices inside radius r_max/sqrt(2) receive only
    labels 0-4 and the outer ring only labels 5-9, so that near and far
    devices hold disjoint halves of the task.
    """
    k = deployment.num_eds
    if len(full) < k:
        raise ConfigError("fewer samples than devices")
    assignment = np.empty(len(full), dtype=int)
    if mode == "homogeneous":
        groups = [(np.arange(k), np.arange(10))]
    elif mode == "heterogeneous":
        boundary = deployment.r_max / math.sqrt(2.0)
        inner = np.flatnonzero(deployment.ed_distances <= boundary)
        outer = np.flatnonzero(deployment.ed_distances > boundary)
        if inner.size == 0 or outer.size == 0:
            raise ConfigError("heterogeneous split needs devices on both sides of the boundary")
        groups = [(inner, np.arange(5)), (outer, np.arange(5, 10))]
    else:
        raise ConfigError(f"unknown partition mode {mode!r}")
    for eds, labels in groups:
        pool = np.flatnonzero(np.isin(full.labels, labels))
        assignment[pool] = eds[np.arange(pool.size) % eds.size]
    return [full.subset(np.flatnonzero(assignment == e)) for e in range(k)]


@dataclass(frozen=True)
class TrainSetup:
    """Everything a training run needs besides the mutable model state."""

    wave: WaveformConfig
    deployment: Deployment
    datasets: tuple[Dataset, ...]
    test_set: Dataset
    power: PowerControlParams
    coverage_csc_m: float
    coverage_obda_m: float
    seed: int = 0
    batch_size: int = 32
    votes_per_block: int = 2
    max_sync_offset: int = 4
    tci_threshold: float = 0.1

    def __post_init__(self) -> None:
        if len(self.datasets) != self.deployment.num_eds:
            raise ConfigError("one local dataset per device is required")
        if self.batch_size < 1 or self.votes_per_block < 1:
            raise ConfigError("batch_size and votes_per_block must be positive")
        if self.max_sync_offset < 0:
            raise ConfigError("max_sync_offset must be non-negative")


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    train_loss: float
    test_accuracy: float
    per_ed_loss: tuple[float, ...]


@dataclass(frozen=True)
class TrainState:
    weights: np.ndarray
    step_size: float
    round_index: int = 0
    history: tuple[RoundRecord, ...] = field(default_factory=tuple)


def initial_state(setup: TrainSetup, step_size: float) -> TrainState:
    """Common starting point: the initial weights depend only on the seed,
    so different aggregation schemes start from the same model."""
    if step_size <= 0:
        raise ConfigError("step_size must be positive")
    return TrainState(weights=init_params(setup.seed), step_size=step_size)


def default_step_size(smoothness_l1: float, batch_size: int) -> float:
    """Step size 1/sqrt(L1-smoothness * batch), a standard sign-descent rule."""
    if smoothness_l1 <= 0 or batch_size < 1:
        raise ValueError("smoothness_l1 and batch_size must be positive")
    return 1.0 / math.sqrt(smoothness_l1 * batch_size)


def apply_update(state: TrainState, mv: np.ndarray, record: RoundRecord) -> TrainState:
    mv = np.asarray(mv)
    if mv.shape != state.weights.shape:
        raise ValueError("majority-vote vector must match the parameter shape")
    return TrainState(
        weights=state.weights - state.step_size * mv,
        step_size=state.step_size,
        round_index=state.round_index + 1,
        history=state.history + (record,),
    )


def _collect_votes(state: TrainState, setup: TrainSetup) -> np.ndarray:
    votes = np.empty((setup.deployment.num_eds, PARAM_DIM))
    for k, data in enumerate(setup.datasets):
        rng = keyed_rng(setup.seed, "batch", state.round_index, k)
        votes[k] = sign_pm1(local_gradient(state.weights, data, setup.batch_size, rng))
    return votes


def _per_ed_links(setup: TrainSetup, coverage_m: float) -> np.ndarray:
    return np.array(
        [link_power(setup.power, coverage_m, d) for d in setup.deployment.ed_distances]
    )


def _csc_plan(setup: TrainSetup) -> VotePlan:
    guard = guard_for_votes(setup.wave.num_bins, setup.votes_per_block)
    return build_vote_plan(PARAM_DIM, setup.wave.num_bins, guard)


def _channel_draws(setup: TrainSetup, round_index: int, k: int):
    realization = draw_epa(setup.wave, keyed_rng(setup.seed, "channel", round_index, k))
    offset = draw_sync_offset(
        setup.max_sync_offset, keyed_rng(setup.seed, "sync", round_index, k)
    )
    return realization, offset


def _csc_majority(
    state: TrainState, setup: TrainSetup, votes: np.ndarray, noise_power: float
) -> np.ndarray:
    """Frequency-domain simulation of the chirp majority-vote uplink.

    Works bin-by-bin on the occupied subcarriers: each chirp tone is a unit
    spectral impulse, so a device's transmitted spectrum is a sum of
    phase-rotated impulse columns; the multipath channel and timing offset
    enter as the per-bin response, and receiver noise is white across bins
    because the transforms are orthonormal.  Matches the sample-level chain
    (spread / propagate / superpose / despread) to floating-point accuracy;
    the sample-level chain stays available via ``csc_majority_sampled``.
    """
    wave = setup.wave
    plan = _csc_plan(setup)
    m = wave.num_bins
    fdss = build_fdss(wave)
    bins = wave.bin_indices
    # spectral template: column t holds DFT of a unit impulse at bin index b
    table = np.exp(
        -2j * np.pi * np.outer(np.arange(m), bins % m) / m
    ) / math.sqrt(m)
    links = _per_ed_links(setup, setup.coverage_csc_m)
    amp = math.sqrt(wave.idft_size / setup.votes_per_block)
    num_blocks = plan.num_blocks
    received = np.zeros((num_blocks, m), dtype=complex)
    pad = num_blocks * plan.votes_per_block - plan.grad_dim
    for k in range(votes.shape[0]):
        rng = keyed_rng(setup.seed, "phase", state.round_index, k)
        phases = np.exp(2j * np.pi * rng.random(plan.grad_dim))
        choice = np.where(votes[k] > 0, plan.pos_bin, plan.neg_bin)
        if pad:
            phases = np.concatenate([phases, np.zeros(pad)])
            choice = np.concatenate([choice, np.zeros(pad, dtype=int)])
        phases = phases.reshape(num_blocks, plan.votes_per_block)
        choice = choice.reshape(num_blocks, plan.votes_per_block)
        spectrum = np.zeros((num_blocks, m), dtype=complex)
        for u in range(plan.votes_per_block):
            spectrum += phases[:, u, None] * table[choice[:, u]]
        realization, offset = _channel_draws(setup, state.round_index, k)
        response = realization.frequency_response(bins, wave.idft_size, offset)
        received += math.sqrt(links[k]) * amp * (response * fdss) * spectrum
    if noise_power > 0:
        nrng = keyed_rng(setup.seed, "noise", state.round_index)
        received += math.sqrt(noise_power / 2.0) * (
            nrng.standard_normal(received.shape)
            + 1j * nrng.standard_normal(received.shape)
        )
    shaped = np.conj(fdss) * received
    folded = np.zeros_like(shaped)
    folded[:, bins % m] = shaped
    despreads = np.fft.ifft(folded, norm="ortho", axis=1)
    return detect_mv(plan, despreads).mv


def csc_majority_sampled(
    state: TrainState, setup: TrainSetup, votes: np.ndarray, noise_power: float
) -> np.ndarray:
    """Sample-level reference for the chirp uplink: full spread / multipath /
    superposition / despread chain.  Slower than the spectral path but uses
    the identical keyed draws for phases, channels and offsets, so the two
    agree exactly when noise is disabled."""
    wave = setup.wave
    plan = _csc_plan(setup)
    fdss = build_fdss(wave)
    links = _per_ed_links(setup, setup.coverage_csc_m)
    amp = math.sqrt(wave.idft_size / setup.votes_per_block)
    arrivals = []  # per device: (list of per-block ComplexSignal, link power)
    for k in range(votes.shape[0]):
        rng = keyed_rng(setup.seed, "phase", state.round_index, k)
        blocks = encode_csc(plan, votes[k], rng) * amp
        realization, offset = _channel_draws(setup, state.round_index, k)
        rx = [propagate(realization, offset, spread(wave, fdss, row)) for row in blocks]
        arrivals.append((rx, links[k]))
    noise_rng = keyed_rng(setup.seed, "noise", state.round_index)
    despreads = np.vstack(
        [
            despread(
                wave,
                fdss,
                superpose([(rx[s], p) for rx, p in arrivals], noise_power, noise_rng),
            )
            for s in range(plan.num_blocks)
        ]
    )
    return detect_mv(plan, despreads).mv


def _obda_majority(
    state: TrainState, setup: TrainSetup, votes: np.ndarray, noise_power: float
) -> np.ndarray:
    """Frequency-domain simulation of the QPSK/channel-inversion uplink."""
    wave = setup.wave
    m = wave.num_bins
    links = _per_ed_links(setup, setup.coverage_obda_m)
    amp = math.sqrt(wave.idft_size / m)
    blocks = obda_blocks_needed(PARAM_DIM, m)
    received = np.zeros((blocks, m), dtype=complex)
    for k in range(votes.shape[0]):
        realization, offset = _channel_draws(setup, state.round_index, k)
        response = realization.frequency_response(
            wave.bin_indices, wave.idft_size, offset
        )
        tx = encode_obda(votes[k], response, setup.tci_threshold)
        received += math.sqrt(links[k]) * amp * response * tx
    if noise_power > 0:
        nrng = keyed_rng(setup.seed, "noise", state.round_index)
        received += math.sqrt(noise_power / 2.0) * (
            nrng.standard_normal(received.shape)
            + 1j * nrng.standard_normal(received.shape)
        )
    return decode_obda(received, PARAM_DIM, noise_power)


PHY_MODES = ("ideal", "csc_mv", "obda")


def run_round(state: TrainState, setup: TrainSetup, phy: str, snr_db: float) -> TrainState:
    """One training round: local gradients, sign votes, aggregation over the
    selected physical layer, then the shared model update.  The recorded
    loss/accuracy describe the model after the update."""
    if phy not in PHY_MODES:
        raise ConfigError(f"unknown phy mode {phy!r}; expected one of {PHY_MODES}")
    votes = _collect_votes(state, setup)
    noise_power = setup.power.p_ref * 10.0 ** (-snr_db / 10.0)
    if phy == "ideal":
        mv = ideal_mv(votes)
    elif phy == "csc_mv":
        mv = _csc_majority(state, setup, votes, noise_power)
    else:
        mv = _obda_majority(state, setup, votes, noise_power)
    new_weights = state.weights - state.step_size * mv
    per_ed = tuple(mean_loss(new_weights, d) for d in setup.datasets)
    record = RoundRecord(
        round_index=state.round_index,
        train_loss=float(np.mean(per_ed)),
        test_accuracy=evaluate(new_weights, setup.test_set),
        per_ed_loss=per_ed,
    )
    return apply_update(state, mv, record)


def run_training(
    setup: TrainSetup, phy: str, rounds: int, snr_db: float, step_size: float
) -> TrainState:
    if rounds < 1:
        raise ConfigError("rounds must be positive")
    state = initial_state(setup, step_size)
    for _ in range(rounds):
        state = run_round(state, setup, phy, snr_db)
    return state


def loss_by_distance(state: TrainState, setup: TrainSetup) -> tuple[np.ndarray, np.ndarray]:
    """Final per-device training loss against device distance."""
    losses = np.array([mean_loss(state.weights, d) for d in setup.datasets])
    return setup.deployment.ed_distances.copy(), losses


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the expected-gradient-norm guarantee for majority-vote
    sign descent with an error-free vote channel."""

    smoothness: np.ndarray  # per-coordinate smoothness constants (q,)
    grad_noise_scale: np.ndarray  # per-coordinate gradient-noise scale (q,)
    initial_gap: float  # F(w_0) - F*
    step_scale: float  # gamma in the step-size schedule
    num_workers: int
    detection_snr: float  # xi, quality of the vote channel
    num_rounds: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "smoothness", np.asarray(self.smoothness, dtype=float))
        object.__setattr__(
            self, "grad_noise_scale", np.asarray(self.grad_noise_scale, dtype=float)
        )


def convergence_bound(p: BoundParams) -> float:
    """Upper bound on the average L1 gradient norm after ``num_rounds`` rounds.

    Decreases like 1/sqrt(num_rounds); looser for noisier gradients, tighter
    for more workers or a cleaner vote channel.
    """
    if p.num_rounds < 1:
        raise ValueError("num_rounds must be positive")
    if p.num_workers < 1:
        raise ValueError("num_workers must be positive")
    if p.detection_snr <= 0:
        raise ValueError("detection_snr must be positive")
    if p.step_scale <= 0:
        raise ValueError("step_scale must be positive")
    if np.any(p.smoothness < 0) or np.any(p.grad_noise_scale < 0):
        raise ValueError("smoothness and noise scales must be non-negative")
    if p.initial_gap < 0:
        raise ValueError("initial_gap must be non-negative")
    l1_smooth = float(np.sum(p.smoothness))
    l1_noise = float(np.sum(p.grad_noise_scale))
    a = (1.0 + 2.0 / (p.detection_snr * p.num_workers)) / math.sqrt(p.step_scale)
    drift = a * math.sqrt(l1_smooth) * (p.initial_gap + p.step_scale / 2.0)
    noise = (2.0 * math.sqrt(2.0 * p.step_scale) / 3.0) * l1_noise
    return (drift + noise) / math.sqrt(p.num_rounds)
