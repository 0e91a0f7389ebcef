import itertools

import numpy as np
import pytest

from chirpvote._rng import keyed_rng
from chirpvote.channel import draw_epa, propagate
from chirpvote.errors import FramingError, InfeasibleError
from chirpvote.oac import (
    VotePlan,
    build_vote_plan,
    decode_obda,
    detect_mv,
    encode_csc,
    encode_obda,
    group_energies,
    guard_for_votes,
    obda_blocks_needed,
    random_csc_traffic,
    random_qpsk,
    sign_pm1,
    votes_per_block,
)
from chirpvote.waveform import ComplexSignal, WaveformConfig, build_fdss, despread, spread

CFG = WaveformConfig()
M = CFG.num_bins


class TestArithmetic:
    def test_sign_convention(self):
        np.testing.assert_array_equal(sign_pm1(np.array([-2.0, 0.0, 3.0])), [-1, 1, 1])

    @pytest.mark.parametrize("votes,guard", [(1, 26), (2, 12), (4, 5)])
    def test_guard_presets(self, votes, guard):
        assert guard_for_votes(M, votes) == guard
        assert votes_per_block(M, guard) == votes

    def test_guard_roundtrip_feasible_range(self):
        for v in range(1, M // 2 + 1):
            g = guard_for_votes(M, v)
            assert votes_per_block(M, g) >= v

    def test_guard_infeasible(self):
        with pytest.raises(InfeasibleError):
            guard_for_votes(M, 0)
        with pytest.raises(InfeasibleError):
            guard_for_votes(M, 28)

    def test_block_counts_for_large_models(self):
        assert build_vote_plan(123_090, M, 12).num_blocks == 61_545
        assert build_vote_plan(123_090, M, 5).num_blocks == 30_773
        assert build_vote_plan(5, M, 12).num_blocks == 3
        assert obda_blocks_needed(123_090, M) == 1140
        assert obda_blocks_needed(2410, M) == 23

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            build_vote_plan(0, M, 12)
        with pytest.raises(ValueError):
            build_vote_plan(10, M, -1)
        with pytest.raises(InfeasibleError):
            build_vote_plan(10, M, 27)


class TestResourceMap:
    def test_bins_disjoint_within_block(self):
        plan = build_vote_plan(8, M, 12)
        used = [
            b
            for i in range(plan.votes_per_block)
            for b in (plan.pos_bin[i], plan.neg_bin[i])
        ]
        assert len(set(used)) == len(used)
        assert all(0 <= b < M for b in used)

    def test_groups_do_not_overlap(self):
        plan = build_vote_plan(4, M, 5)
        width = plan.group_width
        starts = sorted(
            plan.pos_bin[i] for i in range(plan.votes_per_block)
        ) + sorted(plan.neg_bin[i] for i in range(plan.votes_per_block))
        starts = sorted(starts)
        assert all(b - a >= width for a, b in zip(starts, starts[1:]))

    def test_block_and_slot_indexing(self):
        plan = build_vote_plan(10, M, 12)  # 2 votes per block
        np.testing.assert_array_equal(plan.block_index, [0, 0, 1, 1, 2, 2, 3, 3, 4, 4])
        np.testing.assert_array_equal(plan.slot_index, [0, 1] * 5)


class TestEncodeDetect:
    @pytest.mark.parametrize("votes", [1, 2, 4])
    def test_noiseless_roundtrip_exact(self, votes):
        guard = guard_for_votes(M, votes)
        plan = build_vote_plan(6 * votes + 1, M, guard)
        rng = keyed_rng(0, "oac-roundtrip", votes)
        v = sign_pm1(rng.standard_normal(plan.grad_dim))
        blocks = encode_csc(plan, v, rng)
        out = detect_mv(plan, blocks)
        np.testing.assert_array_equal(out.mv, v)
        # signed energy margin (own group minus opposite group) follows the vote
        assert np.all(out.margins * v > 0.0)

    def test_encode_shape_and_unit_amplitude(self):
        plan = build_vote_plan(7, M, 12)
        rng = keyed_rng(1, "oac-amp")
        blocks = encode_csc(plan, np.ones(7, dtype=int), rng)
        assert blocks.shape == (plan.num_blocks, M)
        mags = np.abs(blocks[np.abs(blocks) > 0])
        np.testing.assert_allclose(mags, 1.0, atol=1e-12)
        # one active bin per encoded vote
        assert int(np.sum(np.abs(blocks) > 0)) == 7

    def test_margins_scale_quadratically(self):
        plan = build_vote_plan(8, M, 5)
        rng = keyed_rng(2, "oac-scale")
        v = sign_pm1(rng.standard_normal(8))
        blocks = encode_csc(plan, v, rng)
        base = detect_mv(plan, blocks).margins
        scaled = detect_mv(plan, 3.0 * blocks).margins
        np.testing.assert_allclose(scaled, 9.0 * base, rtol=1e-12)

    def test_group_energy_shape_check(self):
        plan = build_vote_plan(4, M, 12)
        with pytest.raises(FramingError):
            group_energies(plan, np.zeros((plan.num_blocks, M + 1), dtype=complex))

    def test_vote_length_check(self):
        plan = build_vote_plan(4, M, 12)
        with pytest.raises(ValueError):
            encode_csc(plan, np.ones(5, dtype=int), keyed_rng(0, "x"))


class TestMultiDeviceMargins:
    """Brute-force oracle: with unit flat channels, the expected energy margin
    of a vote group equals the vote-count difference (cross terms average out
    over the devices' independent random phases)."""

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_expected_margin_matches_vote_count(self, k):
        plan = build_vote_plan(1, M, 26)
        n_draws = 3000
        rng = keyed_rng(7, "margin-oracle", k)
        for pattern in itertools.product((-1, 1), repeat=k):
            margins = np.empty(n_draws)
            for t in range(n_draws):
                total = np.zeros((1, M), dtype=complex)
                for vote in pattern:
                    total += encode_csc(plan, np.array([vote]), rng)
                margins[t] = detect_mv(plan, total).margins[0]
            mean = margins.mean()
            se = margins.std(ddof=1) / np.sqrt(n_draws)
            expected = sum(pattern)
            if expected == 0:
                assert abs(mean) <= 4.0 * se
            else:
                assert np.sign(mean) == np.sign(expected)
                assert abs(mean - expected) <= 4.0 * se


class TestGuardIsolation:
    def test_dispersive_channel_energy_stays_in_group(self):
        # with guards sized for the delay spread, the energy that a vote
        # leaks into other groups stays an order of magnitude down
        guard = guard_for_votes(M, 2)
        plan = build_vote_plan(2, M, guard)
        fdss = build_fdss(CFG)
        rng = keyed_rng(3, "guard-iso")
        own = 0.0
        foreign = 0.0
        for _ in range(200):
            votes = sign_pm1(rng.standard_normal(2))
            blocks = encode_csc(plan, votes, rng)
            real = draw_epa(CFG, rng)
            offset = int(rng.integers(0, 5))
            rx = propagate(real, offset, spread(CFG, fdss, blocks[0]))
            post = despread(CFG, fdss, rx)
            energy = group_energies(plan, post[None, :])[0]
            chosen = np.zeros(2 * plan.votes_per_block, dtype=bool)
            for i, v in enumerate(votes):
                chosen[2 * i + (0 if v > 0 else 1)] = True
            own += float(energy[chosen].sum())
            foreign += float(energy[~chosen].sum())
        assert own / foreign > 10.0


class TestTraffic:
    def test_random_csc_traffic_shape_and_occupancy(self):
        rng = keyed_rng(0, "traffic")
        bins = random_csc_traffic(M, 2, 40, rng)
        assert bins.shape == (40, M)
        active = np.sum(np.abs(bins) > 0, axis=1)
        np.testing.assert_array_equal(active, 2 * np.ones(40))

    def test_random_qpsk_constellation(self):
        rng = keyed_rng(1, "traffic")
        q = random_qpsk(M, 25, rng)
        assert q.shape == (25, M)
        np.testing.assert_allclose(np.abs(q), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.abs(q.real), np.abs(q.imag), atol=1e-12)


class TestObda:
    def test_flat_channel_roundtrip(self):
        rng = keyed_rng(0, "obda")
        q = 2410
        votes = sign_pm1(rng.standard_normal(q))
        h = np.ones(M, dtype=complex)
        tx = encode_obda(votes, h)
        assert tx.shape == (obda_blocks_needed(q, M), M)
        out = decode_obda(tx, q)
        np.testing.assert_array_equal(out, votes)

    def test_faded_channel_inverted_before_aggregation(self):
        rng = keyed_rng(1, "obda")
        votes = sign_pm1(rng.standard_normal(108))
        h = 0.5 * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
        h[np.abs(h) < 0.25] += 0.5  # keep all bins above the truncation cut
        tx = encode_obda(votes, h)
        out = decode_obda(h * tx, 108)
        np.testing.assert_array_equal(out, votes)

    def test_truncation_skips_deep_fades(self):
        votes = np.ones(108, dtype=int)
        h = np.ones(M, dtype=complex)
        h[7] = 1e-6  # far below threshold * rms
        tx = encode_obda(votes, h, tci_threshold=0.1)
        np.testing.assert_allclose(tx[:, 7], 0.0)
        assert np.all(np.abs(tx[:, 8]) > 0)

    def test_per_block_power_renormalized(self):
        rng = keyed_rng(2, "obda")
        votes = sign_pm1(rng.standard_normal(2 * M * 3))
        h = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        tx = encode_obda(votes, h)
        powers = np.sum(np.abs(tx) ** 2, axis=1)
        np.testing.assert_allclose(powers, M, rtol=1e-9)

    def test_decode_needs_enough_blocks(self):
        with pytest.raises(FramingError):
            decode_obda(np.zeros((1, M), dtype=complex), 2410)

    def test_tail_padding_ignored(self):
        rng = keyed_rng(3, "obda")
        q = 100  # not a multiple of 2M
        votes = sign_pm1(rng.standard_normal(q))
        tx = encode_obda(votes, np.ones(M, dtype=complex))
        out = decode_obda(tx, q)
        assert out.shape == (q,)
        np.testing.assert_array_equal(out, votes)
