import numpy as np
import pytest
from scipy import integrate, stats

from noiseshield.channel import (
    ChannelError,
    ChannelSpec,
    RegionMask,
    TemporalEdit,
    apply_channel,
    edits_from_json,
    edits_to_json,
    permutation_to_edits,
    random_block_region,
    tamper_spatial,
    tamper_temporal,
)
from noiseshield.noisemap import invert_bits, sample_noise
from noiseshield.tensors import BitGrid4D, LatentTensor, SeededRng, Shape4


def gaussian_flip_oracle(sigma: float) -> float:
    """Quadrature estimate of the sign-flip probability when N(0,1) noise of
    scale sigma is added to a standard normal sample."""
    f = lambda b: 2.0 * stats.norm.pdf(b) * stats.norm.cdf(-b / sigma)
    value, _err = integrate.quad(f, 0.0, np.inf)
    return value


def _watermarked(shape: Shape4, seed: int) -> tuple[LatentTensor, BitGrid4D]:
    gen = SeededRng(seed, 77).generator()
    tp = BitGrid4D.from_array(gen.integers(0, 2, size=shape.dims, dtype=np.uint8))
    return sample_noise(tp, SeededRng(seed, 78)), tp


class TestChannelSpec:
    def test_parse(self):
        assert ChannelSpec.parse("identity") == ChannelSpec("identity", 0.0, 0)
        assert ChannelSpec.parse("bitflip:0.1", seed=7) == ChannelSpec("bitflip", 0.1, 7)
        assert ChannelSpec.parse("gaussian:0.5") == ChannelSpec("gaussian", 0.5, 0)

    @pytest.mark.parametrize("bad", ["bitflip", "bitflip:0.6", "warp:1", "gaussian:-1"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ChannelError):
            ChannelSpec.parse(bad)

    def test_dict_round_trip(self):
        spec = ChannelSpec("gaussian", 0.3, 11)
        assert ChannelSpec.from_dict(spec.to_dict()) == spec


class TestApplyChannel:
    def test_identity_unchanged(self):
        z, tp = _watermarked(Shape4(2, 4, 8, 8), 1)
        out = apply_channel(z, ChannelSpec("identity"))
        assert np.array_equal(out.data, z.data)
        assert np.array_equal(invert_bits(out).bits, tp.bits)

    def test_bitflip_rate(self):
        # 10^6 elements at eps = 0.1: changed-bit fraction concentrates hard.
        shape = Shape4(16, 4, 125, 125)
        z, tp = _watermarked(shape, 2)
        out = apply_channel(z, ChannelSpec("bitflip", 0.1, seed=5))
        changed = float(np.mean(invert_bits(out).bits != tp.bits))
        assert 0.097 <= changed <= 0.103

    def test_bitflip_preserves_gaussian_marginal(self):
        shape = Shape4(8, 4, 25, 250)
        z, _ = _watermarked(shape, 3)
        out = apply_channel(z, ChannelSpec("bitflip", 0.3, seed=6))
        d = stats.kstest(out.data.reshape(-1), "norm").statistic
        assert d < 1.6276 / np.sqrt(shape.count)

    def test_bitflip_zero_rate_is_identity(self):
        z, _ = _watermarked(Shape4(2, 4, 8, 8), 4)
        out = apply_channel(z, ChannelSpec("bitflip", 0.0, seed=1))
        assert np.array_equal(out.data, z.data)

    def test_gaussian_flip_probability_matches_quadrature(self):
        shape = Shape4(16, 4, 125, 125)
        z, tp = _watermarked(shape, 7)
        out = apply_channel(z, ChannelSpec("gaussian", 1.0, seed=8))
        flipped = float(np.mean(invert_bits(out).bits != tp.bits))
        oracle = gaussian_flip_oracle(1.0)
        assert oracle == pytest.approx(0.25, abs=1e-6)
        assert flipped == pytest.approx(oracle, abs=0.005)

    def test_deterministic_given_seed(self):
        z, _ = _watermarked(Shape4(2, 4, 8, 8), 9)
        spec = ChannelSpec("gaussian", 0.5, seed=3)
        assert np.array_equal(apply_channel(z, spec).data, apply_channel(z, spec).data)


class TestTamperTemporal:
    def _latent(self, f=4):
        gen = SeededRng(20, 1).generator()
        return LatentTensor.from_array(gen.standard_normal((f, 2, 4, 4)))

    def test_swap_bookkeeping(self):
        z = self._latent()
        out, origin = tamper_temporal(z, [TemporalEdit("swap", 2)])
        assert list(origin) == [0, 1, 3, 2]
        assert np.array_equal(out.data[2], z.data[3])

    def test_drop_front(self):
        z = self._latent()
        out, origin = tamper_temporal(z, [TemporalEdit("drop", 0)])
        assert out.shape.f == 3
        assert list(origin) == [1, 2, 3]

    def test_insert_gaussian(self):
        z = self._latent()
        out, origin = tamper_temporal(
            z, [TemporalEdit("insert", 1, "gaussian")], SeededRng(5)
        )
        assert out.shape.f == 5
        assert list(origin) == [0, -1, 1, 2, 3]

    def test_insert_adjacent_duplicates(self):
        z = self._latent()
        out, origin = tamper_temporal(z, [TemporalEdit("insert", 2, "adjacent")])
        assert list(origin) == [0, 1, -1, 2, 3]
        assert np.array_equal(out.data[2], out.data[3])

    def test_sequential_edits(self):
        z = self._latent()
        out, origin = tamper_temporal(
            z, [TemporalEdit("drop", 0), TemporalEdit("swap", 0)]
        )
        assert list(origin) == [2, 1, 3]

    def test_gaussian_insert_requires_rng(self):
        with pytest.raises(ChannelError):
            tamper_temporal(self._latent(), [TemporalEdit("insert", 0, "gaussian")])

    def test_invalid_indices(self):
        z = self._latent()
        with pytest.raises(ChannelError):
            tamper_temporal(z, [TemporalEdit("drop", 4)])
        with pytest.raises(ChannelError):
            tamper_temporal(z, [TemporalEdit("swap", 3)])
        one = LatentTensor.from_array(np.zeros((1, 1, 2, 2)))
        with pytest.raises(ChannelError):
            tamper_temporal(one, [TemporalEdit("drop", 0)])

    def test_edits_json_round_trip(self):
        edits = [TemporalEdit("swap", 1), TemporalEdit("insert", 0, "adjacent")]
        assert edits_from_json(edits_to_json(edits)) == edits

    def test_permutation_to_edits(self):
        perm = [3, 0, 2, 1, 4]
        z = self._latent(5)
        out, origin = tamper_temporal(z, permutation_to_edits(perm))
        assert list(origin) == perm
        for p, q in enumerate(perm):
            assert np.array_equal(out.data[p], z.data[q])


class TestTamperSpatial:
    def test_empty_mask_unchanged(self):
        z, _ = _watermarked(Shape4(2, 4, 8, 8), 30)
        mask = RegionMask(np.zeros((2, 8, 8), dtype=np.uint8))
        out = tamper_spatial(z, mask, SeededRng(1))
        assert np.array_equal(out.data, z.data)

    def test_full_mask_agreement_near_half(self):
        shape = Shape4(4, 4, 64, 64)
        z, tp = _watermarked(shape, 31)
        mask = RegionMask(np.ones((4, 64, 64), dtype=np.uint8))
        out = tamper_spatial(z, mask, SeededRng(2))
        agreement = float(np.mean(invert_bits(out).bits == tp.bits))
        assert abs(agreement - 0.5) <= 3 * 0.5 / np.sqrt(shape.count)

    def test_half_frame_mask(self):
        shape = Shape4(2, 4, 32, 32)
        z, tp = _watermarked(shape, 32)
        mask = RegionMask.rectangle(shape, (0, 2), (0, 16), (0, 32))
        out = tamper_spatial(z, mask, SeededRng(3))
        iv = invert_bits(out).bits
        outside = np.mean(iv[:, :, 16:, :] == tp.bits[:, :, 16:, :])
        inside = np.mean(iv[:, :, :16, :] == tp.bits[:, :, :16, :])
        assert outside == 1.0
        n_inside = 2 * 4 * 16 * 32
        assert abs(inside - 0.5) <= 4 * 0.5 / np.sqrt(n_inside)

    def test_dim_mismatch(self):
        z, _ = _watermarked(Shape4(2, 4, 8, 8), 33)
        with pytest.raises(ChannelError):
            tamper_spatial(z, RegionMask(np.zeros((2, 4, 4), np.uint8)), SeededRng(1))


class TestRandomBlockRegion:
    def test_alignment_and_bounds(self):
        shape = Shape4(16, 4, 32, 32)
        for seed in range(20):
            region = random_block_region(shape, 4, SeededRng(seed))
            mask = region.mask
            assert mask.shape == (16, 32, 32)
            assert mask.any()
            # region bounds must be multiples of 4 on every axis
            for axis in range(3):
                marks = np.where(mask.any(axis=tuple(i for i in range(3) if i != axis)))[0]
                assert marks[0] % 4 == 0 and (marks[-1] + 1) % 4 == 0
                assert len(marks) == marks[-1] - marks[0] + 1

    def test_requires_divisible_dims(self):
        with pytest.raises(ChannelError):
            random_block_region(Shape4(15, 4, 32, 32), 4, SeededRng(0))
