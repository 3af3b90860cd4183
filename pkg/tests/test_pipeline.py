import numpy as np
import pytest

from conftest import MS_FACTORS, MS_SHAPE, SVD_FACTORS, SVD_SHAPE
from noiseshield.bitcodec import WatermarkKey, bit_accuracy, random_payload
from noiseshield.calibration import derive_thresholds, sample_distributions
from noiseshield.channel import (
    ChannelSpec,
    TemporalEdit,
    apply_channel,
    permutation_to_edits,
    random_block_region,
    tamper_spatial,
    tamper_temporal,
)
from noiseshield.pipeline import (
    embed,
    extract,
    extract_synced,
    localize,
    template_bits,
)
from noiseshield.tensors import SeededRng


@pytest.fixture(scope="module")
def identity_table(fixed_key):
    wm, orig = sample_distributions(
        12, MS_SHAPE, MS_FACTORS, fixed_key, ChannelSpec("identity"), 3,
        SeededRng(100, 1 << 20),
    )
    return derive_thresholds(wm, orig, 99, 0.55, 0.5)


def _embedded(key, seed, shape=MS_SHAPE, factors=MS_FACTORS):
    payload = random_payload(factors.n_bits(shape), SeededRng(seed, 1))
    noise, tp = embed(payload, key, shape, factors, SeededRng(seed, 2))
    return payload, noise, tp


class TestChain:
    @pytest.mark.parametrize(
        "shape,factors", [(MS_SHAPE, MS_FACTORS), (SVD_SHAPE, SVD_FACTORS)]
    )
    def test_identity_round_trip(self, fixed_key, shape, factors):
        payload, noise, _ = _embedded(fixed_key, 1, shape, factors)
        assert bit_accuracy(extract(noise, fixed_key, factors), payload) == 1.0

    def test_wrong_key_near_half(self, fixed_key):
        payload, noise, _ = _embedded(fixed_key, 2)
        other = WatermarkKey(bytes(range(2, 34)), bytes(12))
        acc = bit_accuracy(extract(noise, other, MS_FACTORS), payload)
        assert abs(acc - 0.5) < 0.12  # 512 independent fair bits

    def test_extraction_survives_bitflip(self, fixed_key):
        payload, noise, _ = _embedded(fixed_key, 3)
        noisy = apply_channel(noise, ChannelSpec("bitflip", 0.2, seed=3))
        assert bit_accuracy(extract(noisy, fixed_key, MS_FACTORS), payload) == 1.0

    def test_synced_extraction_after_frame_edits(self, fixed_key):
        # shifted frames decrypt against the wrong keystream segment, so
        # recovery must re-synchronize frame positions first
        payload, noise, _ = _embedded(fixed_key, 4)
        dropped, _ = tamper_temporal(noise, [TemporalEdit("drop", 5)])
        acc_drop = bit_accuracy(
            extract_synced(dropped, fixed_key, MS_FACTORS, MS_SHAPE.f), payload
        )
        inserted, _ = tamper_temporal(
            noise, [TemporalEdit("insert", 2, "gaussian")], SeededRng(4)
        )
        acc_ins = bit_accuracy(
            extract_synced(inserted, fixed_key, MS_FACTORS, MS_SHAPE.f), payload
        )
        perm = SeededRng(4, 9).generator().permutation(16)
        shuffled, _ = tamper_temporal(noise, permutation_to_edits(list(perm)))
        acc_perm = bit_accuracy(
            extract_synced(shuffled, fixed_key, MS_FACTORS, MS_SHAPE.f), payload
        )
        assert acc_drop == 1.0 and acc_ins == 1.0 and acc_perm == 1.0

    def test_in_place_extraction_collapses_after_shift(self, fixed_key):
        # documents why synchronization exists: every reversed frame decrypts
        # against the wrong keystream segment, so in-place decoding is chance
        payload, noise, _ = _embedded(fixed_key, 5)
        reversed_frames, _ = tamper_temporal(
            noise, permutation_to_edits(list(range(15, -1, -1)))
        )
        acc = bit_accuracy(extract(reversed_frames, fixed_key, MS_FACTORS), payload)
        assert abs(acc - 0.5) < 0.12
        synced = extract_synced(reversed_frames, fixed_key, MS_FACTORS, MS_SHAPE.f)
        assert bit_accuracy(synced, payload) == 1.0


class TestLocalize:
    def test_untampered_identity(self, fixed_key, identity_table):
        _, noise, tp = _embedded(fixed_key, 10)
        res = localize(noise, tp, identity_table)
        assert np.array_equal(res.positions, np.arange(16))
        assert not res.mask.any()
        assert np.array_equal(res.refined, np.ones_like(res.refined))

    def test_region_tamper_localized(self, fixed_key, identity_table):
        _, noise, tp = _embedded(fixed_key, 11)
        region = random_block_region(MS_SHAPE, 4, SeededRng(11, 3))
        tampered = tamper_spatial(noise, region, SeededRng(11, 4))
        res = localize(tampered, tp, identity_table)
        inside = res.mask[region.mask.astype(bool)]
        outside = res.mask[~region.mask.astype(bool)]
        assert inside.mean() > 0.9
        assert outside.mean() < 0.02

    def test_inserted_frame_foreign_and_fully_masked(self, fixed_key, identity_table):
        _, noise, tp = _embedded(fixed_key, 12)
        tampered, origin = tamper_temporal(
            noise, [TemporalEdit("insert", 7, "gaussian")], SeededRng(12)
        )
        res = localize(tampered, tp, identity_table)
        assert res.positions[7] == -1
        assert np.array_equal(res.positions, origin)
        assert res.mask[7].all()
        assert not res.mask[np.arange(17) != 7].any()

    def test_permutation_consistency_of_masks(self, fixed_key, identity_table):
        # masks must be identical whether or not frames were permuted
        _, noise, tp = _embedded(fixed_key, 13)
        region = random_block_region(MS_SHAPE, 4, SeededRng(13, 3))
        tampered = tamper_spatial(noise, region, SeededRng(13, 4))
        res_plain = localize(tampered, tp, identity_table)

        perm = SeededRng(13, 5).generator().permutation(16)
        permuted, origin = tamper_temporal(tampered, permutation_to_edits(list(perm)))
        res_perm = localize(permuted, tp, identity_table)

        assert np.array_equal(res_perm.positions, origin)
        for p, q in enumerate(origin):
            assert np.array_equal(res_perm.refined[p], res_plain.refined[q])
            assert np.array_equal(res_perm.mask[p], res_plain.mask[q])

    def test_soft_tamper_orientation(self, fixed_key, identity_table):
        _, noise, tp = _embedded(fixed_key, 14)
        region = random_block_region(MS_SHAPE, 4, SeededRng(14, 3))
        tampered = tamper_spatial(noise, region, SeededRng(14, 4))
        res = localize(tampered, tp, identity_table)
        inside_score = res.soft_tamper[region.mask.astype(bool)].mean()
        outside_score = res.soft_tamper[~region.mask.astype(bool)].mean()
        assert inside_score > outside_score


class TestTemplateBits:
    def test_template_matches_noise_signs(self, fixed_key):
        payload, noise, tp = _embedded(fixed_key, 15)
        rebuilt = template_bits(payload, fixed_key, MS_SHAPE, MS_FACTORS)
        assert np.array_equal(rebuilt.bits, tp.bits)
        assert np.array_equal((noise.data > 0).astype(np.uint8), tp.bits)
