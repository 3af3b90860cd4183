import numpy as np
import pytest

from noiseshield.metrics import (
    MetricsError,
    auc,
    binary_mask_metrics,
    mask_metrics,
)
from noiseshield.tensors import SeededRng


class TestBinaryMaskMetrics:
    def test_perfect_match(self):
        gt = np.zeros((4, 8, 8), dtype=np.uint8)
        gt[1, 2:5, 2:5] = 1
        assert binary_mask_metrics(gt, gt) == (1.0, 1.0, 1.0, 1.0)

    def test_half_coverage_no_false_positives(self):
        gt = np.zeros((1, 4, 4), dtype=np.uint8)
        gt[0, :2, :] = 1  # 8 positions
        pred = np.zeros_like(gt)
        pred[0, 0, :] = 1  # covers exactly half of gt
        f1, precision, recall, iou = binary_mask_metrics(pred, gt)
        assert precision == 1.0
        assert recall == 0.5
        assert f1 == pytest.approx(2 / 3, abs=1e-12)
        assert iou == 0.5

    def test_disjoint_nonempty(self):
        a = np.array([[[1, 0]]], dtype=np.uint8)
        b = np.array([[[0, 1]]], dtype=np.uint8)
        assert binary_mask_metrics(a, b) == (0.0, 0.0, 0.0, 0.0)

    def test_both_empty_is_perfect(self):
        z = np.zeros((2, 3, 3), dtype=np.uint8)
        assert binary_mask_metrics(z, z) == (1.0, 1.0, 1.0, 1.0)

    def test_pred_empty_gt_nonempty(self):
        gt = np.ones((1, 2, 2), dtype=np.uint8)
        assert binary_mask_metrics(np.zeros_like(gt), gt) == (0.0, 0.0, 0.0, 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(MetricsError):
            binary_mask_metrics(np.zeros((1, 2, 2)), np.zeros((1, 2, 3)))

    def test_iou_never_exceeds_f1(self):
        gen = SeededRng(3, 1).generator()
        for _ in range(50):
            pred = gen.random((2, 8, 8)) < 0.3
            gt = gen.random((2, 8, 8)) < 0.3
            f1, _, _, iou = binary_mask_metrics(pred, gt)
            assert iou <= f1 + 1e-12

    def test_simultaneous_permutation_invariance(self):
        gen = SeededRng(4, 1).generator()
        pred = (gen.random(64) < 0.4).reshape(1, 8, 8)
        gt = (gen.random(64) < 0.4).reshape(1, 8, 8)
        perm = gen.permutation(64)
        permuted = binary_mask_metrics(
            pred.reshape(-1)[perm].reshape(1, 8, 8),
            gt.reshape(-1)[perm].reshape(1, 8, 8),
        )
        assert permuted == binary_mask_metrics(pred, gt)


class TestAuc:
    def test_perfect_separation(self):
        scores = np.array([0.9, 0.8, 0.1, 0.2])
        labels = np.array([1, 1, 0, 0])
        assert auc(scores, labels) == 1.0

    def test_all_ties_is_half(self):
        assert auc(np.full(10, 0.5), np.array([1] * 4 + [0] * 6)) == 0.5

    def test_random_scores_near_half(self):
        gen = SeededRng(5, 1).generator()
        scores = gen.random(100_000)
        labels = gen.random(100_000) < 0.5
        assert auc(scores, labels) == pytest.approx(0.5, abs=0.01)

    def test_monotone_transform_invariance(self):
        gen = SeededRng(6, 1).generator()
        scores = gen.random(1000)
        labels = gen.random(1000) < 0.3
        base = auc(scores, labels)
        assert auc(np.exp(5 * scores), labels) == pytest.approx(base, abs=1e-12)
        assert auc(scores**3, labels) == pytest.approx(base, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(MetricsError):
            auc(np.array([0.1, 0.2]), np.array([1, 1]))


class TestMaskMetricsBundle:
    def test_average_is_mean_of_five(self):
        gt = np.zeros((1, 4, 4), dtype=np.uint8)
        gt[0, :2] = 1
        soft = gt.astype(np.float64)
        m = mask_metrics(gt, soft, gt)
        assert m.average == pytest.approx(
            (m.f1 + m.precision + m.recall + m.auc + m.iou) / 5
        )
        assert m.to_dict()["average"] == m.average
