import numpy as np
import pytest

from instanomaly import (
    DEFAULT_MIN_SIZE,
    DimensionMismatchError,
    ScoredInstance,
    aggregate_instance_scores,
    gt_detector,
    relabel_by_first_pixel,
    size_filter,
)
from oracles import brute_instance_means, flood_fill_components


def test_aggregate_hand_case():
    u = np.array([[0.2, 0.4, 0.0],
                  [0.6, 0.8, 0.0]], dtype=np.float32)
    labels = np.array([[1, 1, 0],
                       [2, 1, 0]], dtype=np.uint16)
    out = aggregate_instance_scores(u, labels)
    assert [s.id for s in out] == [1, 2]
    a, b = out
    assert a.area == 3 and b.area == 1
    assert a.score == pytest.approx((0.2 + 0.4 + 0.8) / 3, abs=1e-7)
    assert b.score == pytest.approx(0.6, abs=1e-7)
    assert a.bbox == (0, 0, 1, 1)
    assert b.bbox == (1, 0, 1, 0)


def test_aggregate_empty_map():
    out = aggregate_instance_scores(np.zeros((3, 3), dtype=np.float32),
                                    np.zeros((3, 3), dtype=np.uint16))
    assert out == []


def test_aggregate_matches_brute_force_means():
    rng = np.random.default_rng(101)
    for _ in range(50):
        h, w = rng.integers(1, 33, size=2)
        u = rng.random((h, w)).astype(np.float32)
        labels = rng.integers(0, 6, size=(h, w)).astype(np.uint16)
        expected = brute_instance_means(u, labels)
        got = {s.id: s.score for s in aggregate_instance_scores(u, labels)}
        assert set(got) == set(expected)
        for k in expected:
            assert got[k] == pytest.approx(expected[k], abs=1e-9)


def test_aggregate_single_pixel_instance_is_exact():
    u = np.array([[0.123456789]], dtype=np.float32)
    out = aggregate_instance_scores(u, np.array([[1]], dtype=np.uint16))
    assert out[0].score == float(u[0, 0])


def test_aggregate_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        aggregate_instance_scores(np.zeros((2, 2), dtype=np.float32),
                                  np.zeros((2, 3), dtype=np.uint16))


def test_size_filter_boundary():
    def inst(area):
        return ScoredInstance(id=1, area=area, bbox=(0, 0, 0, 0), score=0.5)

    assert size_filter([inst(256)], 16) == [inst(256)]
    assert size_filter([inst(255)], 16) == []
    assert size_filter([inst(1)], 0) == [inst(1)]
    assert size_filter([inst(1)], 1) == [inst(1)]


def test_size_filter_default_is_16():
    assert DEFAULT_MIN_SIZE == 16
    small = ScoredInstance(id=1, area=255, bbox=(0, 0, 15, 15), score=0.9)
    big = ScoredInstance(id=2, area=256, bbox=(0, 0, 15, 15), score=0.9)
    assert size_filter([small, big]) == [big]


def test_gt_detector_splits_same_class_regions():
    semantic = np.array([[1, 0, 1],
                         [1, 0, 1]], dtype=np.uint8)
    out = gt_detector(semantic, connectivity=8)
    # class-0 is a thing here (no stuff configured): three regions,
    # numbered in raster order of first pixel
    assert out.tolist() == [[1, 2, 3], [1, 2, 3]]


def test_gt_detector_stuff_classes_map_to_background():
    semantic = np.array([[1, 0, 2],
                         [1, 0, 2]], dtype=np.uint8)
    out = gt_detector(semantic, stuff_classes=(0,))
    assert out.tolist() == [[1, 0, 2], [1, 0, 2]]


def test_gt_detector_connectivity_difference():
    # two diagonal pixels of one class: joined under 8, split under 4
    semantic = np.zeros((2, 2), dtype=np.uint8)
    semantic[0, 0] = semantic[1, 1] = 5
    eight = gt_detector(semantic, connectivity=8, stuff_classes=(0,))
    four = gt_detector(semantic, connectivity=4, stuff_classes=(0,))
    assert eight[0, 0] == eight[1, 1] == 1
    assert four[0, 0] == 1 and four[1, 1] == 2


def test_gt_detector_diagonal_class_boundary_does_not_merge_classes():
    semantic = np.array([[1, 2],
                         [2, 1]], dtype=np.uint8)
    out = gt_detector(semantic, connectivity=8)
    assert out[0, 0] == out[1, 1]  # same class, diagonal touch
    assert out[0, 1] == out[1, 0]
    assert out[0, 0] != out[0, 1]


def test_gt_detector_matches_flood_fill_small():
    rng = np.random.default_rng(77)
    for _ in range(40):
        semantic = rng.integers(0, 4, size=(12, 12)).astype(np.uint8)
        for conn in (4, 8):
            for stuff in ((), (0,)):
                expected = flood_fill_components(semantic, conn, stuff)
                got = gt_detector(semantic, connectivity=conn,
                                  stuff_classes=stuff)
                assert np.array_equal(got, expected), (conn, stuff)


def test_gt_detector_rejects_bad_connectivity():
    with pytest.raises(ValueError):
        gt_detector(np.zeros((2, 2), dtype=np.uint8), connectivity=6)


def test_gt_detector_rejects_1d():
    with pytest.raises(DimensionMismatchError):
        gt_detector(np.zeros(4, dtype=np.uint8))


def test_relabel_closes_gaps_in_raster_order():
    labels = np.array([[0, 7, 0],
                       [3, 7, 0]], dtype=np.uint16)
    out = relabel_by_first_pixel(labels)
    # id 7 appears first in raster order -> becomes 1; id 3 -> 2
    assert out.tolist() == [[0, 1, 0], [2, 1, 0]]


def test_relabel_identity_when_already_dense():
    labels = np.array([[1, 0], [0, 2]], dtype=np.uint16)
    assert np.array_equal(relabel_by_first_pixel(labels), labels)


def test_relabel_empty_map():
    labels = np.zeros((3, 3), dtype=np.uint16)
    assert np.array_equal(relabel_by_first_pixel(labels), labels)
