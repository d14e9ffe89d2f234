import numpy as np
import pytest

from instanomaly import (
    DegeneratePopulationError,
    DimensionMismatchError,
    MatchLabel,
    MatchRecord,
    ScoredPopulation,
    aupr,
    auroc,
    fpr_at_tpr,
    instance_report,
    map_delta,
    pixel_population,
    pixel_report,
    roc_points,
    score_histogram,
)
from oracles import (
    oracle_aupr,
    oracle_auroc,
    oracle_average_precision,
    oracle_fpr_at_tpr,
    pairwise_auroc,
)


def pop(scores, labels):
    return ScoredPopulation(scores=np.array(scores, dtype=np.float64),
                            labels=np.array(labels, dtype=bool))


def rec(det_id, label, score, area=100, gt_id=1, iou=1.0):
    return MatchRecord(detection_id=det_id, gt_id=gt_id, iou=iou,
                       label=label, detection_area=area, score=score)


# ---------------------------------------------------------------- hand values

def test_hand_verified_four_point_population():
    # positives {0.9, 0.3}, negatives {0.5, 0.1}: one of four pairs inverted
    p = pop([0.9, 0.3, 0.5, 0.1], [1, 1, 0, 0])
    assert auroc(p) == pytest.approx(0.75, abs=1e-12)
    assert aupr(p) == pytest.approx(5 / 6, abs=1e-12)
    assert fpr_at_tpr(p, 0.95) == pytest.approx(0.5, abs=1e-12)


def test_perfect_separation():
    p = pop([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert auroc(p) == 1.0
    assert aupr(p) == 1.0
    assert fpr_at_tpr(p) == 0.0


def test_inverted_separation():
    p = pop([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])
    assert auroc(p) == 0.0
    assert fpr_at_tpr(p) == 1.0


def test_all_tied_scores_give_chance_level():
    p = pop([0.5] * 6, [1, 0, 1, 0, 1, 0])
    assert auroc(p) == pytest.approx(0.5, abs=1e-12)
    assert aupr(p) == pytest.approx(0.5, abs=1e-12)  # precision = prevalence
    assert fpr_at_tpr(p) == 1.0  # single sweep point reaches tpr 1 with fpr 1


def test_roc_points_structure():
    p = pop([0.9, 0.3, 0.5, 0.1], [1, 1, 0, 0])
    pts = roc_points(p)
    assert pts[0].tolist() == [0.0, 0.0, np.inf]
    assert pts[-1, 0] == 1.0 and pts[-1, 1] == 1.0
    assert np.all(np.diff(pts[:, 0]) >= 0)
    assert np.all(np.diff(pts[:, 1]) >= 0)
    assert np.all(np.diff(pts[1:, 2]) < 0)  # strictly descending thresholds


def test_tie_group_is_single_point():
    p = pop([0.7, 0.7, 0.7, 0.2], [1, 0, 1, 0])
    pts = roc_points(p)
    # (0,0,inf), the 0.7 group, the 0.2 group — the tie collapses
    assert pts.shape[0] == 3
    assert pts[1].tolist() == [0.5, 1.0, 0.7]


def test_permutation_invariance():
    rng = np.random.default_rng(8)
    scores = rng.random(40)
    labels = rng.random(40) < 0.4
    base = (auroc(pop(scores, labels)), aupr(pop(scores, labels)),
            fpr_at_tpr(pop(scores, labels)))
    for _ in range(5):
        idx = rng.permutation(40)
        p = pop(scores[idx], labels[idx])
        assert (auroc(p), aupr(p), fpr_at_tpr(p)) == base


def test_oracle_agreement_spot_checks():
    rng = np.random.default_rng(9)
    grid = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    for _ in range(300):
        n = int(rng.integers(2, 13))
        scores = grid[rng.integers(0, 5, n)]
        labels = rng.integers(0, 2, n).astype(bool)
        if labels.all() or not labels.any():
            continue
        p = pop(scores, labels)
        s, l = scores.tolist(), labels.tolist()
        assert auroc(p) == pytest.approx(oracle_auroc(s, l), abs=1e-12)
        assert aupr(p) == pytest.approx(oracle_aupr(s, l), abs=1e-12)
        assert fpr_at_tpr(p) == pytest.approx(oracle_fpr_at_tpr(s, l), abs=1e-12)


def test_auroc_equals_mann_whitney_spot_check():
    rng = np.random.default_rng(10)
    scores = np.round(rng.random(60), 1)  # force ties
    labels = rng.random(60) < 0.5
    if labels.all() or not labels.any():
        labels[0] = True
        labels[1] = False
    p = pop(scores, labels)
    assert auroc(p) == pytest.approx(
        pairwise_auroc(scores[labels], scores[~labels]), abs=1e-12)


# ---------------------------------------------------------------- degenerate

def test_roc_family_needs_both_classes():
    with pytest.raises(DegeneratePopulationError):
        auroc(pop([0.5, 0.6], [1, 1]))
    with pytest.raises(DegeneratePopulationError):
        fpr_at_tpr(pop([0.5, 0.6], [0, 0]))
    with pytest.raises(DegeneratePopulationError):
        roc_points(pop([], []))


def test_aupr_needs_positives_only():
    assert aupr(pop([0.9, 0.1], [1, 1])) == 1.0
    with pytest.raises(DegeneratePopulationError):
        aupr(pop([0.9, 0.1], [0, 0]))


# ---------------------------------------------------------------- weights

def test_weighted_population_equals_repetition():
    scores = np.array([0.9, 0.5, 0.3])
    labels = np.array([True, False, True])
    w = ScoredPopulation(scores=scores, labels=labels,
                         weights=np.array([3.0, 2.0, 1.0]))
    rep = pop([0.9] * 3 + [0.5] * 2 + [0.3], [1] * 3 + [0] * 2 + [1])
    assert auroc(w) == pytest.approx(auroc(rep), abs=1e-12)
    assert aupr(w) == pytest.approx(aupr(rep), abs=1e-12)


# ---------------------------------------------------------------- map_delta

def test_map_hand_verified_with_missed():
    # one matched OOD at rank 1, one missed OOD, no negatives:
    # precision 1 at recall 1/2 -> AP 0.5
    records = [rec(1, MatchLabel.OOD, 0.9)]
    assert map_delta(records, missed_positives=1, delta=0) == pytest.approx(0.5)


def test_map_perfect_ranking():
    records = [rec(1, MatchLabel.OOD, 0.9), rec(2, MatchLabel.IN_DIST, 0.1)]
    assert map_delta(records, 0, 0) == 1.0


def test_map_counts_unmatched_as_negative():
    records = [rec(1, MatchLabel.UNMATCHED, 0.9, gt_id=None, iou=0.2),
               rec(2, MatchLabel.OOD, 0.5)]
    # ranking: unmatched (neg) above the positive -> AP = 1/2
    assert map_delta(records, 0, 0) == pytest.approx(0.5)


def test_map_size_filter_drops_small_detections():
    records = [rec(1, MatchLabel.OOD, 0.9, area=255),
               rec(2, MatchLabel.OOD, 0.8, area=256)]
    assert map_delta(records, 0, 16) == 1.0
    # the small positive is gone entirely — denominator too
    assert map_delta([records[0]], 0, 16) is None


def test_map_not_computable_when_no_positives_anywhere():
    records = [rec(1, MatchLabel.IN_DIST, 0.4)]
    assert map_delta(records, 0, 0) is None
    assert map_delta([], 0, 0) is None


def test_map_zero_when_only_missed():
    assert map_delta([], missed_positives=3, delta=0) == 0.0


def test_map_matches_oracle_random_records():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        records = []
        for i in range(n):
            roll = rng.integers(0, 3)
            label = (MatchLabel.OOD, MatchLabel.IN_DIST,
                     MatchLabel.UNMATCHED)[roll]
            records.append(rec(i + 1, label,
                               float(rng.integers(0, 5)) / 4,
                               area=int(rng.integers(1, 400))))
        missed = int(rng.integers(0, 3))
        delta = int(rng.choice([0, 8, 16]))
        min_area = delta * delta
        kept = [r for r in records if r.detection_area >= min_area]
        denom = sum(1 for r in kept if r.label is MatchLabel.OOD) + missed
        expected = oracle_average_precision(
            [r.score for r in kept],
            [r.label is MatchLabel.OOD for r in kept],
            denom) if kept else (None if denom == 0 else 0.0)
        got = map_delta(records, missed, delta)
        if expected is None:
            assert got is None
        else:
            assert got == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------- pixel pop

def test_pixel_population_shapes_and_labels():
    u = np.array([[0.9, 0.1]], dtype=np.float32)
    truth = np.array([[1, 0]], dtype=np.uint8)
    p = pixel_population(u, truth)
    assert p.scores.tolist() == pytest.approx([0.9, 0.1], abs=1e-7)
    assert p.labels.tolist() == [True, False]


def test_pixel_population_rejects_non_binary_truth():
    with pytest.raises(ValueError):
        pixel_population(np.zeros((2, 2)), np.full((2, 2), 2))


def test_pixel_population_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        pixel_population(np.zeros((2, 2)), np.zeros((3, 3)))


# ---------------------------------------------------------------- histogram

def test_histogram_counts_sum_to_record_count():
    rng = np.random.default_rng(12)
    records = [rec(i, MatchLabel.OOD if i % 2 else MatchLabel.IN_DIST,
                   float(rng.random())) for i in range(1, 101)]
    hist = score_histogram(records, bins=20)
    assert int(hist[MatchLabel.OOD].sum()) == 50
    assert int(hist[MatchLabel.IN_DIST].sum()) == 50
    assert int(hist[MatchLabel.UNMATCHED].sum()) == 0


def test_histogram_last_bin_right_inclusive():
    records = [rec(1, MatchLabel.OOD, 1.0)]
    hist = score_histogram(records, bins=10)
    assert hist[MatchLabel.OOD][-1] == 1


def test_histogram_clips_out_of_range_scores():
    records = [rec(1, MatchLabel.OOD, 1.7), rec(2, MatchLabel.OOD, -0.3)]
    hist = score_histogram(records, bins=4)
    assert hist[MatchLabel.OOD][0] == 1
    assert hist[MatchLabel.OOD][-1] == 1


def test_histogram_single_bin():
    records = [rec(1, MatchLabel.IN_DIST, 0.3)]
    hist = score_histogram(records, bins=1)
    assert hist[MatchLabel.IN_DIST].tolist() == [1]


def test_histogram_rejects_zero_bins():
    with pytest.raises(ValueError):
        score_histogram([], bins=0)


# ---------------------------------------------------------------- reports

def test_instance_report_counts_and_exclusions():
    records = [rec(1, MatchLabel.OOD, 0.9, area=100),
               rec(2, MatchLabel.IN_DIST, 0.2, area=300),
               rec(3, MatchLabel.UNMATCHED, 0.5, area=50, gt_id=None, iou=0.1)]
    rep = instance_report(records, missed=[(4, 20)], deltas=(0, 16))
    assert rep.counts == {"positives": 1, "negatives": 1, "excluded": 1,
                          "missed_positives": 1}
    assert rep.auroc == 1.0
    assert rep.map_by_delta[0] is not None
    # delta 16: only the area-300 negative survives; missed area 20 < 256
    assert rep.map_by_delta[16] is None


def test_instance_report_roc_delta_excludes_small_matches():
    records = [rec(1, MatchLabel.OOD, 0.9, area=10),
               rec(2, MatchLabel.OOD, 0.8, area=300),
               rec(3, MatchLabel.IN_DIST, 0.1, area=300)]
    rep = instance_report(records, [], deltas=(0,), roc_delta=16)
    assert rep.counts["positives"] == 1
    assert rep.counts["excluded"] == 1
    assert rep.auroc == 1.0


def test_instance_report_degenerate_is_none_not_raise():
    records = [rec(1, MatchLabel.OOD, 0.9)]
    rep = instance_report(records, [], deltas=(0,))
    assert rep.fpr95tpr is None and rep.auroc is None
    assert rep.aupr == 1.0  # aupr needs positives only
    rep_empty = instance_report([], [(1, 50)], deltas=(0,))
    assert rep_empty.auroc is None and rep_empty.aupr is None
    assert rep_empty.map_by_delta[0] == 0.0


def test_pixel_report_basic():
    p = pop([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    rep = pixel_report(p)
    assert rep.auroc == 1.0 and rep.aupr == 1.0 and rep.fpr95tpr == 0.0
    assert rep.counts == {"positives": 2, "negatives": 2, "excluded": 0,
                          "missed_positives": 0}
    assert rep.map_by_delta == {}


def test_pixel_report_degenerate_gives_nones():
    rep = pixel_report(pop([0.5, 0.6], [0, 0]))
    assert rep.fpr95tpr is None and rep.auroc is None and rep.aupr is None
