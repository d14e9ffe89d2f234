"""Evaluation metrics: fpr95tpr, AuRoc, AuPR, size-filtered AP, histogram.

All metrics consume a :class:`ScoredPopulation` (scores + binary labels,
OOD as the positive class) and sweep thresholds over the distinct score
values in descending order, processing tied scores as one group.  Tie
grouping makes every metric invariant to the input permutation, and the
trapezoidal AuRoc then equals the Mann-Whitney pairwise statistic with
ties counted one half.

AP ("mAP" in reports; a single positive class, so no class mean) uses the
non-interpolated sum  AP = sum_k (R_k - R_{k-1}) * P_k.  The instance
variant discards detections smaller than delta^2 pixels and counts missed
ground-truth positives in the recall denominator, so undetected objects
depress the score; it returns None ("not computable") when that
denominator is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegeneratePopulationError, DimensionMismatchError
from .matching import MatchLabel, MatchRecord


@dataclass
class ScoredPopulation:
    """Parallel scores / labels (True = positive) with optional weights."""

    scores: np.ndarray
    labels: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=bool)
        if self.scores.shape != self.labels.shape or self.scores.ndim != 1:
            raise DimensionMismatchError(
                f"scores {self.scores.shape} vs labels {self.labels.shape}"
            )
        if self.weights is None:
            self.weights = np.ones_like(self.scores)
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != self.scores.shape:
                raise DimensionMismatchError(
                    f"weights {self.weights.shape} vs scores {self.scores.shape}"
                )

    def __len__(self) -> int:
        return int(self.scores.shape[0])


def _sweep(pop: ScoredPopulation):
    """Cumulative weighted TP/FP at each distinct threshold, descending.

    Returns (thresholds, cum_tp, cum_fp, total_pos, total_neg).
    """
    order = np.argsort(-pop.scores, kind="stable")
    s = pop.scores[order]
    tp = np.where(pop.labels[order], pop.weights[order], 0.0)
    fp = np.where(pop.labels[order], 0.0, pop.weights[order])
    if s.size == 0:
        return s, tp, fp, 0.0, 0.0
    # last index of each tie group
    last = np.flatnonzero(np.diff(s) != 0)
    last = np.append(last, s.size - 1)
    cum_tp = np.cumsum(tp)[last]
    cum_fp = np.cumsum(fp)[last]
    return s[last], cum_tp, cum_fp, float(cum_tp[-1]), float(cum_fp[-1])


def roc_points(pop: ScoredPopulation) -> np.ndarray:
    """ROC curve as an (n_points, 3) array of (fpr, tpr, threshold).

    Starts at (0, 0) with threshold +inf and ends at (1, 1); both rates are
    non-decreasing along the list.
    """
    thresholds, cum_tp, cum_fp, pos, neg = _sweep(pop)
    if pos == 0.0 or neg == 0.0:
        raise DegeneratePopulationError(
            f"ROC needs >=1 positive and >=1 negative (pos={pos}, neg={neg})"
        )
    fpr = np.concatenate(([0.0], cum_fp / neg))
    tpr = np.concatenate(([0.0], cum_tp / pos))
    thr = np.concatenate(([np.inf], thresholds))
    return np.column_stack([fpr, tpr, thr])


def auroc(pop: ScoredPopulation) -> float:
    """Trapezoidal area under the ROC curve."""
    pts = roc_points(pop)
    fpr, tpr = pts[:, 0], pts[:, 1]
    return float(np.sum(0.5 * (tpr[1:] + tpr[:-1]) * np.diff(fpr)))


def fpr_at_tpr(pop: ScoredPopulation, target_tpr: float = 0.95) -> float:
    """FPR at the largest threshold whose TPR reaches the target.

    Step semantics over the ROC points, no interpolation.
    """
    pts = roc_points(pop)
    idx = int(np.argmax(pts[:, 1] >= target_tpr))
    return float(pts[idx, 0])


def aupr(pop: ScoredPopulation) -> float:
    """Average precision over the descending-score sweep with tie groups."""
    _, cum_tp, cum_fp, pos, _ = _sweep(pop)
    if pos == 0.0:
        raise DegeneratePopulationError("AP needs at least one positive")
    recall = cum_tp / pos
    precision = cum_tp / (cum_tp + cum_fp)
    prev = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev) * precision))


def _roc_family(pop: ScoredPopulation, target_tpr: float = 0.95):
    """(fpr95, auroc, aupr) from a single threshold sweep.

    Numerically identical to calling fpr_at_tpr / auroc / aupr separately,
    but sorts the population once — the sort dominates at pixel scale.
    Degenerate pieces come back as None instead of raising.
    """
    _, cum_tp, cum_fp, pos, neg = _sweep(pop)
    fpr95 = roc = pr = None
    if pos > 0.0 and neg > 0.0:
        fpr = np.concatenate(([0.0], cum_fp / neg))
        tpr = np.concatenate(([0.0], cum_tp / pos))
        roc = float(np.sum(0.5 * (tpr[1:] + tpr[:-1]) * np.diff(fpr)))
        fpr95 = float(fpr[int(np.argmax(tpr >= target_tpr))])
    if pos > 0.0:
        recall = cum_tp / pos
        precision = cum_tp / (cum_tp + cum_fp)
        prev = np.concatenate(([0.0], recall[:-1]))
        pr = float(np.sum((recall - prev) * precision))
    return fpr95, roc, pr


def map_delta(
    records: Sequence[MatchRecord],
    missed_positives: int,
    delta: int,
) -> Optional[float]:
    """AP over matched+unmatched detections, size-filtered at delta^2.

    Detections with area below delta^2 are discarded; the remaining ones
    rank by descending score with OOD records positive and IN_DIST or
    UNMATCHED records negative.  ``missed_positives`` is the count of
    ground-truth OOD instances that survive the same size filter (by GT
    area) but were never detected; it enters the recall denominator only.
    Returns None when the denominator is zero — not computable, mirroring
    a detector that found no scoreable OOD object.
    """
    min_area = delta * delta
    kept = [r for r in records if r.detection_area >= min_area]
    n_pos = sum(1 for r in kept if r.label is MatchLabel.OOD)
    denom = n_pos + missed_positives
    if denom == 0:
        return None
    if not kept:
        return 0.0
    pop = ScoredPopulation(
        scores=np.array([r.score for r in kept], dtype=np.float64),
        labels=np.array([r.label is MatchLabel.OOD for r in kept], dtype=bool),
    )
    _, cum_tp, cum_fp, _, _ = _sweep(pop)
    recall = cum_tp / denom
    precision = cum_tp / (cum_tp + cum_fp)
    prev = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev) * precision))


def pixel_population(u: np.ndarray, truth: np.ndarray) -> ScoredPopulation:
    """One population entry per pixel; positive where truth == 1."""
    u = np.asarray(u)
    truth = np.asarray(truth)
    if u.shape != truth.shape:
        raise DimensionMismatchError(f"map {u.shape} vs truth {truth.shape}")
    if not np.all((truth == 0) | (truth == 1)):
        raise ValueError("truth grid must be strictly {0, 1}")
    return ScoredPopulation(
        scores=u.ravel().astype(np.float64),
        labels=truth.ravel() == 1,
    )


def score_histogram(
    records: Sequence[MatchRecord], bins: int = 20
) -> Dict[MatchLabel, np.ndarray]:
    """Per-label score counts over uniform bins spanning [0, 1].

    The last bin is right-inclusive; out-of-range scores clip into the end
    bins so every record is counted exactly once.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    out: Dict[MatchLabel, np.ndarray] = {}
    for label in MatchLabel:
        vals = np.array([r.score for r in records if r.label is label], dtype=np.float64)
        vals = np.clip(vals, 0.0, 1.0)
        out[label] = np.histogram(vals, bins=bins, range=(0.0, 1.0))[0]
    return out


@dataclass
class MetricReport:
    """Bundle of the metric suite for one (method, detector) evaluation.

    ROC-family fields are None when the population was degenerate (the
    "not computable" marker); map_by_delta maps each size threshold to its
    AP or None.
    """

    fpr95tpr: Optional[float]
    auroc: Optional[float]
    aupr: Optional[float]
    map_by_delta: Dict[int, Optional[float]] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)


def instance_report(
    records: Sequence[MatchRecord],
    missed: Sequence[Tuple[int, int]],
    deltas: Sequence[int],
    roc_delta: int = 0,
    include_missed: bool = True,
) -> MetricReport:
    """Full instance-wise metric suite over pooled match records.

    ROC-family metrics run on matched records only (UNMATCHED detections
    have no ground-truth label), further size-filtered at ``roc_delta``.
    AP runs per delta over all records, with missed GT positives counted
    in the denominator unless ``include_missed`` is False.
    """
    roc_min = roc_delta * roc_delta
    roc_records = [
        r for r in records
        if r.label is not MatchLabel.UNMATCHED and r.detection_area >= roc_min
    ]
    n_pos = sum(1 for r in roc_records if r.label is MatchLabel.OOD)
    n_neg = len(roc_records) - n_pos
    counts = {
        "positives": n_pos,
        "negatives": n_neg,
        "excluded": len(records) - len(roc_records),
        "missed_positives": len(missed),
    }
    fpr95 = roc = pr = None
    if roc_records:
        pop = ScoredPopulation(
            scores=np.array([r.score for r in roc_records], dtype=np.float64),
            labels=np.array([r.label is MatchLabel.OOD for r in roc_records], dtype=bool),
        )
        fpr95, roc, pr = _roc_family(pop)
    map_by_delta: Dict[int, Optional[float]] = {}
    for delta in deltas:
        min_area = delta * delta
        n_missed = sum(1 for _, area in missed if area >= min_area)
        map_by_delta[delta] = map_delta(
            records, n_missed if include_missed else 0, delta
        )
    return MetricReport(fpr95tpr=fpr95, auroc=roc, aupr=pr,
                        map_by_delta=map_by_delta, counts=counts)


def pixel_report(pop: ScoredPopulation, excluded: int = 0) -> MetricReport:
    """ROC-family metrics over a pooled pixel population."""
    n_pos = int(np.sum(pop.weights[pop.labels]))
    n_neg = int(np.sum(pop.weights[~pop.labels]))
    counts = {
        "positives": n_pos,
        "negatives": n_neg,
        "excluded": excluded,
        "missed_positives": 0,
    }
    fpr95, roc, pr = _roc_family(pop)
    return MetricReport(fpr95tpr=fpr95, auroc=roc, aupr=pr,
                        map_by_delta={}, counts=counts)
