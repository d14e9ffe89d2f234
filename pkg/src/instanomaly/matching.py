"""IoU matching of detections against ground-truth instances.

Matching is greedy over descending IoU with ties broken by smaller
detection id, then smaller gt id, so the result does not depend on input
order.  At the default threshold (strictly greater than 0.5) greedy
matching is provably one-to-one, but the tie-break keeps behaviour
deterministic for configured thresholds below that.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError
from .instances import ScoredInstance


class MatchLabel(Enum):
    OOD = "ood"
    IN_DIST = "in_dist"
    UNMATCHED = "unmatched"


@dataclass(frozen=True)
class MatchRecord:
    """One detection after matching; gt_id is None iff label is UNMATCHED."""

    detection_id: int
    gt_id: Optional[int]
    iou: float
    label: MatchLabel
    detection_area: int
    score: float


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary masks; 0.0 if both are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes {a.shape} vs {b.shape}")
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 0.0
    return int(np.logical_and(a, b).sum()) / union


def match_instances(
    det_map: np.ndarray,
    scored: Sequence[ScoredInstance],
    gt_map: np.ndarray,
    semantic: np.ndarray,
    ood_classes: Iterable[int],
    iou_threshold: float = 0.5,
) -> Tuple[List[MatchRecord], List[Tuple[int, int]]]:
    """Greedy one-to-one matching of scored detections to GT instances.

    Returns one :class:`MatchRecord` per entry of ``scored`` (ascending
    detection id) plus the list of missed GT OOD instances as
    (gt_id, gt_area) pairs — those with class in ``ood_classes`` that no
    detection matched.  A detection matches only with IoU strictly above
    ``iou_threshold``; matched detections take the label of the GT
    instance's class (OOD or IN_DIST), the rest are UNMATCHED.
    """
    det_map = np.asarray(det_map)
    gt_map = np.asarray(gt_map)
    semantic = np.asarray(semantic)
    if not (det_map.shape == gt_map.shape == semantic.shape):
        raise DimensionMismatchError(
            f"detections {det_map.shape}, gt {gt_map.shape}, semantic {semantic.shape}"
        )
    ood = set(int(c) for c in ood_classes)

    gt_flat = gt_map.ravel().astype(np.int64)
    det_flat = det_map.ravel().astype(np.int64)
    gt_areas = np.bincount(gt_flat)
    gt_ids, gt_first = np.unique(gt_flat, return_index=True)
    gt_class = {
        int(g): int(semantic.ravel()[first])
        for g, first in zip(gt_ids, gt_first)
        if g != 0
    }

    # pairwise intersections between nonzero detection and gt labels
    both = (det_flat != 0) & (gt_flat != 0)
    stride = int(gt_areas.shape[0])
    keys, inter = np.unique(det_flat[both] * stride + gt_flat[both], return_counts=True)

    det_area = {s.id: s.area for s in scored}
    best_iou = {s.id: 0.0 for s in scored}
    candidates = []
    for key, n in zip(keys, inter):
        d, g = int(key) // stride, int(key) % stride
        if d not in det_area:
            continue
        iou = int(n) / (det_area[d] + int(gt_areas[g]) - int(n))
        if iou > best_iou[d]:
            best_iou[d] = iou
        if iou > iou_threshold:
            candidates.append((-iou, d, g))
    candidates.sort()

    det_match: dict = {}
    used_gt: set = set()
    for neg_iou, d, g in candidates:
        if d in det_match or g in used_gt:
            continue
        det_match[d] = (g, -neg_iou)
        used_gt.add(g)

    records: List[MatchRecord] = []
    for s in sorted(scored, key=lambda s: s.id):
        if s.id in det_match:
            g, iou = det_match[s.id]
            label = MatchLabel.OOD if gt_class[g] in ood else MatchLabel.IN_DIST
            records.append(
                MatchRecord(s.id, g, iou, label, s.area, s.score)
            )
        else:
            records.append(
                MatchRecord(s.id, None, best_iou[s.id], MatchLabel.UNMATCHED, s.area, s.score)
            )
    missed = [
        (g, int(gt_areas[g]))
        for g, cls in sorted(gt_class.items())
        if cls in ood and g not in used_gt
    ]
    return records, missed
