"""Instance extraction and per-instance anomaly aggregation.

The anomaly score of an instance is the arithmetic mean of the pixel-wise
error map over the instance's mask, accumulated in float64 so that
megapixel-scale masks keep ranking-relevant precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy import ndimage as ndi

from .errors import DimensionMismatchError

#: default side length of the small-object filter; area < 16^2 is removed
DEFAULT_MIN_SIZE = 16


@dataclass(frozen=True)
class ScoredInstance:
    """One detected instance with its pixel area, bounding box and score.

    ``bbox`` is (min_h, min_w, max_h, max_w), inclusive on all sides.
    """

    id: int
    area: int
    bbox: Tuple[int, int, int, int]
    score: float


def aggregate_instance_scores(u: np.ndarray, instances: np.ndarray) -> List[ScoredInstance]:
    """Mean error over each instance mask, one record per nonzero label.

    Returns records sorted by ascending instance id.  Label ids need not be
    contiguous; absent ids simply yield no record.
    """
    u = np.asarray(u)
    instances = np.asarray(instances)
    if u.shape != instances.shape:
        raise DimensionMismatchError(f"error map {u.shape} vs instances {instances.shape}")
    labels = instances.astype(np.intp, copy=False)
    flat = labels.ravel()
    sums = np.bincount(flat, weights=u.ravel().astype(np.float64))
    counts = np.bincount(flat)
    slices = ndi.find_objects(labels)
    out: List[ScoredInstance] = []
    for label_id in np.nonzero(counts)[0]:
        if label_id == 0:
            continue
        sl = slices[label_id - 1]
        bbox = (sl[0].start, sl[1].start, sl[0].stop - 1, sl[1].stop - 1)
        area = int(counts[label_id])
        out.append(
            ScoredInstance(
                id=int(label_id),
                area=area,
                bbox=bbox,
                score=float(sums[label_id] / area),
            )
        )
    return out


def size_filter(scored: Sequence[ScoredInstance], delta: int = DEFAULT_MIN_SIZE) -> List[ScoredInstance]:
    """Drop instances smaller than delta^2 pixels; area == delta^2 is kept."""
    min_area = delta * delta
    return [s for s in scored if s.area >= min_area]


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return ndi.generate_binary_structure(2, 1)
    if connectivity == 8:
        return ndi.generate_binary_structure(2, 2)
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def gt_detector(
    semantic: np.ndarray,
    connectivity: int = 8,
    stuff_classes: Iterable[int] = (),
) -> np.ndarray:
    """Split a semantic annotation into one instance per connected region.

    Two pixels share an instance id iff they carry the same class and are
    connected through that class under the chosen connectivity.  Classes in
    ``stuff_classes`` map to background 0.  Instance ids are 1, 2, ... in
    raster-scan order of each region's first pixel, so output is dense and
    reproducible.
    """
    semantic = np.asarray(semantic)
    if semantic.ndim != 2:
        raise DimensionMismatchError(f"semantic map must be 2-D, got {semantic.shape}")
    stuff = set(int(c) for c in stuff_classes)
    structure = _structure(connectivity)
    out = np.zeros(semantic.shape, dtype=np.uint16)
    per_class = []  # (labeled array, component count)
    components = []  # (first raster index, class slot, component id)
    for cls in np.unique(semantic):
        if int(cls) in stuff:
            continue
        labeled, n = ndi.label(semantic == cls, structure=structure)
        if n == 0:
            continue
        slot = len(per_class)
        per_class.append((labeled, n))
        ids, first_idx = np.unique(labeled.ravel(), return_index=True)
        for comp_id, first in zip(ids, first_idx):
            if comp_id != 0:
                components.append((int(first), slot, int(comp_id)))
    components.sort()
    if len(components) > np.iinfo(np.uint16).max:
        raise ValueError(f"{len(components)} instances exceed the u16 label range")
    rank_maps = [np.zeros(n + 1, dtype=np.uint16) for _, n in per_class]
    for rank, (_, slot, comp_id) in enumerate(components, start=1):
        rank_maps[slot][comp_id] = rank
    for (labeled, _), rank_map in zip(per_class, rank_maps):
        mask = labeled != 0
        out[mask] = rank_map[labeled[mask]]
    return out


def relabel_by_first_pixel(labels: np.ndarray) -> np.ndarray:
    """Densify instance ids to 1..K in raster order of first appearance.

    Gaps (e.g. from dropped instances) close up; the relative order of
    surviving regions follows each one's first raster-scan pixel, matching
    the id convention of gt_detector.
    """
    labels = np.asarray(labels)
    ids, first_idx = np.unique(labels.ravel(), return_index=True)
    keep = np.flatnonzero(ids != 0)
    order = keep[np.argsort(first_idx[keep], kind="stable")]
    mapping = np.zeros(int(ids[-1]) + 1 if ids.size else 1, dtype=labels.dtype)
    for rank, idx in enumerate(order, start=1):
        mapping[ids[idx]] = rank
    return mapping[labels]
