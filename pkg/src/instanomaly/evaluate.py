"""Dataset-level evaluation: pooled pixel and instance metric runs.

Populations concatenate across samples in index order (one global ranking
per run, not a per-sample average), so reported numbers describe the whole
dataset.  All knobs sit in RunConfig; everything else comes from the
dataset manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import dataset as ds
from .instances import aggregate_instance_scores, size_filter
from .matching import MatchLabel, MatchRecord, match_instances
from .metrics import (MetricReport, ScoredPopulation, instance_report,
                      pixel_report, score_histogram)
from .score_maps import filter_error_map, mcp_score, mean_softmax_entropy
from .tensor_store import render_overlay

METHODS = ("obsnet-file", "mcp", "mcdropout")
DETECTORS = ("file", "gt")
PIXEL_FILTERS = ("none", "file", "gt")
FILTER_MODES = ("zero", "drop")


@dataclass
class RunConfig:
    method: str = "obsnet-file"
    detector: str = "file"
    deltas: Tuple[int, ...] = (0, 16, 32, 48)
    iou_threshold: float = 0.5
    min_size: int = 0
    roc_delta: int = 0
    include_missed: bool = True
    pixel_filter: str = "none"
    filter_mode: str = "zero"
    bins: int = 20

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}")
        if self.pixel_filter not in PIXEL_FILTERS:
            raise ValueError(f"pixel filter must be one of {PIXEL_FILTERS}")
        if self.filter_mode not in FILTER_MODES:
            raise ValueError(f"filter mode must be one of {FILTER_MODES}")
        if not self.deltas:
            raise ValueError("delta list must be non-empty")
        if list(self.deltas) != sorted(set(self.deltas)):
            raise ValueError("delta list must be strictly ascending")
        if not 0.0 <= self.iou_threshold <= 1.0:
            raise ValueError(f"iou threshold {self.iou_threshold} outside [0, 1]")


def score_map_for_sample(root: str, index: int, method: str,
                         softmax_passes: int) -> np.ndarray:
    """Per-pixel anomaly map for one sample under the chosen method."""
    if method == "obsnet-file":
        return ds.read_sample_tensor(root, index, "error.iat", expect="error_map")
    if softmax_passes < 1:
        raise ValueError(f"method {method} needs softmax passes in the dataset")
    if method == "mcp":
        sm = ds.read_sample_tensor(root, index, "softmax_t00.iat", expect="softmax")
        return mcp_score(sm)
    stack = [ds.read_sample_tensor(root, index, f"softmax_t{t:02d}.iat",
                                   expect="softmax")
             for t in range(softmax_passes)]
    return mean_softmax_entropy(stack)


def _detector_map(root: str, index: int, which: str) -> np.ndarray:
    name = "det_instances.iat" if which == "file" else "gt_instances.iat"
    return ds.read_sample_tensor(root, index, name, expect="instances")


def eval_pixel_dataset(root: str, config: RunConfig) -> MetricReport:
    """Pooled pixel-wise metrics; OOD-class pixels are the positives.

    With a pixel filter, "zero" mode zeroes scores outside detector masks
    (population size unchanged); "drop" mode removes those pixels from the
    population and counts them as excluded.
    """
    manifest = ds.load_manifest(root)
    ood_ids = np.array(manifest["ood_class_ids"], dtype=np.uint8)
    passes = int(manifest.get("softmax_passes", 0))
    scores: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    excluded = 0
    for i in range(int(manifest["n_samples"])):
        u = score_map_for_sample(root, i, config.method, passes)
        semantic = ds.read_sample_tensor(root, i, "semantic.iat", expect="semantic")
        truth = np.isin(semantic, ood_ids)
        if config.pixel_filter != "none":
            masks = _detector_map(root, i, config.pixel_filter)
            if config.filter_mode == "zero":
                u = filter_error_map(u, masks)
            else:
                keep = masks != 0
                excluded += int(keep.size - keep.sum())
                u, truth = u[keep], truth[keep]
        scores.append(u.ravel().astype(np.float64))
        labels.append(truth.ravel())
    pop = ScoredPopulation(scores=np.concatenate(scores),
                           labels=np.concatenate(labels))
    return pixel_report(pop, excluded=excluded)


def collect_instance_records(
    root: str, config: RunConfig
) -> Tuple[List[MatchRecord], List[Tuple[int, int]]]:
    """Aggregate, size-filter, and match every sample; ids stay per-sample.

    Missed ground-truth OOD instances keep their pixel area so the AP
    denominators can apply each delta's size filter to them as well.
    """
    manifest = ds.load_manifest(root)
    ood_ids = [int(c) for c in manifest["ood_class_ids"]]
    passes = int(manifest.get("softmax_passes", 0))
    records: List[MatchRecord] = []
    missed: List[Tuple[int, int]] = []
    for i in range(int(manifest["n_samples"])):
        u = score_map_for_sample(root, i, config.method, passes)
        semantic = ds.read_sample_tensor(root, i, "semantic.iat", expect="semantic")
        gt_map = ds.read_sample_tensor(root, i, "gt_instances.iat",
                                       expect="instances")
        det_map = _detector_map(root, i, config.detector)
        scored = aggregate_instance_scores(u, det_map)
        if config.min_size > 0:
            scored = size_filter(scored, config.min_size)
        recs, miss = match_instances(det_map, scored, gt_map, semantic,
                                     ood_ids, config.iou_threshold)
        records.extend(recs)
        missed.extend(miss)
    return records, missed


def eval_instance_dataset(
    root: str, config: RunConfig
) -> Tuple[MetricReport, Dict[MatchLabel, np.ndarray]]:
    records, missed = collect_instance_records(root, config)
    report = instance_report(records, missed, config.deltas,
                             roc_delta=config.roc_delta,
                             include_missed=config.include_missed)
    hist = score_histogram(records, bins=config.bins)
    return report, hist


def overlay_sample(root: str, index: int, config: RunConfig,
                   threshold: float = 0.5) -> np.ndarray:
    """RGB overlay of one sample: error map base, detector masks tinted by
    their aggregated score against the threshold."""
    manifest = ds.load_manifest(root)
    passes = int(manifest.get("softmax_passes", 0))
    u = score_map_for_sample(root, index, config.method, passes)
    det_map = _detector_map(root, index, config.detector)
    scored = aggregate_instance_scores(u, det_map)
    if config.min_size > 0:
        scored = size_filter(scored, config.min_size)
    return render_overlay(u, det_map, scored, threshold=threshold)
