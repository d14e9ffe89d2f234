"""Instance-wise anomaly scoring and OOD evaluation toolkit.

Turns pixel-wise error/uncertainty maps plus class-agnostic instance masks
into per-instance anomaly scores, and evaluates out-of-distribution object
detection with pixel-wise and instance-wise metrics on seeded synthetic
scenes.
"""

from .dataset import (
    generate_dataset,
    generate_sample,
    load_manifest,
    read_sample_tensor,
)
from .errors import (
    BadMagicError,
    DegeneratePopulationError,
    DimensionMismatchError,
    DtypeMismatchError,
    EmptySampleListError,
    InstanomalyError,
    InvalidDimsError,
    InvalidDistributionError,
    MissingSampleError,
    PlacementOverflowError,
    TruncatedFileError,
    UnknownInstanceIdError,
)
from .evaluate import (
    RunConfig,
    collect_instance_records,
    eval_instance_dataset,
    eval_pixel_dataset,
    overlay_sample,
    score_map_for_sample,
)
from .instances import (
    DEFAULT_MIN_SIZE,
    ScoredInstance,
    aggregate_instance_scores,
    gt_detector,
    relabel_by_first_pixel,
    size_filter,
)
from .matching import MatchLabel, MatchRecord, mask_iou, match_instances
from .metrics import (
    MetricReport,
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
from .rng import CounterRng, derive_seed
from .score_maps import filter_error_map, mcp_score, mean_softmax_entropy
from .synth import (
    NoiseSpec,
    Scene,
    SceneSpec,
    boundary_band,
    corrupt_masks,
    generate_error_map,
    generate_scene,
    generate_softmax_stack,
)
from .tensor_store import (
    read_tensor,
    render_overlay,
    write_overlay,
    write_ppm,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "CounterRng",
    "DEFAULT_MIN_SIZE",
    "DegeneratePopulationError",
    "DimensionMismatchError",
    "DtypeMismatchError",
    "EmptySampleListError",
    "InstanomalyError",
    "InvalidDimsError",
    "InvalidDistributionError",
    "MatchLabel",
    "MatchRecord",
    "MetricReport",
    "MissingSampleError",
    "NoiseSpec",
    "PlacementOverflowError",
    "RunConfig",
    "Scene",
    "SceneSpec",
    "ScoredInstance",
    "ScoredPopulation",
    "TruncatedFileError",
    "UnknownInstanceIdError",
    "aggregate_instance_scores",
    "aupr",
    "auroc",
    "boundary_band",
    "collect_instance_records",
    "corrupt_masks",
    "derive_seed",
    "eval_instance_dataset",
    "eval_pixel_dataset",
    "filter_error_map",
    "fpr_at_tpr",
    "generate_dataset",
    "generate_error_map",
    "generate_sample",
    "generate_scene",
    "generate_softmax_stack",
    "gt_detector",
    "load_manifest",
    "instance_report",
    "map_delta",
    "mask_iou",
    "match_instances",
    "mcp_score",
    "mean_softmax_entropy",
    "overlay_sample",
    "pixel_population",
    "pixel_report",
    "read_sample_tensor",
    "read_tensor",
    "relabel_by_first_pixel",
    "render_overlay",
    "roc_points",
    "score_histogram",
    "score_map_for_sample",
    "size_filter",
    "write_overlay",
    "write_ppm",
    "write_tensor",
]
