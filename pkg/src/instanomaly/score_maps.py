"""Pixel-wise error maps: softmax baselines and detector-mask filtering."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptySampleListError,
    InvalidDistributionError,
)

#: tolerance on per-pixel probability sums
_SUM_TOL = 1e-4


def _check_softmax(stack: np.ndarray) -> np.ndarray:
    stack = np.asarray(stack)
    if stack.ndim != 3:
        raise DimensionMismatchError(f"softmax stack must be C,H,W; got {stack.shape}")
    if not np.all(np.isfinite(stack)):
        raise InvalidDistributionError("softmax stack contains non-finite values")
    if np.any(stack < -_SUM_TOL):
        raise InvalidDistributionError("softmax stack contains negative probabilities")
    sums = stack.sum(axis=0, dtype=np.float64)
    if np.any(np.abs(sums - 1.0) > _SUM_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise InvalidDistributionError(f"per-pixel sums off by up to {worst:.2e}")
    return stack


def mcp_score(softmax: np.ndarray) -> np.ndarray:
    """One minus the per-pixel maximum class probability.

    Output is f32 in [0, 1 - 1/C] for a valid C-channel stack.
    """
    stack = _check_softmax(softmax)
    out = 1.0 - stack.max(axis=0).astype(np.float64)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def mean_softmax_entropy(samples: Sequence[np.ndarray]) -> np.ndarray:
    """Entropy of the mean softmax over T forward passes.

    Natural log, so values lie in [0, ln C]; the map is deliberately not
    rescaled into [0, 1] because every downstream metric is rank-based.
    """
    if len(samples) == 0:
        raise EmptySampleListError("need at least one softmax sample")
    first = np.asarray(samples[0])
    acc = np.zeros(first.shape, dtype=np.float64)
    for s in samples:
        s = _check_softmax(s)
        if s.shape != first.shape:
            raise DimensionMismatchError(f"sample {s.shape} vs {first.shape}")
        acc += s
    mean = acc / len(samples)
    # clamp to absorb -0.0 and tiny negatives before the log; 0 ln 0 := 0
    mean = np.clip(mean, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mean > 0.0, mean * np.log(mean), 0.0)
    return (-terms.sum(axis=0)).astype(np.float32)


def filter_error_map(u: np.ndarray, instances: np.ndarray) -> np.ndarray:
    """Zero the error map outside detector masks (background score -> 0)."""
    u = np.asarray(u)
    instances = np.asarray(instances)
    if u.shape != instances.shape:
        raise DimensionMismatchError(f"error map {u.shape} vs instances {instances.shape}")
    return np.where(instances != 0, u, np.float32(0.0)).astype(np.float32)
