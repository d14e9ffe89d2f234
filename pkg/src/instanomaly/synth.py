"""Seeded synthetic scenes: semantic maps, instances, error maps, softmax.

Desk-scale stand-in for a trained segmentation network plus dataset.  Every
output is a pure function of (spec, seed) through the counter-based RNG in
:mod:`instanomaly.rng`, so fixtures are reproducible byte for byte across
platforms and library versions.

Scenes are flat semantic label maps: class 0 is background (stuff), the
next ids are in-distribution object classes, and the top ``n_ood_classes``
ids are out-of-distribution.  Objects never touch — placement reserves the
bounding box plus a one-pixel margin — so each placed object is exactly one
connected component under either connectivity, and the ground-truth
instance map equals gt_detector(semantic) by construction.

Error maps emulate an upstream error/uncertainty estimator: Gaussian
"signal" on object pixels (around ood_signal / in_dist_signal), uniform
background noise, and additive uniform noise in the two-pixel band across
class boundaries — the classic nuisance that makes unfiltered pixel
rankings look bad.  Mask corruption (erode / dilate / drop) degrades the
ground-truth instances into a plausible imperfect detector output.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage as ndi

from .errors import PlacementOverflowError
from .instances import gt_detector, relabel_by_first_pixel
from .rng import CounterRng

_PLACEMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class SceneSpec:
    """Geometry and class layout of a synthetic scene."""

    height: int = 128
    width: int = 128
    n_objects: int = 8
    ood_fraction: float = 0.25
    n_classes: int = 8
    n_ood_classes: int = 2
    min_size: int = 8
    max_size: int = 20
    shapes: Tuple[str, ...] = ("rectangle", "ellipse", "l")
    connectivity: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValueError(f"bad frame {self.height}x{self.width}")
        if not 0.0 <= self.ood_fraction <= 1.0:
            raise ValueError(f"ood_fraction {self.ood_fraction} outside [0, 1]")
        if not 1 <= self.min_size <= self.max_size:
            raise ValueError(f"bad size range [{self.min_size}, {self.max_size}]")
        if self.max_size > min(self.height, self.width):
            raise ValueError("max_size exceeds the frame")
        if self.n_ood_classes < 1 or self.n_classes < 2:
            raise ValueError("need background, and at least one OOD class")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if not self.shapes:
            raise ValueError("empty shape palette")

    @property
    def n_ood_objects(self) -> int:
        # round half up
        return int(np.floor(self.n_objects * self.ood_fraction + 0.5))

    @property
    def ood_class_ids(self) -> Tuple[int, ...]:
        return tuple(range(self.n_classes - self.n_ood_classes, self.n_classes))


@dataclass(frozen=True)
class NoiseSpec:
    """Amplitudes of the synthetic error map and detector corruption."""

    background_noise: float = 0.2
    boundary_noise: float = 0.0
    ood_signal: float = 0.9
    in_dist_signal: float = 0.1
    signal_sigma: float = 0.05
    mask_erosion: int = 0
    mask_dilation: int = 0
    drop_probability: float = 0.0

    def __post_init__(self) -> None:
        for name in ("background_noise", "boundary_noise", "ood_signal",
                     "in_dist_signal", "drop_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.signal_sigma < 0.0:
            raise ValueError(f"signal_sigma must be >= 0, got {self.signal_sigma}")
        if self.mask_erosion < 0 or self.mask_dilation < 0:
            raise ValueError("corruption radii must be >= 0")


@dataclass
class Scene:
    spec: SceneSpec
    semantic: np.ndarray       # uint8 (H, W)
    instances: np.ndarray      # uint16 (H, W), ground truth
    ood_class_ids: Tuple[int, ...]

    def ood_pixels(self) -> np.ndarray:
        return np.isin(self.semantic, np.array(self.ood_class_ids, dtype=np.uint8))


def _shape_mask(kind: str, h: int, w: int) -> np.ndarray:
    if kind == "rectangle":
        return np.ones((h, w), dtype=bool)
    if kind == "ellipse":
        yy, xx = np.ogrid[:h, :w]
        cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
        ry, rx = h / 2.0, w / 2.0
        return ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    if kind == "l":
        m = np.ones((h, w), dtype=bool)
        m[: h - max(1, h // 2), max(1, w // 2):] = False
        return m
    raise ValueError(f"unknown shape kind {kind!r}")


def generate_scene(spec: SceneSpec) -> Scene:
    """Place spec.n_objects non-touching objects; first n_ood are OOD.

    Per object the RNG draws, in order: class, shape kind, height, width,
    then (y, x) positions until one fits.  Each placement reserves the
    object's bounding box plus a one-pixel margin, giving a Chebyshev gap
    of at least two between objects.  A placement failing 1000 attempts
    raises PlacementOverflowError.
    """
    n_ood = spec.n_ood_objects
    ood_lo = spec.n_classes - spec.n_ood_classes
    if spec.n_objects - n_ood > 0 and ood_lo < 2:
        raise ValueError("no in-distribution class id available")
    rng = CounterRng(spec.seed)
    semantic = np.zeros((spec.height, spec.width), dtype=np.uint8)
    blocked = np.zeros((spec.height, spec.width), dtype=bool)
    for i in range(spec.n_objects):
        if i < n_ood:
            cls = rng.randint(ood_lo, spec.n_classes)
        else:
            cls = rng.randint(1, ood_lo)
        kind = spec.shapes[rng.randint(0, len(spec.shapes))]
        h = rng.randint(spec.min_size, spec.max_size + 1)
        w = rng.randint(spec.min_size, spec.max_size + 1)
        mask = _shape_mask(kind, h, w)
        for _ in range(_PLACEMENT_ATTEMPTS):
            y = rng.randint(0, spec.height - h + 1)
            x = rng.randint(0, spec.width - w + 1)
            y0, y1 = max(y - 1, 0), min(y + h + 1, spec.height)
            x0, x1 = max(x - 1, 0), min(x + w + 1, spec.width)
            if not blocked[y0:y1, x0:x1].any():
                semantic[y:y + h, x:x + w][mask] = cls
                blocked[y:y + h, x:x + w] = True
                break
        else:
            raise PlacementOverflowError(
                f"object {i} ({h}x{w}) found no free slot in "
                f"{_PLACEMENT_ATTEMPTS} attempts"
            )
    instances = gt_detector(semantic, connectivity=spec.connectivity,
                            stuff_classes=(0,))
    return Scene(spec=spec, semantic=semantic, instances=instances,
                 ood_class_ids=spec.ood_class_ids)


def boundary_band(semantic: np.ndarray) -> np.ndarray:
    """Pixels with a 4-neighbor of a different class — a two-pixel band
    straddling every class boundary."""
    b = np.zeros(semantic.shape, dtype=bool)
    diff = semantic[:-1, :] != semantic[1:, :]
    b[:-1, :] |= diff
    b[1:, :] |= diff
    diff = semantic[:, :-1] != semantic[:, 1:]
    b[:, :-1] |= diff
    b[:, 1:] |= diff
    return b


def generate_error_map(scene: Scene, noise: NoiseSpec, seed: int) -> np.ndarray:
    """Synthetic error/uncertainty map for a scene, clamped to [0, 1].

    Draw order (fixed, so the stream is reproducible): full-grid background
    uniforms, then in-distribution object normals, then OOD object normals,
    then boundary-band uniforms — each block consumed in raster order of
    its mask.
    """
    rng = CounterRng(seed)
    u = rng.uniform(scene.semantic.shape) * noise.background_noise
    ood = scene.ood_pixels()
    in_dist = (scene.semantic != 0) & ~ood
    n = int(in_dist.sum())
    if n:
        u[in_dist] = rng.normal(noise.in_dist_signal, noise.signal_sigma, (n,))
    n = int(ood.sum())
    if n:
        u[ood] = rng.normal(noise.ood_signal, noise.signal_sigma, (n,))
    band = boundary_band(scene.semantic)
    n = int(band.sum())
    if n:
        u[band] += rng.uniform((n,)) * noise.boundary_noise
    return np.clip(u, 0.0, 1.0).astype(np.float32)


def corrupt_masks(
    instances: np.ndarray,
    erosion: int,
    dilation: int,
    drop_probability: float,
    seed: int,
) -> np.ndarray:
    """Degrade an instance map into an imperfect detector's output.

    Each instance (ascending id; one uniform draw per instance regardless
    of outcome) is dropped with drop_probability, otherwise eroded then
    dilated by the given radii with a 3x3 square element.  Surviving masks
    paint in ascending id order, so on overlap the higher id wins; the
    result is relabeled densely in raster order of first pixel.
    """
    rng = CounterRng(seed)
    out = np.zeros(instances.shape, dtype=np.uint16)
    se = np.ones((3, 3), dtype=bool)
    for inst_id in np.unique(instances):
        if inst_id == 0:
            continue
        dropped = rng.uniform() < drop_probability
        if dropped:
            continue
        m = instances == inst_id
        if erosion:
            m = ndi.binary_erosion(m, structure=se, iterations=erosion)
        if dilation:
            m = ndi.binary_dilation(m, structure=se, iterations=dilation)
        out[m] = inst_id
    return relabel_by_first_pixel(out)


def generate_softmax_stack(
    scene: Scene, n_passes: int, seed: int
) -> np.ndarray:
    """Per-pass softmax predictions of a pretend segmentation network.

    The network knows only the non-OOD classes (ids 0 .. C_model-1 with
    C_model = n_classes - n_ood_classes).  On known pixels it predicts the
    true class with confidence ~N(0.9, 0.05) every pass; on OOD pixels it
    picks a random known class anew each pass with confidence
    ~N(0.55, 0.1).  Leftover mass spreads uniformly, so each pixel's
    distribution sums to one exactly.  Returns (n_passes, C_model, H, W)
    float32.
    """
    c_model = scene.spec.n_classes - scene.spec.n_ood_classes
    if c_model < 2:
        raise ValueError("need at least two known classes for a distribution")
    if n_passes < 1:
        raise ValueError(f"n_passes must be >= 1, got {n_passes}")
    rng = CounterRng(seed)
    h, w = scene.semantic.shape
    ood = scene.ood_pixels().ravel()
    known_cls = scene.semantic.ravel().astype(np.int64)
    n_ood = int(ood.sum())
    n_known = known_cls.size - n_ood
    out = np.empty((n_passes, c_model, h, w), dtype=np.float32)
    lo, hi = 1.0 / c_model, 1.0
    for t in range(n_passes):
        p = np.empty(known_cls.size, dtype=np.float64)
        cls = known_cls.copy()
        p[~ood] = np.clip(rng.normal(0.9, 0.05, (n_known,)), lo, hi)
        if n_ood:
            cls[ood] = rng.randint_block(0, c_model, n_ood)
            p[ood] = np.clip(rng.normal(0.55, 0.10, (n_ood,)), lo, hi)
        rest = (1.0 - p) / (c_model - 1)
        stack = np.repeat(rest[np.newaxis, :], c_model, axis=0)
        stack[cls, np.arange(cls.size)] = p
        out[t] = stack.reshape(c_model, h, w).astype(np.float32)
    return out


def child_spec(spec: SceneSpec, seed: int) -> SceneSpec:
    """Copy of spec with its seed replaced (per-sample derivation hook)."""
    return dataclasses.replace(spec, seed=seed)
