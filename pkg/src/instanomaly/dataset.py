"""Dataset directory layout, manifest, and seeded generation.

A dataset is a root directory holding `manifest.json` plus one
`sample_%05d/` directory per sample with `semantic.iat`,
`gt_instances.iat`, `det_instances.iat`, `error.iat`, and optionally
`softmax_t%02d.iat` per forward pass.  The manifest records everything
needed to re-derive or evaluate the data (scene/noise parameters, master
seed, OOD and stuff class ids, connectivity), so evaluation commands need
no extra flags.

Per-sample seeds come from derive_seed(master, 4*i + j) with j = 0 scene,
1 error map, 2 mask corruption, 3 softmax — four independent streams per
sample, stable under resizing the dataset.
"""

from __future__ import annotations

import dataclasses
import json
import os
import shutil
from typing import Optional

import numpy as np

from . import tensor_store
from .errors import MissingSampleError
from .rng import derive_seed
from .synth import NoiseSpec, Scene, SceneSpec, child_spec, corrupt_masks, \
    generate_error_map, generate_scene, generate_softmax_stack

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = 1

_STREAM_SCENE = 0
_STREAM_ERROR = 1
_STREAM_CORRUPT = 2
_STREAM_SOFTMAX = 3


def sample_dir(root: str, index: int) -> str:
    return os.path.join(root, f"sample_{index:05d}")


def write_manifest(root: str, manifest: dict) -> None:
    text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    with open(os.path.join(root, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        fh.write(text)


def load_manifest(root: str) -> dict:
    path = os.path.join(root, MANIFEST_NAME)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def build_manifest(n_samples: int, master_seed: int, spec: SceneSpec,
                   noise: NoiseSpec, softmax_passes: int) -> dict:
    scene_fields = dataclasses.asdict(spec)
    scene_fields.pop("seed")
    scene_fields["shapes"] = list(spec.shapes)
    return {
        "format_version": FORMAT_VERSION,
        "n_samples": n_samples,
        "master_seed": master_seed,
        "scene": scene_fields,
        "noise": dataclasses.asdict(noise),
        "ood_class_ids": list(spec.ood_class_ids),
        "stuff_class_ids": [0],
        "connectivity": spec.connectivity,
        "softmax_passes": softmax_passes,
    }


def generate_sample(root: str, index: int, master_seed: int, spec: SceneSpec,
                    noise: NoiseSpec, softmax_passes: int = 0) -> Scene:
    """Generate and write one sample directory; cleans up after failure."""
    out = sample_dir(root, index)
    os.makedirs(out, exist_ok=True)
    try:
        scene = generate_scene(child_spec(
            spec, derive_seed(master_seed, 4 * index + _STREAM_SCENE)))
        error = generate_error_map(
            scene, noise, derive_seed(master_seed, 4 * index + _STREAM_ERROR))
        det = corrupt_masks(
            scene.instances, noise.mask_erosion, noise.mask_dilation,
            noise.drop_probability,
            derive_seed(master_seed, 4 * index + _STREAM_CORRUPT))
        tensor_store.write_tensor(scene.semantic, os.path.join(out, "semantic.iat"))
        tensor_store.write_tensor(scene.instances,
                                  os.path.join(out, "gt_instances.iat"))
        tensor_store.write_tensor(det, os.path.join(out, "det_instances.iat"))
        tensor_store.write_tensor(error, os.path.join(out, "error.iat"))
        if softmax_passes > 0:
            stack = generate_softmax_stack(
                scene, softmax_passes,
                derive_seed(master_seed, 4 * index + _STREAM_SOFTMAX))
            for t in range(softmax_passes):
                tensor_store.write_tensor(
                    stack[t], os.path.join(out, f"softmax_t{t:02d}.iat"))
        return scene
    except Exception:
        shutil.rmtree(out, ignore_errors=True)
        raise


def generate_dataset(root: str, n_samples: int, master_seed: int,
                     spec: SceneSpec, noise: NoiseSpec,
                     softmax_passes: int = 0) -> None:
    """Write a full dataset tree (manifest first, then each sample)."""
    os.makedirs(root, exist_ok=True)
    write_manifest(root, build_manifest(
        n_samples, master_seed, spec, noise, softmax_passes))
    for i in range(n_samples):
        generate_sample(root, i, master_seed, spec, noise, softmax_passes)


def spec_from_manifest(manifest: dict) -> SceneSpec:
    fields = dict(manifest["scene"])
    fields["shapes"] = tuple(fields["shapes"])
    return SceneSpec(seed=0, **fields)


def noise_from_manifest(manifest: dict) -> NoiseSpec:
    return NoiseSpec(**manifest["noise"])


def read_sample_tensor(root: str, index: int, name: str,
                       expect: Optional[str] = None) -> np.ndarray:
    d = sample_dir(root, index)
    path = os.path.join(d, name)
    if not os.path.isdir(d) or not os.path.exists(path):
        raise MissingSampleError(f"no {name} for sample {index} under {root}")
    return tensor_store.read_tensor(path, expect=expect)
