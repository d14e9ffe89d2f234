"""Binary interchange: the IAT1 raw tensor container and PPM (P6) renders.

IAT1 layout, all little-endian regardless of host:

    bytes 0-3   magic "IAT1"
    byte  4     dtype code (1=u8, 2=u16, 3=f32)
    byte  5     ndim (2 or 3)
    bytes 6..   ndim x u32 dims, row-major order (C,)H,W
    then        row-major payload

Grid roles map onto (dtype code, ndim) pairs: error maps are (f32, 2),
softmax stacks (f32, 3) with dims C,H,W, instance label maps (u16, 2) and
semantic label maps (u8, 2).
"""

from __future__ import annotations

import struct
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadMagicError,
    DimensionMismatchError,
    DtypeMismatchError,
    InvalidDimsError,
    TruncatedFileError,
    UnknownInstanceIdError,
)

MAGIC = b"IAT1"

_DTYPES = {1: np.dtype("<u1"), 2: np.dtype("<u2"), 3: np.dtype("<f4")}
_CODES = {np.dtype(np.uint8): 1, np.dtype(np.uint16): 2, np.dtype(np.float32): 3}

#: role name -> (dtype code, ndim)
ROLES = {
    "error_map": (3, 2),
    "softmax": (3, 3),
    "instances": (2, 2),
    "semantic": (1, 2),
}


def read_tensor(path, expect: Optional[str] = None) -> np.ndarray:
    """Read an IAT1 file into a C-contiguous array, bit-exact.

    ``expect`` may name a role from :data:`ROLES`; a file whose dtype/ndim
    does not fit that role raises :class:`DtypeMismatchError`.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 6:
        raise TruncatedFileError(f"{path}: shorter than the fixed header")
    if raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: magic {raw[:4]!r} != {MAGIC!r}")
    code, ndim = raw[4], raw[5]
    if code not in _DTYPES:
        raise DtypeMismatchError(f"{path}: unknown dtype code {code}")
    if ndim not in (2, 3):
        raise InvalidDimsError(f"{path}: ndim {ndim} not in (2, 3)")
    header_len = 6 + 4 * ndim
    if len(raw) < header_len:
        raise TruncatedFileError(f"{path}: header cut off")
    dims = struct.unpack_from(f"<{ndim}I", raw, 6)
    if any(d == 0 for d in dims):
        raise InvalidDimsError(f"{path}: zero-length dimension in {dims}")
    dtype = _DTYPES[code]
    expected = header_len + int(np.prod([int(d) for d in dims])) * dtype.itemsize
    if len(raw) != expected:
        raise TruncatedFileError(
            f"{path}: file length {len(raw)} != expected {expected}"
        )
    if expect is not None:
        want_code, want_ndim = ROLES[expect]
        if (code, ndim) != (want_code, want_ndim):
            raise DtypeMismatchError(
                f"{path}: role {expect!r} wants (code={want_code}, ndim={want_ndim}),"
                f" file has (code={code}, ndim={ndim})"
            )
    arr = np.frombuffer(raw, dtype=dtype, offset=header_len).reshape(dims)
    # native byte order + writable copy (frombuffer views are read-only)
    return arr.astype(dtype.newbyteorder("="), copy=True)


def write_tensor(grid: np.ndarray, path) -> None:
    """Write a grid as IAT1. ``read_tensor(write_tensor(g)) == g`` bit-exactly."""
    grid = np.asarray(grid)
    dtype = grid.dtype.newbyteorder("=")
    if np.dtype(dtype) not in _CODES:
        raise DtypeMismatchError(f"unsupported dtype {grid.dtype}; use u8/u16/f32")
    if grid.ndim not in (2, 3):
        raise InvalidDimsError(f"ndim {grid.ndim} not in (2, 3)")
    if any(d == 0 or d >= 2**32 for d in grid.shape):
        raise InvalidDimsError(f"dims out of range: {grid.shape}")
    code = _CODES[np.dtype(dtype)]
    header = MAGIC + bytes([code, grid.ndim])
    header += struct.pack(f"<{grid.ndim}I", *grid.shape)
    payload = np.ascontiguousarray(grid).astype(_DTYPES[code], copy=False)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes(order="C"))


def write_ppm(rgb: np.ndarray, path) -> None:
    """Write an H x W x 3 uint8 array as binary PPM (P6, maxval 255)."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise InvalidDimsError(f"expected HxWx3 uint8, got {rgb.shape} {rgb.dtype}")
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb).tobytes(order="C"))


def render_overlay(base, instances, scores, threshold: float = 0.5) -> np.ndarray:
    """Render a score overlay as an H x W x 3 uint8 image.

    The base map becomes grayscale (f32 error maps scaled to 0..255, u8
    semantic maps used as raw gray values).  Pixels of any scored instance
    are blended 50/50 with pure red when its score exceeds ``threshold``,
    pure green otherwise.  Blending is integer (gray + tint) // 2, so the
    output is deterministic byte for byte.
    """
    base = np.asarray(base)
    instances = np.asarray(instances)
    if base.shape != instances.shape:
        raise DimensionMismatchError(
            f"base {base.shape} vs instances {instances.shape}"
        )
    if base.dtype.kind == "f":
        gray = np.rint(np.clip(base, 0.0, 1.0) * 255.0).astype(np.uint16)
    else:
        gray = base.astype(np.uint16)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    present = set(np.unique(instances).tolist()) - {0}
    for inst in scores:
        if inst.id not in present:
            raise UnknownInstanceIdError(f"instance id {inst.id} not in label map")
        tint = (255, 0, 0) if inst.score > threshold else (0, 255, 0)
        mask = instances == inst.id
        for c in range(3):
            chan = rgb[:, :, c]
            chan[mask] = (chan[mask] + tint[c]) // 2
    return rgb.astype(np.uint8)


def write_overlay(base, instances, scores: Sequence, path, threshold: float = 0.5) -> None:
    """Render and write the overlay PPM for a scored instance set."""
    write_ppm(render_overlay(base, instances, scores, threshold), path)
