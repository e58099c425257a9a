"""Merging local patch features, upsampling the global map, fusion and flattening."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .anyres import GridConfig
from .encoders import ShapeError

GLOBAL_TAG = "global"
LOCAL_TAG = "local"


class DownsampleError(ValueError):
    pass


@dataclass
class TokenSequence:
    vectors: np.ndarray  # (n_tokens, c)
    tags: list[str]

    def __len__(self):
        return len(self.tags)


def merge_local(patches: Sequence[np.ndarray], grid: GridConfig) -> np.ndarray:
    """Place patch maps as blocks in their original row-major arrangement."""
    if len(patches) != grid.cells:
        raise ShapeError(f"grid {grid} needs {grid.cells} patch maps, got {len(patches)}")
    shapes = {p.shape for p in patches}
    if len(shapes) != 1:
        raise ShapeError(f"patch maps differ in shape: {sorted(shapes)}")
    rows = [np.concatenate(patches[r * grid.cols:(r + 1) * grid.cols], axis=1) for r in range(grid.rows)]
    return np.concatenate(rows, axis=0)


def split_merged(merged: np.ndarray, grid: GridConfig) -> list[np.ndarray]:
    h = merged.shape[0] // grid.rows
    w = merged.shape[1] // grid.cols
    return [merged[r * h:(r + 1) * h, c * w:(c + 1) * w] for r in range(grid.rows) for c in range(grid.cols)]


def _upsample_axis(arr: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    in_len = arr.shape[axis]
    if in_len == out_len:
        return arr
    if in_len == 1:
        return np.repeat(arr, out_len, axis=axis)
    pos = np.arange(out_len, dtype=np.float64) * (in_len - 1) / (out_len - 1)
    i0 = np.minimum(np.floor(pos).astype(np.int64), in_len - 1)
    i1 = np.minimum(i0 + 1, in_len - 1)
    t = pos - i0
    shape = [1] * arr.ndim
    shape[axis] = out_len
    a = np.take(arr, i0, axis=axis)
    b = np.take(arr, i1, axis=axis)
    # a + t*(b - a) keeps constants exact and hits endpoints with t == 0
    return a + t.reshape(shape) * (b - a)


def upsample_global(fm: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear upsampling with align_corners=True."""
    h, w = fm.shape[:2]
    if target_w < w or target_h < h:
        raise DownsampleError(f"cannot upsample {w}x{h} to smaller {target_w}x{target_h}")
    out = _upsample_axis(fm, target_w, axis=1)
    return _upsample_axis(out, target_h, axis=0)


def fuse(merged: np.ndarray, upsampled_global: np.ndarray) -> np.ndarray:
    if merged.shape != upsampled_global.shape:
        raise ShapeError(f"cannot fuse {merged.shape} with {upsampled_global.shape}")
    return merged + upsampled_global


def flatten_tokens(global_fm: np.ndarray, merged: np.ndarray) -> TokenSequence:
    """Global cells (row-major) followed by merged local cells (row-major)."""
    if global_fm.shape[-1] != merged.shape[-1]:
        raise ShapeError("global and local maps have different channel counts")
    if merged.size == 0 or global_fm.size == 0:
        raise ShapeError("cannot flatten an empty feature map")
    c = merged.shape[-1]
    g = global_fm.reshape(-1, c)
    loc = merged.reshape(-1, c)
    return TokenSequence(np.concatenate([g, loc], axis=0), [GLOBAL_TAG] * len(g) + [LOCAL_TAG] * len(loc))
