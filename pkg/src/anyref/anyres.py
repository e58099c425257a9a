"""Any-resolution grid selection and tiling.

An input image is resized to the canvas of the best grid from a fixed catalog
and cut into ``cell_size`` square patches; a separate ``cell_size`` square
global view is produced alongside.

Rasters are ``uint8`` arrays shaped ``(height, width, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import Dims

DEFAULT_CELL_SIZE = 336
DEFAULT_MAX_CELLS = 6
DEFAULT_TOKEN_BUDGET = 1280

# (rows, cols); transposes of the non-square entries are appended in this order
_BASE_GRIDS = [(1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 2), (2, 3)]


@dataclass(frozen=True)
class GridConfig:
    rows: int
    cols: int

    @property
    def cells(self) -> int:
        return self.rows * self.cols

    def __str__(self):
        return f"{self.rows}x{self.cols}"


@dataclass(frozen=True)
class TileLayout:
    grid: GridConfig
    cell_size: int
    canvas: Dims
    source: Dims


def default_catalog(max_cells: int = DEFAULT_MAX_CELLS) -> list[GridConfig]:
    if max_cells < 1:
        raise ValueError("max_cells must be >= 1")
    grids = [g for g in _BASE_GRIDS if g[0] * g[1] <= max_cells]
    grids += [(c, r) for r, c in grids if r != c]
    seen = []
    for r, c in grids:
        if (r, c) not in seen:
            seen.append((r, c))
    return [GridConfig(r, c) for r, c in seen]


def grid_scores(source: Dims, grid: GridConfig, cell_size: int) -> tuple[Fraction, Fraction]:
    """Exact (effective, wasted) areas for fitting ``source`` into ``grid``."""
    W, H = source.width, source.height
    cw, ch = grid.cols * cell_size, grid.rows * cell_size
    scale = min(Fraction(cw, W), Fraction(ch, H))
    fitted = scale * W * scale * H
    effective = min(fitted, Fraction(W * H))
    wasted = cw * ch - fitted
    return effective, wasted


def select_grid(source: Dims, catalog: Sequence[GridConfig], cell_size: int = DEFAULT_CELL_SIZE) -> GridConfig:
    """Pick the grid that keeps the most source resolution with the least waste.

    Ranking: maximum effective area, then minimum wasted canvas area, then
    fewer cells, then catalog order. Areas are compared as exact rationals.
    """
    if not catalog:
        raise ValueError("empty grid catalog")
    best_key, best = None, None
    for order, grid in enumerate(catalog):
        effective, wasted = grid_scores(source, grid, cell_size)
        key = (-effective, wasted, grid.cells, order)
        if best_key is None or key < best_key:
            best_key, best = key, grid
    return best


def token_count(grid: GridConfig, tokens_per_image: int) -> int:
    """Visual tokens for the global view plus every local patch."""
    if tokens_per_image < 1:
        raise ValueError("tokens_per_image must be >= 1")
    return (grid.cells + 1) * tokens_per_image


def within_budget(grid: GridConfig, tokens_per_image: int, budget: int = DEFAULT_TOKEN_BUDGET) -> bool:
    return token_count(grid, tokens_per_image) <= budget


def _resize_axis(arr: np.ndarray, out_len: int, axis: int) -> np.ndarray:
    in_len = arr.shape[axis]
    if in_len == out_len:
        return arr
    i = np.arange(out_len, dtype=np.float64)
    src = np.maximum((i + 0.5) * (in_len / out_len) - 0.5, 0.0)
    i0 = np.minimum(np.floor(src).astype(np.int64), in_len - 1)
    i1 = np.minimum(i0 + 1, in_len - 1)
    t = src - i0
    a = np.take(arr, i0, axis=axis)
    b = np.take(arr, i1, axis=axis)
    shape = [1] * arr.ndim
    shape[axis] = out_len
    return a + t.reshape(shape) * (b - a)


def resize_bilinear(image: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize with half-pixel centers (align_corners=False), edges clamped."""
    out = image.astype(np.float64)
    out = _resize_axis(out, width, axis=1)
    out = _resize_axis(out, height, axis=0)
    if image.dtype == np.uint8:
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out


def tile(image: np.ndarray, grid: GridConfig, cell_size: int = DEFAULT_CELL_SIZE):
    """Split ``image`` into a global view and row-major local patches.

    Returns:
        (global_view, patches, layout). The global view is the whole image
        resized to ``cell_size`` square; patches are ``cell_size`` square crops
        of the image resized to the grid canvas (aspect is not preserved).
    """
    height, width = image.shape[:2]
    S = cell_size
    layout = TileLayout(grid, S, Dims(grid.cols * S, grid.rows * S), Dims(width, height))
    global_view = resize_bilinear(image, S, S)
    canvas = resize_bilinear(image, layout.canvas.width, layout.canvas.height)
    patches = [
        canvas[r * S:(r + 1) * S, c * S:(c + 1) * S].copy()
        for r in range(grid.rows)
        for c in range(grid.cols)
    ]
    return global_view, patches, layout


def assemble(patches: Sequence[np.ndarray], grid: GridConfig) -> np.ndarray:
    """Inverse of the patch split: stitch row-major patches back into a canvas."""
    rows = [np.concatenate(patches[r * grid.cols:(r + 1) * grid.cols], axis=1) for r in range(grid.rows)]
    return np.concatenate(rows, axis=0)
