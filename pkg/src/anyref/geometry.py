"""Pixel and normalized coordinate spaces, region shapes, IoU and rasterization.

Pixel coordinates are continuous: pixel ``(i, j)`` covers ``[i, i+1) x [j, j+1)``
and its center sits at ``(i + 0.5, j + 0.5)``. Normalized coordinates are the
integer tokens ``0..999`` used in referring and grounding text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

NORM_BINS = 1000


class GeometryError(ValueError):
    """Base class for geometry failures."""


class OutOfBoundsError(GeometryError):
    pass


class InvalidPolygonError(GeometryError):
    pass


class UndefinedIoUError(GeometryError):
    pass


@dataclass(frozen=True)
class Dims:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) != self.width or int(self.height) != self.height:
            raise GeometryError(f"dims must be integers, got {self.width}x{self.height}")
        if self.width < 1 or self.height < 1:
            raise GeometryError(f"dims must be positive, got {self.width}x{self.height}")

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True)
class Box:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise GeometryError(f"inverted box {self.as_list()}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def center(self) -> Point:
        return Point((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class FreeForm:
    """Simple polygon given by its vertices (>= 3), in pixel space."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidPolygonError(f"polygon needs >= 3 vertices, got {len(verts)}")
        if not is_simple_polygon(verts):
            raise InvalidPolygonError("polygon is self-intersecting")

    def bounding_box(self) -> Box:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return Box(min(xs), min(ys), max(xs), max(ys))


RegionShape = Union[Point, Box, FreeForm]


@dataclass(frozen=True)
class NormPoint:
    x: int
    y: int

    def __post_init__(self):
        _check_norm(self.x, self.y)

    def as_list(self) -> list[int]:
        return [self.x, self.y]


@dataclass(frozen=True)
class NormBox:
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        _check_norm(self.x_min, self.y_min, self.x_max, self.y_max)
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise GeometryError(f"inverted normalized box {self.as_list()}")

    def as_list(self) -> list[int]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


NormShape = Union[NormPoint, NormBox]


def _check_norm(*values):
    for v in values:
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or not 0 <= v < NORM_BINS:
            raise GeometryError(f"normalized coordinate must be an int in [0, 999], got {v!r}")


def norm_shape_from_list(values: Sequence[int]) -> NormShape:
    if len(values) == 2:
        return NormPoint(*values)
    if len(values) == 4:
        return NormBox(*values)
    raise GeometryError(f"expected 2 or 4 coordinates, got {len(values)}")


def render_coords(nshape: NormShape) -> str:
    return "[" + ", ".join(str(v) for v in nshape.as_list()) + "]"


@dataclass(frozen=True)
class BinaryMask:
    dims: Dims
    bits: np.ndarray  # (height, width) bool, row-major

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    @property
    def degenerate(self) -> bool:
        return not self.bits.any()


# -- normalization ---------------------------------------------------------


def _norm_value(coord: float, extent: int, closed: bool) -> int:
    # Box corners may sit on the far edge (coord == extent); points may not.
    if coord < 0 or coord > extent or (coord == extent and not closed):
        raise OutOfBoundsError(f"coordinate {coord} outside [0, {extent})")
    return min(math.floor(coord * NORM_BINS / extent), NORM_BINS - 1)


def normalize_shape(shape: RegionShape, dims: Dims) -> NormShape:
    """Map a pixel-space region onto 0..999 coordinate tokens.

    Each coordinate becomes ``floor(coord * 1000 / extent)`` clamped to 999.
    Free-form polygons degrade to the normalized box around them.
    """
    if isinstance(shape, Point):
        return NormPoint(_norm_value(shape.x, dims.width, False), _norm_value(shape.y, dims.height, False))
    if isinstance(shape, FreeForm):
        shape = shape.bounding_box()
    if isinstance(shape, Box):
        return NormBox(
            _norm_value(shape.x_min, dims.width, True),
            _norm_value(shape.y_min, dims.height, True),
            _norm_value(shape.x_max, dims.width, True),
            _norm_value(shape.y_max, dims.height, True),
        )
    raise TypeError(f"unsupported shape {type(shape).__name__}")


def _denorm_value(value: int, extent: int) -> float:
    return (value + 0.5) * extent / NORM_BINS


def denormalize_shape(nshape: NormShape, dims: Dims) -> Union[Point, Box]:
    """Inverse map using cell centers, so normalize(denormalize(n)) == n."""
    w, h = dims.width, dims.height
    if isinstance(nshape, NormPoint):
        return Point(_denorm_value(nshape.x, w), _denorm_value(nshape.y, h))
    return Box(
        _denorm_value(nshape.x_min, w),
        _denorm_value(nshape.y_min, h),
        _denorm_value(nshape.x_max, w),
        _denorm_value(nshape.y_max, h),
    )


# -- boxes -------------------------------------------------------------------


def iou(a: Box, b: Box) -> float:
    if a.area == 0 and b.area == 0:
        raise UndefinedIoUError("IoU of two zero-area boxes is undefined")
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area + b.area - inter
    return inter / union


def raster_scan_order(boxes: Sequence[Box]) -> list[int]:
    """Indices ordered top-to-bottom, then left-to-right.

    Key is (y_min, x_min, x_max, y_max, input index), so the order is total.
    """
    return sorted(range(len(boxes)), key=lambda i: (boxes[i].y_min, boxes[i].x_min, boxes[i].x_max, boxes[i].y_max, i))


# -- polygons ------------------------------------------------------------------


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r) -> bool:
    return min(p[0], r[0]) <= q[0] <= max(p[0], r[0]) and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return (
        (d1 == 0 and _on_segment(p3, p1, p4))
        or (d2 == 0 and _on_segment(p3, p2, p4))
        or (d3 == 0 and _on_segment(p1, p3, p2))
        or (d4 == 0 and _on_segment(p1, p4, p2))
    )


def is_simple_polygon(vertices: Sequence[tuple[float, float]]) -> bool:
    """O(n^2) check that no two non-adjacent edges touch."""
    n = len(vertices)
    if len(set(vertices)) != n:
        return False
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                # adjacent edges share a vertex; reject only a fold-back overlap
                if j == i + 1:
                    p, shared, q = edges[i][0], edges[i][1], edges[j][1]
                else:
                    p, shared, q = edges[i][1], edges[i][0], edges[j][0]
                if _orient(p, shared, q) == 0 and (_on_segment(shared, q, p) or _on_segment(shared, p, q)):
                    return False
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def rasterize_polygon(polygon: Sequence[tuple[float, float]], dims: Dims) -> BinaryMask:
    """Even-odd fill sampled at pixel centers.

    A center lying exactly on a left/top edge counts as inside and on a
    right/bottom edge as outside, so box-shaped polygons cover the half-open
    pixel-center range ``[x0, x1) x [y0, y1)``.
    """
    if len(polygon) < 3:
        raise InvalidPolygonError(f"polygon needs >= 3 vertices, got {len(polygon)}")
    verts = np.asarray(polygon, dtype=np.float64)
    bits = np.zeros((dims.height, dims.width), dtype=bool)

    # only rows/cols whose centers can fall inside the polygon's extent
    r0 = max(int(math.floor(verts[:, 1].min() - 0.5)), 0)
    r1 = min(int(math.ceil(verts[:, 1].max() - 0.5)) + 1, dims.height)
    c0 = max(int(math.floor(verts[:, 0].min() - 0.5)), 0)
    c1 = min(int(math.ceil(verts[:, 0].max() - 0.5)) + 1, dims.width)
    if r0 >= r1 or c0 >= c1:
        return BinaryMask(dims, bits)

    yc = np.arange(r0, r1, dtype=np.float64)[:, None] + 0.5
    xc = np.arange(c0, c1, dtype=np.float64)[None, :] + 0.5
    inside = np.zeros((r1 - r0, c1 - c0), dtype=bool)
    x0, y0 = verts[:, 0], verts[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for ax, ay, bx, by in zip(x0, y0, x1, y1):
        spans = (ay > yc) != (by > yc)  # (rows, 1)
        if not spans.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = ax + (yc - ay) * (bx - ax) / (by - ay)
        inside ^= spans & (x_cross > xc)
    bits[r0:r1, c0:c1] = inside
    return BinaryMask(dims, bits)


def region_mask(shape: RegionShape, dims: Dims) -> BinaryMask:
    if isinstance(shape, FreeForm):
        return rasterize_polygon(shape.vertices, dims)
    if isinstance(shape, Box):
        b = shape
        return rasterize_polygon([(b.x_min, b.y_min), (b.x_max, b.y_min), (b.x_max, b.y_max), (b.x_min, b.y_max)], dims)
    raise TypeError("points have no mask")


def check_in_bounds(shape: RegionShape, dims: Dims) -> None:
    if isinstance(shape, Point):
        pts, closed = [(shape.x, shape.y)], False
    elif isinstance(shape, Box):
        pts, closed = [(shape.x_min, shape.y_min), (shape.x_max, shape.y_max)], True
    else:
        pts, closed = shape.vertices, True
    for x, y in pts:
        if x < 0 or y < 0 or x > dims.width or y > dims.height:
            raise OutOfBoundsError(f"({x}, {y}) outside {dims.width}x{dims.height}")
        if not closed and (x == dims.width or y == dims.height):
            raise OutOfBoundsError(f"({x}, {y}) outside {dims.width}x{dims.height}")
