"""Region feature extraction over the fused map and hybrid region assembly.

The extractor is a fixed cascade: rejection-sample points inside the region,
read the feature map at each point by bilinear interpolation, pick anchors by
farthest-point sampling, max-pool each anchor's nearest samples, and average
over anchors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import (
    Box,
    Dims,
    FreeForm,
    NormShape,
    Point,
    RegionShape,
    check_in_bounds,
    normalize_shape,
    rasterize_polygon,
    render_coords,
)

FEATURE_PLACEHOLDER = "⟨continuous_fea⟩"


class DegenerateRegionError(ValueError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    n_points: int = 512
    n_anchors: int = 32
    k_neighbors: int = 8
    point_radius_norm: float = 0.005
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_anchors <= self.n_points:
            raise ValueError("need 1 <= n_anchors <= n_points")
        if not 1 <= self.k_neighbors <= self.n_points:
            raise ValueError("need 1 <= k_neighbors <= n_points")
        if not 0 < self.point_radius_norm <= 1:
            raise ValueError("point_radius_norm must be in (0, 1]")


@dataclass(frozen=True)
class HybridRegion:
    name: Optional[str]
    coords: NormShape
    feature: tuple[float, ...]

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "coords": self.coords.as_list(), "feature": list(self.feature)})


def _effective_shape(shape: RegionShape) -> RegionShape:
    # zero-area boxes are referred to as points at their center
    if isinstance(shape, Box) and shape.area == 0:
        return shape.center
    return shape


def point_radius(dims: Dims, cfg: SamplerConfig) -> float:
    return cfg.point_radius_norm * min(dims.width, dims.height)


def region_centroid(shape: RegionShape, dims: Dims) -> tuple[float, float]:
    shape = _effective_shape(shape)
    if isinstance(shape, Point):
        return shape.x, shape.y
    if isinstance(shape, Box):
        c = shape.center
        return c.x, c.y
    ys, xs = np.nonzero(rasterize_polygon(shape.vertices, dims).bits)
    if len(xs) == 0:
        raise DegenerateRegionError("free-form region covers no pixel centers")
    return float(xs.mean() + 0.5), float(ys.mean() + 0.5)


def contains(shape: RegionShape, dims: Dims, cfg: SamplerConfig, pts: np.ndarray) -> np.ndarray:
    """Membership test matching the sampler's notion of 'inside'."""
    shape = _effective_shape(shape)
    x, y = pts[:, 0], pts[:, 1]
    in_image = (x >= 0) & (y >= 0) & (x < dims.width) & (y < dims.height)
    if isinstance(shape, Point):
        r = point_radius(dims, cfg)
        return in_image & ((x - shape.x) ** 2 + (y - shape.y) ** 2 <= r * r)
    if isinstance(shape, Box):
        return in_image & (x >= shape.x_min) & (x <= shape.x_max) & (y >= shape.y_min) & (y <= shape.y_max)
    bits = rasterize_polygon(shape.vertices, dims).bits
    out = np.zeros(len(pts), dtype=bool)
    xi = np.floor(x[in_image]).astype(np.int64)
    yi = np.floor(y[in_image]).astype(np.int64)
    out[in_image] = bits[yi, xi]
    return out


def sample_region_points(shape: RegionShape, dims: Dims, cfg: SamplerConfig = SamplerConfig()) -> np.ndarray:
    """``(n_points, 2)`` array of (x, y) drawn uniformly inside the region.

    Points are drawn over the region's bounding box and rejected when they fall
    outside: a disk for points, the box interior for boxes and the rasterized
    mask for free-form shapes.
    """
    check_in_bounds(shape, dims)
    shape = _effective_shape(shape)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_points

    if isinstance(shape, Box):
        u = rng.random((n, 2))
        x = shape.x_min + u[:, 0] * (shape.x_max - shape.x_min)
        y = shape.y_min + u[:, 1] * (shape.y_max - shape.y_min)
        pts = np.stack([x, y], axis=1)
        # the far edge of a box may coincide with the image edge
        pts[:, 0] = np.minimum(pts[:, 0], np.nextafter(dims.width, 0))
        pts[:, 1] = np.minimum(pts[:, 1], np.nextafter(dims.height, 0))
        return pts

    if isinstance(shape, Point):
        r = point_radius(dims, cfg)
        lo = np.array([shape.x - r, shape.y - r])
        span = np.array([2 * r, 2 * r])
    else:
        bits = rasterize_polygon(shape.vertices, dims).bits
        ys, xs = np.nonzero(bits)
        if len(xs) == 0:
            raise DegenerateRegionError("free-form region covers no pixel centers")
        lo = np.array([xs.min(), ys.min()], dtype=np.float64)
        span = np.array([xs.max() + 1, ys.max() + 1], dtype=np.float64) - lo

    accepted = []
    total = 0
    for _ in range(10_000):
        batch = lo + rng.random((max(2 * n, 64), 2)) * span
        keep = batch[contains(shape, dims, cfg, batch)]
        accepted.append(keep)
        total += len(keep)
        if total >= n:
            return np.concatenate(accepted)[:n]
    raise DegenerateRegionError("rejection sampling failed to fill the region")


def interpolate_features(fm: np.ndarray, dims: Dims, pts: np.ndarray) -> np.ndarray:
    """Bilinear read of ``fm`` at pixel positions; cell (i, j) is centred at
    ((i + 0.5) W / w, (j + 0.5) H / h) and queries clamp to the border cells."""
    h, w = fm.shape[:2]
    u = np.clip(pts[:, 0] * w / dims.width - 0.5, 0, w - 1)
    v = np.clip(pts[:, 1] * h / dims.height - 0.5, 0, h - 1)
    u0 = np.floor(u).astype(np.int64)
    v0 = np.floor(v).astype(np.int64)
    u1 = np.minimum(u0 + 1, w - 1)
    v1 = np.minimum(v0 + 1, h - 1)
    tu = (u - u0)[:, None]
    tv = (v - v0)[:, None]
    top = fm[v0, u0] + tu * (fm[v0, u1] - fm[v0, u0])
    bottom = fm[v1, u0] + tu * (fm[v1, u1] - fm[v1, u0])
    return top + tv * (bottom - top)


def farthest_point_sample(pts: np.ndarray, n: int, start: int) -> np.ndarray:
    idx = np.empty(n, dtype=np.int64)
    idx[0] = start
    dist = np.sum((pts - pts[start]) ** 2, axis=1)
    for i in range(1, n):
        idx[i] = int(np.argmax(dist))
        dist = np.minimum(dist, np.sum((pts - pts[idx[i]]) ** 2, axis=1))
    return idx


def extract_region_feature(h_a: np.ndarray, shape: RegionShape, dims: Dims, cfg: SamplerConfig = SamplerConfig()) -> np.ndarray:
    pts = sample_region_points(shape, dims, cfg)
    values = interpolate_features(h_a, dims, pts)
    cx, cy = region_centroid(shape, dims)
    start = int(np.argmin((pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2))
    anchors = farthest_point_sample(pts, cfg.n_anchors, start)
    d2 = np.sum((pts[anchors][:, None, :] - pts[None, :, :]) ** 2, axis=2)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : cfg.k_neighbors]
    pooled = values[nearest].max(axis=1)  # (n_anchors, c)
    return pooled.mean(axis=0)


def build_hybrid(name: Optional[str], shape: RegionShape, dims: Dims, feature) -> tuple[HybridRegion, str]:
    coords = normalize_shape(shape, dims)
    region = HybridRegion(name, coords, tuple(float(v) for v in np.asarray(feature).ravel()))
    parts = [name] if name else []
    parts += [render_coords(coords), FEATURE_PLACEHOLDER]
    return region, " ".join(parts)
