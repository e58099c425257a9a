"""End-to-end composition: tile, encode, project, fuse, flatten and refer."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..anyres import GridConfig, TileLayout, default_catalog, select_grid, tile, token_count
from ..encoders import ProjectorWeights, StatProfile, encode_stats, init_projector, project
from ..fusion import flatten_tokens, fuse, merge_local, upsample_global
from ..geometry import Dims, RegionShape
from ..promptgen import AnnotatedImage, AnnotatedObject
from ..rng import derive_seed
from ..sampler import DegenerateRegionError, build_hybrid, extract_region_feature
from .config import Config
from .ppm import ImageReadError, read_ppm

@dataclass
class Models:
    """Projector weights shared read-only by all workers."""

    projector_g: ProjectorWeights
    projector_l: ProjectorWeights

    @classmethod
    def from_config(cls, cfg: Config) -> "Models":
        dims = (cfg.c_raw, cfg.c_hidden, cfg.c_out)
        return cls(init_projector(derive_seed(cfg.seed, "projector_g"), *dims),
                   init_projector(derive_seed(cfg.seed, "projector_l"), *dims))


@dataclass
class Encoded:
    grid: GridConfig
    layout: TileLayout
    global_map: np.ndarray  # projected global features
    merged: np.ndarray  # projected local features in grid arrangement
    fused: np.ndarray


def encode_image(image: np.ndarray, cfg: Config, models: Models) -> Encoded:
    h, w = image.shape[:2]
    grid = select_grid(Dims(w, h), default_catalog(cfg.max_cells), cfg.cell_size)
    global_view, patches, layout = tile(image, grid, cfg.cell_size)
    enc = cfg.encoder()
    h_g = project(encode_stats(global_view, StatProfile.GLOBAL, enc), models.projector_g)
    h_l = [project(encode_stats(p, StatProfile.LOCAL, enc), models.projector_l) for p in patches]
    merged = merge_local(h_l, grid)
    fused = fuse(merged, upsample_global(h_g, merged.shape[1], merged.shape[0]))
    return Encoded(grid, layout, h_g, merged, fused)


def object_shape(obj: AnnotatedObject) -> RegionShape:
    if obj.polygon is not None:
        return obj.polygon
    return obj.box


def token_digest(vectors: np.ndarray) -> str:
    return hashlib.blake2b(np.ascontiguousarray(vectors, dtype="<f8").tobytes(), digest_size=8).hexdigest()


def process_image(img: AnnotatedImage, cfg: Config, models: Models) -> dict:
    if img.image_path is None:
        return {"image_id": img.image_id, "error": "record has no image_path"}
    try:
        image = read_ppm(img.image_path)
    except ImageReadError as e:
        return {"image_id": img.image_id, "error": str(e)}
    if (image.shape[1], image.shape[0]) != (img.dims.width, img.dims.height):
        return {"image_id": img.image_id,
                "error": f"image is {image.shape[1]}x{image.shape[0]}, record says {img.dims.width}x{img.dims.height}"}

    enc = encode_image(image, cfg, models)
    tokens = flatten_tokens(enc.global_map, enc.merged)
    n_tokens = token_count(enc.grid, cfg.tokens_per_image)
    regions = []
    for k, obj in enumerate(img.objects):
        scfg = cfg.sampler(seed=derive_seed(cfg.seed, img.image_id, k))
        shape = object_shape(obj)
        try:
            feature = extract_region_feature(enc.fused, shape, img.dims, scfg)
        except DegenerateRegionError as e:
            regions.append({"name": obj.category, "error": str(e)})
            continue
        region, text = build_hybrid(obj.category, shape, img.dims, feature)
        regions.append({"name": region.name, "coords": region.coords.as_list(),
                        "feature": list(region.feature), "text": text})
    return {
        "image_id": img.image_id,
        "width": img.dims.width,
        "height": img.dims.height,
        "grid": [enc.grid.rows, enc.grid.cols],
        "canvas": [enc.layout.canvas.width, enc.layout.canvas.height],
        "token_count": n_tokens,
        "within_budget": n_tokens <= cfg.token_budget,
        "flattened_tokens": len(tokens),
        "token_digest": token_digest(tokens.vectors),
        "regions": regions,
    }


def run_pipeline(corpus: Sequence[AnnotatedImage], cfg: Config, threads: int = 1) -> list[dict]:
    """Per-image records in corpus order, whatever the thread count."""
    models = Models.from_config(cfg)
    if threads <= 1:
        return [process_image(img, cfg, models) for img in corpus]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda img: process_image(img, cfg, models), corpus))


def write_jsonl(records: Iterable[dict], fh) -> int:
    errors = 0
    for rec in records:
        errors += "error" in rec
        fh.write(json.dumps(rec) + "\n")
    return errors
