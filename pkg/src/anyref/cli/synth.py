"""Seeded synthetic corpus: coloured rectangles and ellipses on textured backgrounds."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..geometry import Box, Dims, FreeForm, rasterize_polygon
from ..promptgen import AnnotatedImage, AnnotatedObject
from .corpus import write_corpus
from .ppm import write_ppm

PALETTE = {
    "red": (220, 40, 40),
    "green": (40, 180, 60),
    "blue": (40, 70, 220),
    "yellow": (235, 215, 40),
    "purple": (140, 50, 170),
    "orange": (245, 140, 30),
    "cyan": (40, 200, 210),
    "white": (245, 245, 245),
}
ELLIPSE_VERTICES = 16
MEAN_OBJECTS = 10


def _background(rng: np.random.Generator, dims: Dims) -> np.ndarray:
    h, w = dims.height, dims.width
    base = rng.integers(40, 160, size=3)
    gx = np.linspace(0, 1, w)[None, :, None]
    gy = np.linspace(0, 1, h)[:, None, None]
    tilt = rng.uniform(-40, 40, size=(2, 3))
    noise = rng.normal(0, 12, size=(h, w, 3))
    img = base + tilt[0] * gx + tilt[1] * gy + noise
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _ellipse_polygon(cx, cy, rx, ry) -> tuple:
    pts = []
    for k in range(ELLIPSE_VERTICES):
        a = 2 * math.pi * k / ELLIPSE_VERTICES
        pts.append((round(cx + rx * math.cos(a), 2), round(cy + ry * math.sin(a), 2)))
    return tuple(pts)


def synth_image(rng: np.random.Generator, image_id: str, dims: Dims, mean_objects: int = MEAN_OBJECTS):
    img = _background(rng, dims)
    W, H = dims.width, dims.height
    n = int(rng.integers(mean_objects - 2, mean_objects + 3))
    colors = list(PALETTE)
    objects = []
    for _ in range(max(n, 1)):
        color = colors[int(rng.integers(len(colors)))]
        bw = int(rng.integers(max(W // 25, 2), max(W // 4, 3)))
        bh = int(rng.integers(max(H // 25, 2), max(H // 4, 3)))
        x0 = int(rng.integers(0, W - bw + 1))
        y0 = int(rng.integers(0, H - bh + 1))
        if rng.random() < 0.5:
            img[y0:y0 + bh, x0:x0 + bw] = PALETTE[color]
            objects.append(AnnotatedObject(f"{color} rectangle", Box(x0, y0, x0 + bw, y0 + bh)))
        else:
            poly = FreeForm(_ellipse_polygon(x0 + bw / 2, y0 + bh / 2, bw / 2, bh / 2))
            img[rasterize_polygon(poly.vertices, dims).bits] = PALETTE[color]
            objects.append(AnnotatedObject(f"{color} ellipse", poly.bounding_box(), poly))
    return img, objects


def gen_synthetic_corpus(n_images: int, seed: int, out_dir, width: int = 1024, height: int = 768,
                         mean_objects: int = MEAN_OBJECTS) -> list[AnnotatedImage]:
    """Write ``corpus.jsonl`` plus one PPM per image into ``out_dir``."""
    if n_images < 1:
        raise ValueError("n_images must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dims = Dims(width, height)
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_images):
        image_id = f"synth_{i:05d}"
        img, objects = synth_image(rng, image_id, dims, mean_objects)
        name = f"{image_id}.ppm"
        write_ppm(out_dir / name, img)
        records.append(AnnotatedImage(image_id, dims, objects, name))
    write_corpus(out_dir / "corpus.jsonl", records)
    return records
