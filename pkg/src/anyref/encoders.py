"""Deterministic statistical encoders and two-layer projectors.

Feature maps are float64 arrays shaped ``(h, w, c)``: rows of cells, then
cells, then channels, so ``fm.ravel()`` is the row-major cell order.

Two encoder profiles share one interface. ``GLOBAL`` reports coarse colour and
luminance statistics per cell; ``LOCAL`` reports edge and texture statistics.
All statistics are computed inside each cell (borders replicated at the cell
edge), so a cell's features depend on that cell's pixels only.
"""

from __future__ import annotations

import base64
import enum
import json
import struct
from dataclasses import dataclass
from typing import BinaryIO, Callable, Union

import numpy as np

from .rng import Xoshiro256StarStar

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])
WEIGHTS_MAGIC = b"FV2W"


class ShapeError(ValueError):
    pass


class TilingError(ValueError):
    pass


class StatProfile(enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class EncoderConfig:
    patch_size: int = 14
    c_raw: int = 8
    seed: int = 0


@dataclass
class ProjectorWeights:
    W1: np.ndarray  # (c_raw, c_hidden)
    b1: np.ndarray  # (c_hidden,)
    W2: np.ndarray  # (c_hidden, c)
    b2: np.ndarray  # (c,)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.W1.shape[0], self.W1.shape[1], self.W2.shape[1]

    def __post_init__(self):
        c_raw, c_hidden = self.W1.shape
        if self.b1.shape != (c_hidden,) or self.W2.shape[0] != c_hidden or self.b2.shape != (self.W2.shape[1],):
            raise ShapeError("inconsistent projector dimensions")
        for m in (self.W1, self.b1, self.W2, self.b2):
            if not np.all(np.isfinite(m)):
                raise ValueError("projector weights must be finite")

    def copy(self) -> "ProjectorWeights":
        return ProjectorWeights(self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())


def _cells(plane: np.ndarray, ps: int) -> np.ndarray:
    """(H, W) -> (h, w, ps, ps) blocks."""
    H, W = plane.shape
    return plane.reshape(H // ps, ps, W // ps, ps).transpose(0, 2, 1, 3)


def _cell_std(blocks: np.ndarray) -> np.ndarray:
    # shifting by one sample per cell keeps constant cells at exactly 0
    return (blocks - blocks[:, :, :1, :1]).std(axis=(2, 3))


def _cell_padded(blocks: np.ndarray) -> np.ndarray:
    return np.pad(blocks, ((0, 0), (0, 0), (1, 1), (1, 1)), mode="edge")


def _global_stats(rgb: np.ndarray, lum: np.ndarray, ps: int) -> list[np.ndarray]:
    lum_c = _cells(lum, ps)
    padded = _cell_padded(lum_c)
    blur = sum(padded[:, :, dy:dy + ps, dx:dx + ps] for dy in range(3) for dx in range(3)) / 9.0
    zeros = np.zeros(lum_c.shape[:2])
    return [
        *(_cells(rgb[..., k], ps).mean(axis=(2, 3)) for k in range(3)),
        lum_c.mean(axis=(2, 3)),
        _cell_std(lum_c),
        blur.mean(axis=(2, 3)),
        zeros,
        zeros,
    ]


def _local_stats(rgb: np.ndarray, lum: np.ndarray, ps: int) -> list[np.ndarray]:
    lum_c = _cells(lum, ps)
    padded = _cell_padded(lum_c)
    gx = (padded[:, :, 1:-1, 2:] - padded[:, :, 1:-1, :-2]) / 2.0
    gy = (padded[:, :, 2:, 1:-1] - padded[:, :, :-2, 1:-1]) / 2.0
    energy = gx * gx + gy * gy
    horizontal = np.abs(gx) >= np.abs(gy)
    return [
        *(_cells(rgb[..., k], ps).mean(axis=(2, 3)) for k in range(3)),
        np.abs(gx).mean(axis=(2, 3)),
        np.abs(gy).mean(axis=(2, 3)),
        np.where(horizontal, energy, 0.0).mean(axis=(2, 3)),
        np.where(horizontal, 0.0, energy).mean(axis=(2, 3)),
        _cell_std(lum_c),
    ]


_PROFILES: dict[StatProfile, Callable] = {
    StatProfile.GLOBAL: _global_stats,
    StatProfile.LOCAL: _local_stats,
}


def encode_stats(image: np.ndarray, profile: StatProfile, cfg: EncoderConfig = EncoderConfig()) -> np.ndarray:
    """Encode a raster into a ``(H/ps, W/ps, c_raw)`` feature map.

    GLOBAL channels: mean R, G, B; luminance mean; luminance std; mean of the
    3x3 box-blurred luminance; zero padding.
    LOCAL channels: mean R, G, B; mean |d/dx|; mean |d/dy|; gradient energy
    in the horizontal-dominant and vertical-dominant orientation bins;
    luminance std.

    Pixel values are scaled to [0, 1]. When ``c_raw`` differs from 8 the
    statistics are truncated or zero-padded.
    """
    H, W = image.shape[:2]
    ps = cfg.patch_size
    if H % ps or W % ps:
        raise TilingError(f"{W}x{H} image is not divisible by patch size {ps}")
    rgb = image.astype(np.float64) / 255.0
    lum = rgb @ _LUMA
    stats = _PROFILES[StatProfile(profile)](rgb, lum, ps)
    stats = stats[: cfg.c_raw]
    while len(stats) < cfg.c_raw:
        stats.append(np.zeros_like(stats[0]))
    return np.stack(stats, axis=-1)


def init_projector(seed: int, c_raw: int = 8, c_hidden: int = 16, c: int = 16) -> ProjectorWeights:
    """Seeded weights, uniform in [-0.1, 0.1], drawn in order W1, b1, W2, b2."""
    if min(c_raw, c_hidden, c) < 1:
        raise ValueError("projector dims must be positive")
    gen = Xoshiro256StarStar(seed)

    def draw(*shape):
        n = int(np.prod(shape))
        return np.array(gen.uniform(-0.1, 0.1, n), dtype=np.float64).reshape(shape)

    W1 = draw(c_raw, c_hidden)
    b1 = draw(c_hidden)
    W2 = draw(c_hidden, c)
    b2 = draw(c)
    return ProjectorWeights(W1, b1, W2, b2)


def project(fm: np.ndarray, weights: ProjectorWeights) -> np.ndarray:
    """Per-cell ``W2 . relu(W1 . x + b1) + b2``."""
    if fm.ndim != 3 or fm.shape[-1] != weights.W1.shape[0]:
        raise ShapeError(f"feature map with {fm.shape[-1]} channels does not fit projector input {weights.W1.shape[0]}")
    hidden = np.maximum(fm @ weights.W1 + weights.b1, 0.0)
    return hidden @ weights.W2 + weights.b2


# -- serialization ---------------------------------------------------------


def save_weights(weights: ProjectorWeights, fh: BinaryIO) -> None:
    """Little-endian: magic, u32 (c_raw, c_hidden, c), then f64 W1, b1, W2, b2."""
    fh.write(WEIGHTS_MAGIC)
    fh.write(struct.pack("<3I", *weights.dims))
    for m in (weights.W1, weights.b1, weights.W2, weights.b2):
        fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def load_weights(fh: BinaryIO) -> ProjectorWeights:
    if fh.read(4) != WEIGHTS_MAGIC:
        raise ValueError("not a projector weights file (bad magic)")
    c_raw, c_hidden, c = struct.unpack("<3I", fh.read(12))

    def read(*shape):
        n = int(np.prod(shape))
        buf = fh.read(8 * n)
        if len(buf) != 8 * n:
            raise ValueError("truncated projector weights file")
        return np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape)

    return ProjectorWeights(read(c_raw, c_hidden), read(c_hidden), read(c_hidden, c), read(c))


def dump_feature_map(fm: np.ndarray) -> str:
    h, w, c = fm.shape
    payload = base64.b64encode(np.ascontiguousarray(fm, dtype="<f8").tobytes()).decode("ascii")
    return json.dumps({"w": w, "h": h, "c": c, "data": payload})


def load_feature_map(text: Union[str, dict]) -> np.ndarray:
    obj = json.loads(text) if isinstance(text, str) else text
    data = np.frombuffer(base64.b64decode(obj["data"]), dtype="<f8").astype(np.float64)
    if data.size != obj["w"] * obj["h"] * obj["c"]:
        raise ShapeError("feature map payload does not match its header")
    return data.reshape(obj["h"], obj["w"], obj["c"])
