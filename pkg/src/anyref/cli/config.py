"""Flat ``key = value`` configuration file."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..anyres import DEFAULT_CELL_SIZE, DEFAULT_MAX_CELLS, DEFAULT_TOKEN_BUDGET
from ..encoders import EncoderConfig
from ..sampler import SamplerConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    cell_size: int = DEFAULT_CELL_SIZE
    max_cells: int = DEFAULT_MAX_CELLS
    token_budget: int = DEFAULT_TOKEN_BUDGET
    tokens_per_image: int = 64
    patch_size: int = 14
    c_raw: int = 8
    c_hidden: int = 16
    c_out: int = 16
    n_points: int = 512
    n_anchors: int = 32
    k_neighbors: int = 8
    point_radius_norm: float = 0.005
    seed: int = 0

    def __post_init__(self):
        if self.cell_size % self.patch_size:
            raise ConfigError(f"patch_size {self.patch_size} must divide cell_size {self.cell_size}")
        for f in dataclasses.fields(self):
            if f.name not in ("seed",) and getattr(self, f.name) <= 0:
                raise ConfigError(f"{f.name} must be positive")
        # surface sampler constraints at load time
        self.sampler()

    def encoder(self) -> EncoderConfig:
        return EncoderConfig(self.patch_size, self.c_raw, self.seed)

    def sampler(self, seed: int | None = None) -> SamplerConfig:
        return SamplerConfig(self.n_points, self.n_anchors, self.k_neighbors, self.point_radius_norm,
                             self.seed if seed is None else seed)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    def dumps(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!r}\n" for f in dataclasses.fields(self))

    @classmethod
    def loads(cls, text: str) -> "Config":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                values[key] = float(value) if types[key] == "float" else int(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
        return cls(**values)

    @classmethod
    def load(cls, path) -> "Config":
        return cls.loads(Path(path).read_text())
