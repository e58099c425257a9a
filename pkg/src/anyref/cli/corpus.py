"""Corpus and prediction JSONL schemas.

Corpus line::

    {"image_id": str, "width": int, "height": int, "image_path": str,
     "objects": [{"category": str, "box": [x1, y1, x2, y2], "polygon": [[x, y], ...]?}]}

Prediction line::

    {"image_id": str, "item_id": str, "text"?: str, "box"?: [4 ints 0..999],
     "category"?: str, "ref_type"?: "point" | "box" | "free-form"}

``image_path`` is resolved relative to the corpus file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..geometry import Box, Dims, FreeForm, GeometryError, NormBox, check_in_bounds
from ..promptgen import AnnotatedImage, AnnotatedObject


class SchemaError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path, self.lineno = path, lineno


def _expect(cond, msg):
    if not cond:
        raise ValueError(msg)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_record(obj: dict) -> AnnotatedImage:
    _expect(isinstance(obj, dict), "record must be a JSON object")
    for key in ("image_id", "width", "height", "objects"):
        _expect(key in obj, f"missing field {key!r}")
    _expect(isinstance(obj["image_id"], str) and obj["image_id"], "image_id must be a non-empty string")
    _expect(_is_int(obj["width"]) and _is_int(obj["height"]), "width/height must be integers")
    _expect(obj["width"] >= 1 and obj["height"] >= 1, "width/height must be positive")
    _expect(isinstance(obj["objects"], list), "objects must be a list")
    path = obj.get("image_path")
    _expect(path is None or isinstance(path, str), "image_path must be a string")
    dims = Dims(obj["width"], obj["height"])
    objects = []
    for k, o in enumerate(obj["objects"]):
        try:
            _expect(isinstance(o, dict), "must be an object")
            cat = o.get("category")
            _expect(isinstance(cat, str) and cat.strip(), "category must be a non-empty string")
            box = o.get("box")
            _expect(isinstance(box, list) and len(box) == 4 and all(map(_is_num, box)), "box must be 4 numbers")
            box = Box(*box)
            check_in_bounds(box, dims)
            poly = o.get("polygon")
            if poly is not None:
                _expect(isinstance(poly, list) and all(
                    isinstance(v, list) and len(v) == 2 and all(map(_is_num, v)) for v in poly
                ), "polygon must be a list of [x, y] pairs")
                poly = FreeForm(tuple(tuple(v) for v in poly))
                check_in_bounds(poly, dims)
            objects.append(AnnotatedObject(cat, box, poly))
        except (ValueError, TypeError) as e:
            raise ValueError(f"objects[{k}]: {e}") from None
    return AnnotatedImage(obj["image_id"], dims, objects, path)


def record_to_dict(img: AnnotatedImage) -> dict:
    objs = []
    for o in img.objects:
        d = {"category": o.category, "box": o.box.as_list()}
        if o.polygon is not None:
            d["polygon"] = [list(v) for v in o.polygon.vertices]
        objs.append(d)
    return {"image_id": img.image_id, "width": img.dims.width, "height": img.dims.height,
            "image_path": img.image_path, "objects": objs}


def load_corpus(path) -> list[AnnotatedImage]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise FileNotFoundError(f"{path}: {e.strerror or e}") from None
    records, seen = [], set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            img = parse_record(json.loads(line))
        except (ValueError, GeometryError) as e:
            raise SchemaError(path, lineno, str(e)) from None
        if img.image_id in seen:
            raise SchemaError(path, lineno, f"duplicate image_id {img.image_id!r}")
        seen.add(img.image_id)
        if img.image_path is not None:
            img.image_path = str(path.parent / img.image_path)
        records.append(img)
    return records


def write_corpus(path, records) -> None:
    with open(path, "w") as fh:
        for img in records:
            fh.write(json.dumps(record_to_dict(img)) + "\n")


@dataclass(frozen=True)
class Prediction:
    image_id: str
    item_id: str
    text: Optional[str] = None
    box: Optional[NormBox] = None
    category: Optional[str] = None
    ref_type: Optional[str] = None


def load_predictions(path) -> list[Prediction]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise FileNotFoundError(f"{path}: {e.strerror or e}") from None
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            _expect(isinstance(obj, dict), "record must be a JSON object")
            _expect(isinstance(obj.get("image_id"), str), "image_id must be a string")
            _expect(isinstance(obj.get("item_id"), str), "item_id must be a string")
            box = obj.get("box")
            if box is not None:
                _expect(isinstance(box, list) and len(box) == 4 and all(map(_is_int, box)),
                        "box must be 4 integers in 0..999")
                box = NormBox(*box)
            for key in ("text", "category", "ref_type"):
                _expect(obj.get(key) is None or isinstance(obj[key], str), f"{key} must be a string")
            out.append(Prediction(obj["image_id"], obj["item_id"], obj.get("text"), box,
                                  obj.get("category"), obj.get("ref_type")))
        except (ValueError, GeometryError) as e:
            raise SchemaError(path, lineno, str(e)) from None
    return out
