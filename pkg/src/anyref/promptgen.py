"""Dense-alignment QA generation, grounded answers and instruction unification."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .geometry import Box, Dims, FreeForm, normalize_shape, raster_scan_order, render_coords

DENSE_REFER_QUESTION = "Please classify the objects in the following locations."
DENSE_REFER_ANSWER = "Here are the categories:"
DENSE_DETECT_QUESTION = "Please localize visible objects in the image in a raster scan order."
DENSE_DETECT_ANSWER = "The objects are:"
UNIFY_SUFFIX = "Include the coordinates for each mentioned object."

DENSE_REFER = "dense_refer"
DENSE_DETECT = "dense_detect"
GROUNDED = "grounded"


class EmptyAnnotationError(ValueError):
    pass


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class AnnotatedObject:
    category: str
    box: Box
    polygon: Optional[FreeForm] = None

    def __post_init__(self):
        if not self.category or not self.category.strip():
            raise ValueError("object category must be non-empty")


@dataclass
class AnnotatedImage:
    image_id: str
    dims: Dims
    objects: list[AnnotatedObject] = field(default_factory=list)
    image_path: Optional[str] = None


@dataclass(frozen=True)
class QASample:
    question: str
    answer: str
    kind: str

    def to_json(self, image_id: str) -> str:
        return json.dumps({"image_id": image_id, "kind": self.kind, "question": self.question, "answer": self.answer})


def _ordered(img: AnnotatedImage) -> list[AnnotatedObject]:
    if not img.objects:
        raise EmptyAnnotationError(f"image {img.image_id!r} has no objects")
    order = raster_scan_order([o.box for o in img.objects])
    return [img.objects[i] for i in order]


def _region_text(obj: AnnotatedObject, dims: Dims) -> str:
    return render_coords(normalize_shape(obj.polygon or obj.box, dims))


def gen_dense_referring(img: AnnotatedImage) -> QASample:
    objs = _ordered(img)
    regions = ", ".join(f"{k}: {_region_text(o, img.dims)}" for k, o in enumerate(objs, 1))
    cats = ", ".join(f"{k}: {o.category}" for k, o in enumerate(objs, 1))
    return QASample(f"{DENSE_REFER_QUESTION} {regions}", f"{DENSE_REFER_ANSWER} {cats}", DENSE_REFER)


def gen_dense_detection(img: AnnotatedImage) -> QASample:
    objs = _ordered(img)
    listed = ", ".join(f"{k}: {o.category} {_region_text(o, img.dims)}" for k, o in enumerate(objs, 1))
    return QASample(DENSE_DETECT_QUESTION, f"{DENSE_DETECT_ANSWER} {listed}", DENSE_DETECT)


_SLOT = re.compile(r"\{([^{}]+)\}")


def gen_grounded_answer(text_spans: Sequence[tuple[str, Box]], dims: Dims, template: str) -> str:
    """Fill ``{noun}`` slots, each followed by its normalized box.

    >>> gen_grounded_answer([("dog", Box(100, 150, 300, 200))], Dims(1000, 1000),
    ...                     "There is a {dog} in the figure.")
    'There is a dog [100, 150, 300, 200] in the figure.'
    """
    boxes = {}
    for noun, box in text_spans:
        if template.count("{" + noun + "}") != 1:
            raise TemplateError(f"noun {noun!r} must fill exactly one slot")
        boxes[noun] = render_coords(normalize_shape(box, dims))

    def fill(m):
        noun = m.group(1)
        if noun not in boxes:
            raise TemplateError(f"slot {{{noun}}} has no box")
        return f"{noun} {boxes[noun]}"

    if not text_spans:
        return template
    return _SLOT.sub(fill, template)


def unify_prompt(instruction: str) -> str:
    if instruction.rstrip().endswith(UNIFY_SUFFIX):
        return instruction
    if not instruction:
        return UNIFY_SUFFIX
    return f"{instruction} {UNIFY_SUFFIX}"
