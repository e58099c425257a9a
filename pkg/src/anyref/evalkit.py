"""Grounded-text parsing and referring / grounding metrics."""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .geometry import Dims, GeometryError, NormBox, NormShape, denormalize_shape, iou, norm_shape_from_list
from .promptgen import DENSE_DETECT_ANSWER, DENSE_REFER_ANSWER, DENSE_REFER_QUESTION

IOU_THRESHOLD = 0.5
REF_TYPES = ("point", "box", "free-form")


class PairingError(ValueError):
    pass


@dataclass(frozen=True)
class GroundedMention:
    span: str
    shape: NormShape
    char_offset: int


class ParsedText(list):
    """List of mentions; ``skipped`` counts bracket groups that were rejected."""

    skipped: int = 0


_BRACKET = re.compile(r"\[([^\[\]]*)\]")
_TUPLE = re.compile(r"\s*(\d+)\s*,\s*(\d+)\s*(?:,\s*(\d+)\s*,\s*(\d+)\s*)?")
_WORD_BEFORE = re.compile(r"(\w+)\s*$")


def parse_grounded_text(text: str) -> ParsedText:
    """Find ``[x, y]`` / ``[x1, y1, x2, y2]`` groups and the word right before each.

    >>> [(m.span, m.shape.as_list()) for m in parse_grounded_text(
    ...     "There is a dog [100, 150, 300, 200] in the figure.")]
    [('dog', [100, 150, 300, 200])]
    """
    out = ParsedText()
    for m in _BRACKET.finditer(text):
        t = _TUPLE.fullmatch(m.group(1))
        if t is None:
            out.skipped += 1
            continue
        values = [int(v) for v in t.groups() if v is not None]
        try:
            shape = norm_shape_from_list(values)
        except GeometryError:
            out.skipped += 1
            continue
        w = _WORD_BEFORE.search(text, 0, m.start())
        out.append(GroundedMention(w.group(1) if w else "", shape, m.start()))
    return out


def _numbered_items(body: str) -> list[str]:
    """Split "1: a, 2: b, ..." into ["a", "b"], requiring contiguous 1-based numbering."""
    parts = re.split(r"(?:^|, )(\d+): ", body)
    if parts[0] != "":
        raise ValueError(f"numbered list does not start with '1: ': {body[:40]!r}")
    numbers = [int(n) for n in parts[1::2]]
    if numbers != list(range(1, len(numbers) + 1)):
        raise ValueError(f"numbering is not contiguous from 1: {numbers}")
    return parts[2::2]


def parse_dense_referring(question: str, answer: str) -> list[tuple[str, NormShape]]:
    if not question.startswith(DENSE_REFER_QUESTION + " ") or not answer.startswith(DENSE_REFER_ANSWER + " "):
        raise ValueError("not a dense referring sample")
    regions = _numbered_items(question[len(DENSE_REFER_QUESTION) + 1:])
    cats = _numbered_items(answer[len(DENSE_REFER_ANSWER) + 1:])
    if len(regions) != len(cats):
        raise ValueError("question and answer list different counts")
    shapes = []
    for r in regions:
        mentions = parse_grounded_text(r)
        if len(mentions) != 1 or mentions[0].char_offset != 0 or r != r.strip():
            raise ValueError(f"bad region entry {r!r}")
        shapes.append(mentions[0].shape)
    return list(zip(cats, shapes))


def parse_dense_detection(answer: str) -> list[tuple[str, NormShape]]:
    if not answer.startswith(DENSE_DETECT_ANSWER + " "):
        raise ValueError("not a dense detection answer")
    out = []
    for item in _numbered_items(answer[len(DENSE_DETECT_ANSWER) + 1:]):
        m = re.fullmatch(r"(.+) (\[[^\[\]]*\])", item)
        mentions = parse_grounded_text(m.group(2)) if m else []
        if len(mentions) != 1:
            raise ValueError(f"bad detection entry {item!r}")
        out.append((m.group(1), mentions[0].shape))
    return out


# -- metrics -----------------------------------------------------------------


@dataclass
class EvalReport:
    metric: str
    numerator: int
    denominator: int
    breakdown: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError("evaluation needs at least one item")

    @property
    def accuracy(self) -> float:
        return self.numerator / self.denominator

    def as_dict(self) -> dict:
        return {
            "metric": self.metric,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "accuracy": self.accuracy,
            "breakdown": {
                k: {"numerator": n, "denominator": d, "accuracy": n / d}
                for k, (n, d) in self.breakdown.items()
            },
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.as_dict(), indent=indent)


def box_hit(pred: NormBox, gt: NormBox, dims: Dims, threshold: float = IOU_THRESHOLD) -> bool:
    """IoU test in pixel space after cell-centre denormalization."""
    return iou(denormalize_shape(pred, dims), denormalize_shape(gt, dims)) >= threshold


def eval_rec(preds: Sequence[NormBox], gts: Sequence[NormBox], dims: Sequence[Dims]) -> EvalReport:
    if not len(preds) == len(gts) == len(dims):
        raise PairingError(f"{len(preds)} predictions vs {len(gts)} ground truths vs {len(dims)} dims")
    correct = sum(box_hit(p, g, d) for p, g, d in zip(preds, gts, dims))
    return EvalReport("rec_acc@0.5", correct, len(gts))


_PUNCT = str.maketrans("", "", string.punctuation)


def normalize_label(text: str) -> str:
    return " ".join(text.casefold().translate(_PUNCT).split())


def eval_roc(preds: Sequence[str], gts: Sequence[tuple[str, str]]) -> EvalReport:
    """Strict label match; ``gts`` holds (category, referring type) pairs."""
    if len(preds) != len(gts):
        raise PairingError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    counts = {}
    for pred, (cat, ref_type) in zip(preds, gts):
        if ref_type not in REF_TYPES:
            raise ValueError(f"unknown referring type {ref_type!r}")
        n, d = counts.get(ref_type, (0, 0))
        counts[ref_type] = (n + (normalize_label(pred) == normalize_label(cat)), d + 1)
    breakdown = {t: counts[t] for t in REF_TYPES if t in counts}
    return EvalReport("roc_acc", sum(n for n, _ in counts.values()), len(gts), breakdown)


def eval_phrase_grounding(
    preds: Mapping[str, NormBox],
    gts: Mapping[str, Sequence[NormBox]],
    dims: Dims | Mapping[str, Dims],
) -> EvalReport:
    """A phrase counts as found when its box reaches IoU 0.5 with any of its
    ground-truth boxes. Phrases without a prediction are misses."""
    correct = 0
    for phrase, boxes in gts.items():
        if not boxes:
            raise ValueError(f"phrase {phrase!r} has no ground-truth box")
        d = dims[phrase] if isinstance(dims, Mapping) else dims
        pred = preds.get(phrase)
        if pred is not None and any(box_hit(pred, g, d) for g in boxes):
            correct += 1
    return EvalReport("phrase_grounding_acc@0.5", correct, len(gts))
