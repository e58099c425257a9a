"""Three-stage coarse-to-fine trainability plan.

Pure configuration: nothing here trains. Reports and any external training
harness read the plan from :func:`trainable_groups` / :func:`plan`.
"""

from __future__ import annotations

import enum


class ParamGroup(str, enum.Enum):
    GLOBAL_ENCODER = "global_encoder"
    LOCAL_ENCODER = "local_encoder"
    PROJECTOR_G = "projector_g"
    PROJECTOR_L = "projector_l"
    SAMPLER = "sampler"
    LLM = "llm"


class Stage(enum.IntEnum):
    I = 1
    II = 2
    III = 3


STAGE_NAMES = {
    Stage.I: "image-caption alignment",
    Stage.II: "high-resolution dense alignment",
    Stage.III: "intent-enhanced instruction tuning",
}

_TRAINABLE = {
    Stage.I: frozenset({ParamGroup.PROJECTOR_G}),
    Stage.II: frozenset({ParamGroup.PROJECTOR_G, ParamGroup.PROJECTOR_L, ParamGroup.SAMPLER}),
    Stage.III: frozenset(ParamGroup),
}

_NOTES = {
    Stage.I: {"inactive": [ParamGroup.SAMPLER.value]},
    Stage.II: {"init": {ParamGroup.PROJECTOR_L.value: f"copy of {ParamGroup.PROJECTOR_G.value}"}},
    Stage.III: {},
}


def trainable_groups(stage: Stage) -> frozenset[ParamGroup]:
    return _TRAINABLE[Stage(stage)]


def frozen_groups(stage: Stage) -> frozenset[ParamGroup]:
    return frozenset(ParamGroup) - trainable_groups(stage)


def plan() -> list[dict]:
    order = list(ParamGroup)
    out = []
    for stage in Stage:
        out.append({
            "stage": stage.name,
            "name": STAGE_NAMES[stage],
            "trainable": [g.value for g in order if g in _TRAINABLE[stage]],
            "frozen": [g.value for g in order if g not in _TRAINABLE[stage]],
            **_NOTES[stage],
        })
    return out
