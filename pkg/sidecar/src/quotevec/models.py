"""Model registry: the four encoder families and their checkpoints.

``pooling="native"`` resolves per model: the set-verification model
pools a quote collection with its own trained attention head when the
loaded architecture supports it, everything else (and the fallback when
it does not) uses attention-masked token averaging.  ``token_mean`` and
``first_token`` force those poolings explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import ModelError


class ModelId(Enum):
    SEMANTIC = "Semantic"
    STYLE_AV = "StyleAV"
    SET_AV = "SetAV"
    EMOTION = "Emotion"


class Pooling(Enum):
    NATIVE = "native"
    TOKEN_MEAN = "token_mean"
    FIRST_TOKEN = "first_token"


@dataclass(frozen=True)
class ModelSpec:
    model_id: ModelId
    checkpoint: str
    max_tokens: int = 64
    pooling: Pooling = Pooling.NATIVE
    batch_size: int = 32
    trust_remote_code: bool = False

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ModelError(f"max_tokens must be >= 1, got {self.max_tokens}")
        if self.batch_size < 1:
            raise ModelError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.checkpoint:
            raise ModelError("checkpoint reference must be non-empty")


REGISTRY: dict[ModelId, ModelSpec] = {
    ModelId.SEMANTIC: ModelSpec(
        ModelId.SEMANTIC, "sentence-transformers/all-mpnet-base-v2"
    ),
    ModelId.STYLE_AV: ModelSpec(ModelId.STYLE_AV, "AnnaWegmann/Style-Embedding"),
    ModelId.SET_AV: ModelSpec(
        ModelId.SET_AV, "rrivera1849/LUAR-MUD", trust_remote_code=True
    ),
    ModelId.EMOTION: ModelSpec(ModelId.EMOTION, "SamLowe/roberta-base-go_emotions"),
}


def parse_model_id(value: str) -> ModelId:
    for model_id in ModelId:
        if model_id.value.lower() == value.strip().lower():
            return model_id
    known = ", ".join(m.value for m in ModelId)
    raise ModelError(f"unknown model id {value!r} (known: {known})")


def spec_for(
    model_id: ModelId,
    checkpoint: str | None = None,
    max_tokens: int | None = None,
    pooling: Pooling | None = None,
    batch_size: int | None = None,
) -> ModelSpec:
    spec = REGISTRY[model_id]
    overrides = {}
    if checkpoint is not None:
        overrides["checkpoint"] = checkpoint
    if max_tokens is not None:
        overrides["max_tokens"] = max_tokens
    if pooling is not None:
        overrides["pooling"] = pooling
    if batch_size is not None:
        overrides["batch_size"] = batch_size
    return replace(spec, **overrides) if overrides else spec
