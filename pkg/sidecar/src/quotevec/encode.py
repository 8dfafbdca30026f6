"""Batched transformer encoding of quotes and quote sets.

All encodings run the model in eval mode under ``no_grad`` on the
requested device (CPU always works), truncate inputs to
``spec.max_tokens``, and are deterministic for a fixed checkpoint.

Set encoding: members are sorted by corpus ordinal before encoding, so
a manifest entry yields the same vector regardless of how its quote_ids
are ordered.  The set-verification architecture pools the collection
natively (one forward pass over the whole episode); for any other
architecture the set vector falls back to the arithmetic mean of the
member quote vectors, which matches the consumer's own pooling rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dumpio import DumpRow, ManifestEntry
from .errors import InputError, ModelError
from .models import ModelId, ModelSpec, Pooling

log = logging.getLogger("quotevec")


@dataclass
class LoadedEncoder:
    spec: ModelSpec
    tokenizer: object
    model: object
    device: str
    dim: int
    revision: str
    native_sets: bool

    @property
    def resolved_pooling(self) -> Pooling:
        if self.spec.pooling is Pooling.NATIVE:
            return Pooling.TOKEN_MEAN
        return self.spec.pooling


def load_encoder(spec: ModelSpec, device: str | None = None) -> LoadedEncoder:
    import torch
    from transformers import AutoModel, AutoTokenizer

    if device is None:
        device = "cuda" if torch.cuda.is_available() else "cpu"
    try:
        tokenizer = AutoTokenizer.from_pretrained(
            spec.checkpoint, trust_remote_code=spec.trust_remote_code
        )
        model = AutoModel.from_pretrained(
            spec.checkpoint, trust_remote_code=spec.trust_remote_code
        )
    except Exception as exc:  # transformers raises a zoo of types here
        raise ModelError(f"cannot load checkpoint {spec.checkpoint!r}: {exc}") from exc
    model.to(device)
    model.eval()

    model_type = str(getattr(model.config, "model_type", "")).lower()
    native_sets = spec.model_id is ModelId.SET_AV and model_type == "luar"
    if spec.model_id is ModelId.SET_AV and not native_sets:
        log.warning(
            "checkpoint %s (model_type=%r) has no native set pooling; "
            "set vectors will be means of quote vectors",
            spec.checkpoint, model_type,
        )
    revision = getattr(model.config, "_commit_hash", None) or "unpinned-local"

    encoder = LoadedEncoder(
        spec=spec,
        tokenizer=tokenizer,
        model=model,
        device=device,
        dim=0,
        revision=revision,
        native_sets=native_sets,
    )
    probe = _forward(encoder, ["a"])
    encoder.dim = int(probe.shape[1])
    return encoder


def _tokenize(encoder: LoadedEncoder, texts: Sequence[str]):
    return encoder.tokenizer(
        list(texts),
        padding=True,
        truncation=True,
        max_length=encoder.spec.max_tokens,
        return_tensors="pt",
    ).to(encoder.device)


def _pool(hidden, attention_mask, pooling: Pooling):
    if pooling is Pooling.FIRST_TOKEN:
        return hidden[:, 0]
    mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)


def _forward(encoder: LoadedEncoder, texts: Sequence[str]) -> np.ndarray:
    """Encode a batch of individual texts to [len(texts), dim]."""
    import torch

    inputs = _tokenize(encoder, texts)
    with torch.no_grad():
        if encoder.native_sets and encoder.spec.pooling is Pooling.NATIVE:
            # one episode per text: [batch, 1, tokens]
            output = encoder.model(
                input_ids=inputs["input_ids"].unsqueeze(1),
                attention_mask=inputs["attention_mask"].unsqueeze(1),
            )
            vectors = output[0] if isinstance(output, (tuple, list)) else output
        else:
            output = encoder.model(**inputs)
            vectors = _pool(
                output.last_hidden_state, inputs["attention_mask"], encoder.resolved_pooling
            )
    return vectors.detach().cpu().numpy().astype(np.float32)


def _forward_episode(encoder: LoadedEncoder, texts: Sequence[str]) -> np.ndarray:
    """Encode one quote collection natively to a single [dim] vector."""
    import torch

    inputs = _tokenize(encoder, texts)
    with torch.no_grad():
        output = encoder.model(
            input_ids=inputs["input_ids"].unsqueeze(0),
            attention_mask=inputs["attention_mask"].unsqueeze(0),
        )
        vectors = output[0] if isinstance(output, (tuple, list)) else output
    return vectors.detach().cpu().numpy().astype(np.float32)[0]


def encode_texts(encoder: LoadedEncoder, texts: Sequence[str]) -> np.ndarray:
    """[len(texts), dim] float32, batched by spec.batch_size."""
    if not texts:
        return np.zeros((0, encoder.dim or 0), dtype=np.float32)
    chunks = []
    step = encoder.spec.batch_size
    for start in range(0, len(texts), step):
        chunks.append(_forward(encoder, texts[start : start + step]))
    return np.concatenate(chunks, axis=0)


def encode_quotes(
    rows: Sequence[DumpRow], encoder: LoadedEncoder
) -> list[tuple[str, np.ndarray]]:
    """One vector per dump row."""
    vectors = encode_texts(encoder, [row.text for row in rows])
    _check_finite(vectors, "quote encoding")
    return [(row.quote_id, vectors[i]) for i, row in enumerate(rows)]


def encode_sets(
    rows: Sequence[DumpRow],
    entries: Sequence[ManifestEntry],
    encoder: LoadedEncoder,
) -> list[tuple[tuple[str, str, str], np.ndarray]]:
    """One vector per manifest entry, members ordered by corpus ordinal."""
    by_id = {row.quote_id: row for row in rows}
    missing: list[str] = []
    for entry in entries:
        for quote_id in entry.quote_ids:
            if quote_id not in by_id:
                missing.append(f"{entry.character_id}/{entry.descriptor}: {quote_id}")
    if missing:
        shown = "; ".join(missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise InputError(f"manifest references quote_ids absent from the dump: {shown}{more}")

    ordered_members = [
        sorted((by_id[q] for q in entry.quote_ids), key=lambda r: r.ordinal)
        for entry in entries
    ]

    results: list[tuple[tuple[str, str, str], np.ndarray]] = []
    if encoder.native_sets and encoder.spec.pooling is Pooling.NATIVE:
        for entry, members in zip(entries, ordered_members):
            vector = _forward_episode(encoder, [m.text for m in members])
            results.append(((entry.novel_id, entry.character_id, entry.descriptor), vector))
    else:
        needed = sorted({m.quote_id for members in ordered_members for m in members})
        texts = [by_id[quote_id].text for quote_id in needed]
        vectors = encode_texts(encoder, texts)
        by_quote = {quote_id: vectors[i] for i, quote_id in enumerate(needed)}
        for entry, members in zip(entries, ordered_members):
            stacked = np.stack([by_quote[m.quote_id] for m in members]).astype(np.float64)
            results.append(
                (
                    (entry.novel_id, entry.character_id, entry.descriptor),
                    stacked.mean(axis=0).astype(np.float32),
                )
            )
    _check_finite(np.stack([v for _, v in results]) if results else np.zeros(0), "set encoding")
    return results


def _check_finite(vectors: np.ndarray, label: str) -> None:
    if vectors.size and not np.all(np.isfinite(vectors)):
        raise ModelError(f"{label} produced NaN/Inf values")


def header_comments(encoder: LoadedEncoder, set_mode: bool) -> list[str]:
    comments = [
        f"model={encoder.spec.model_id.value}",
        f"checkpoint={encoder.spec.checkpoint}",
        f"revision={encoder.revision}",
        f"max_tokens={encoder.spec.max_tokens}",
    ]
    if set_mode:
        set_encoding = (
            "native"
            if encoder.native_sets and encoder.spec.pooling is Pooling.NATIVE
            else "member_mean"
        )
        comments.append(f"set_encoding={set_encoding}")
    else:
        comments.append(f"pooling={encoder.resolved_pooling.value}")
    return comments
