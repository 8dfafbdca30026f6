"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written from the documented definitions,
not by calling into ``charvoice``: quadratic pair enumeration for AUC and
a dense (unhashed) feature counter with its own normalization and hashing
path for the encoders.
"""

from __future__ import annotations

import re
from hashlib import blake2b

import numpy as np

_WORD = re.compile(r"[^\W_]+", re.UNICODE)


def auc_pairs(positive_scores, negative_scores) -> float:
    """Brute-force AUC: fraction of (positive, negative) pairs the
    positive wins, counting ties as half a win."""
    wins = 0.0
    for p in positive_scores:
        for n in negative_scores:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(positive_scores) * len(negative_scores))


def dense_char_ngrams(text: str, n: int) -> dict[str, int]:
    """Overlapping character n-gram counts on lowercased text with
    whitespace runs collapsed to single spaces."""
    normalized = " ".join(text.split()).lower()
    counts: dict[str, int] = {}
    for i in range(len(normalized) - n + 1):
        counts[normalized[i : i + n]] = counts.get(normalized[i : i + n], 0) + 1
    return counts


def dense_tokens(text: str) -> list[str]:
    """Lowercased word tokens: maximal runs of word characters, with
    underscore treated as punctuation."""
    return _WORD.findall(text.lower())


def signed_hash_vector(counts: dict[str, float | int], dim: int, seed: int) -> np.ndarray:
    """Reference signed-hash projection of a feature-count map.

    Feature f hashes through keyed blake2b (key = seed as 8 signed little-
    endian bytes, 9-byte digest); the first 8 digest bytes pick the bucket,
    the low bit of the ninth picks the sign.  Accumulate in float64, then
    L2-normalize unless the vector is all zero, then cast to float32.
    """
    vec = np.zeros(dim, dtype=np.float64)
    key = seed.to_bytes(8, "little", signed=True)
    for feature, count in counts.items():
        digest = blake2b(feature.encode("utf-8"), digest_size=9, key=key).digest()
        bucket = int.from_bytes(digest[:8], "little") % dim
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[bucket] += sign * count
    norm = float(np.sqrt((vec * vec).sum()))
    if norm > 0.0:
        vec = vec / norm
    return vec.astype(np.float32)


def char_ngram_vector(text: str, n: int, dim: int, seed: int) -> np.ndarray:
    return signed_hash_vector(dense_char_ngrams(text, n), dim, seed)


def token_unigram_vector(text: str, dim: int, seed: int) -> np.ndarray:
    counts: dict[str, float] = {}
    for token in dense_tokens(text):
        counts[token] = counts.get(token, 0.0) + 1.0
    return signed_hash_vector(counts, dim, seed)


def function_word_vector(text: str, words) -> np.ndarray:
    tokens = dense_tokens(text)
    vec = np.zeros(len(words), dtype=np.float64)
    for i, word in enumerate(words):
        vec[i] = sum(1.0 for t in tokens if t == word)
    return (vec / len(tokens)).astype(np.float32)
