"""Quote text to fixed-dimension vectors.

Built-in stylometric encoders (hashed character n-grams, hashed bag of
words, function-word frequencies) plus the line-delimited interchange
format used to import vectors computed elsewhere, e.g. by the neural
encoder sidecar.

Interchange format (UTF-8, LF line endings)::

    #dim=<d> encoder=<id> kind=<quote|set|mixed>
    # free-form comment lines are allowed after the header
    q <quote_id> <f1> ... <fd>
    s <novel_id> <character_id> <subset_descriptor> <f1> ... <fd>

Floats are 32-bit; values are written with the shortest decimal
representation that round-trips exactly at that precision.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from hashlib import blake2b
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, ValidationError
from .corpus import Quote

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_DIM = 4096
DEFAULT_SEED = 0

# Classic closed-class English word list for the function-word profile.
DEFAULT_FUNCTION_WORDS: tuple[str, ...] = (
    "a", "about", "above", "after", "again", "against", "all", "am", "among",
    "an", "and", "any", "are", "as", "at", "be", "because", "been", "before",
    "being", "below", "between", "both", "but", "by", "can", "could", "did",
    "do", "does", "down", "during", "each", "few", "for", "from", "further",
    "had", "has", "have", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "may", "me", "might", "more", "most", "must", "my", "myself",
    "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other",
    "our", "ours", "ourselves", "out", "over", "own", "same", "shall", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs",
    "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "till", "to", "too", "under", "until", "up", "upon", "very",
    "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your", "yours",
    "yourself", "yourselves",
)


class EncoderKind(Enum):
    CHAR_NGRAM = "char_ngram"
    TOKEN_UNIGRAM = "token_unigram"
    FUNCTION_WORD = "function_word"
    EXTERNAL = "external"


@dataclass(frozen=True)
class EncoderSpec:
    """Identity and parameters of an encoder.

    ``params`` keys by kind: CHAR_NGRAM uses n/dim/seed, TOKEN_UNIGRAM uses
    dim/seed, FUNCTION_WORD uses stopwords (a word tuple), EXTERNAL carries
    the expected dim.
    """

    encoder_id: str
    kind: EncoderKind
    params: Mapping[str, object]

    def __post_init__(self):
        if not self.encoder_id or re.search(r"\s", self.encoder_id):
            raise ConfigError(f"encoder_id must be non-empty without whitespace: {self.encoder_id!r}")
        dim = self.dim
        if dim <= 0:
            raise ConfigError(f"encoder {self.encoder_id}: dim must be positive, got {dim}")
        if self.kind is EncoderKind.CHAR_NGRAM and int(self.params.get("n", 0)) < 1:
            raise ConfigError(f"encoder {self.encoder_id}: char n-gram order must be >= 1")

    @property
    def dim(self) -> int:
        if self.kind is EncoderKind.FUNCTION_WORD:
            return len(self.stopwords)
        return int(self.params.get("dim", DEFAULT_DIM))

    @property
    def seed(self) -> int:
        return int(self.params.get("seed", DEFAULT_SEED))

    @property
    def stopwords(self) -> tuple[str, ...]:
        return tuple(self.params.get("stopwords", DEFAULT_FUNCTION_WORDS))


def char_ngram_spec(n: int = 3, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED,
                    encoder_id: str | None = None) -> EncoderSpec:
    return EncoderSpec(encoder_id or f"char{n}gram", EncoderKind.CHAR_NGRAM,
                       {"n": n, "dim": dim, "seed": seed})


def token_unigram_spec(dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED,
                       encoder_id: str = "token_unigram") -> EncoderSpec:
    return EncoderSpec(encoder_id, EncoderKind.TOKEN_UNIGRAM, {"dim": dim, "seed": seed})


def function_word_spec(stopwords: Sequence[str] = DEFAULT_FUNCTION_WORDS,
                       encoder_id: str = "function_words") -> EncoderSpec:
    return EncoderSpec(encoder_id, EncoderKind.FUNCTION_WORD, {"stopwords": tuple(stopwords)})


@dataclass(frozen=True)
class QuoteEmbedding:
    quote_id: str
    encoder_id: str
    vector: np.ndarray
    dim: int

    def __post_init__(self):
        if self.vector.shape != (self.dim,):
            raise ValidationError(
                f"embedding for quote {self.quote_id}: vector length "
                f"{self.vector.shape} != dim {self.dim}"
            )
        if not np.all(np.isfinite(self.vector)):
            raise ValidationError(f"embedding for quote {self.quote_id} has non-finite entries")


@dataclass(frozen=True)
class SetEmbedding:
    """Set-level vector for a character over a quote subset.

    Holds externally pooled vectors (attention pooling and the like) that
    cannot be reconstructed from per-quote vectors.
    """

    novel_id: str
    character_id: str
    subset_descriptor: str
    encoder_id: str
    vector: np.ndarray
    dim: int
    support_count: int

    def __post_init__(self):
        if self.vector.shape != (self.dim,):
            raise ValidationError(
                f"set embedding {self.key}: vector length {self.vector.shape} != dim {self.dim}"
            )
        if not np.all(np.isfinite(self.vector)):
            raise ValidationError(f"set embedding {self.key} has non-finite entries")
        if self.support_count < 1:
            raise ValidationError(f"set embedding {self.key}: support_count must be >= 1")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.novel_id, self.character_id, self.subset_descriptor)


# ---------------------------------------------------------------------------
# Built-in encoders
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1 << 20)
def _stable_hash(feature: str, seed: int) -> tuple[int, float]:
    """Deterministic (value, sign) for a feature string; keyed by seed so
    all hashing randomness is surfaced in configuration."""
    digest = blake2b(
        feature.encode("utf-8"), digest_size=9, key=seed.to_bytes(8, "little", signed=True)
    ).digest()
    value = int.from_bytes(digest[:8], "little")
    sign = 1.0 if digest[8] & 1 else -1.0
    return value, sign


def _normalize_for_ngrams(text: str) -> str:
    return " ".join(text.split()).lower()


def count_char_ngrams(text: str, n: int) -> dict[str, int]:
    """Dense overlapping n-gram counts on normalized text (lowercased,
    whitespace collapsed).  Shared by the hashed encoder and tests' dense
    oracle so both sides agree on normalization."""
    normalized = _normalize_for_ngrams(text)
    counts: dict[str, int] = {}
    for i in range(len(normalized) - n + 1):
        gram = normalized[i : i + n]
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def tokenize(text: str) -> list[str]:
    """Lowercased tokens split at whitespace and punctuation."""
    return _TOKEN.findall(text.lower())


def _hash_counts(counts: Mapping[str, float], dim: int, seed: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    for feature, count in counts.items():
        value, sign = _stable_hash(feature, seed)
        vec[value % dim] += sign * count
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec.astype(np.float32)


def encode_char_ngram(
    text: str, n: int = 3, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED
) -> np.ndarray:
    """Signed-hash character n-gram vector, L2-normalized.

    Text shorter than n after normalization yields the zero vector (no
    counts to normalize).  Raises ValidationError on empty text.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if dim < 2:
        raise ConfigError(f"dim must be >= 2, got {dim}")
    if not _normalize_for_ngrams(text):
        raise ValidationError("cannot encode empty text; caller must skip empty quotes")
    return _hash_counts(count_char_ngrams(text, n), dim, seed)


def encode_token_unigram(
    text: str, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED
) -> np.ndarray:
    """Signed-hash bag-of-words term-frequency vector, L2-normalized."""
    if dim < 2:
        raise ConfigError(f"dim must be >= 2, got {dim}")
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError("empty token stream; caller must skip token-less quotes")
    counts: dict[str, float] = {}
    for tok in tokens:
        counts[tok] = counts.get(tok, 0.0) + 1.0
    return _hash_counts(counts, dim, seed)


def encode_function_words(
    text: str, stopword_list: Sequence[str] = DEFAULT_FUNCTION_WORDS
) -> np.ndarray:
    """Relative frequency of each listed word; dimension = list length.

    Counts are normalized by the total token count, so a text without any
    listed word maps to the zero vector (allowed).
    """
    if not stopword_list:
        raise ConfigError("stopword list must be non-empty")
    tokens = tokenize(text)
    if not tokens:
        raise ValidationError("cannot encode empty text; caller must skip empty quotes")
    index = {w: i for i, w in enumerate(stopword_list)}
    vec = np.zeros(len(stopword_list), dtype=np.float64)
    for tok in tokens:
        pos = index.get(tok)
        if pos is not None:
            vec[pos] += 1.0
    return (vec / len(tokens)).astype(np.float32)


def encode_text(text: str, spec: EncoderSpec) -> np.ndarray:
    if spec.kind is EncoderKind.CHAR_NGRAM:
        return encode_char_ngram(text, int(spec.params["n"]), spec.dim, spec.seed)
    if spec.kind is EncoderKind.TOKEN_UNIGRAM:
        return encode_token_unigram(text, spec.dim, spec.seed)
    if spec.kind is EncoderKind.FUNCTION_WORD:
        return encode_function_words(text, spec.stopwords)
    raise ConfigError(f"encoder kind {spec.kind} has no built-in implementation")


def encode_quotes(
    quotes: Iterable[Quote], spec: EncoderSpec
) -> tuple[dict[str, QuoteEmbedding], list[tuple[str, str]]]:
    """Encode a quote batch; quotes an encoder cannot handle (e.g. no
    tokens) are skipped and reported as (quote_id, reason)."""
    embeddings: dict[str, QuoteEmbedding] = {}
    skipped: list[tuple[str, str]] = []
    for q in quotes:
        try:
            vec = encode_text(q.clean_text, spec)
        except ValidationError as exc:
            skipped.append((q.quote_id, str(exc)))
            continue
        embeddings[q.quote_id] = QuoteEmbedding(q.quote_id, spec.encoder_id, vec, spec.dim)
    return embeddings, skipped


# ---------------------------------------------------------------------------
# Interchange format
# ---------------------------------------------------------------------------

_HEADER = re.compile(r"^#dim=(\d+) encoder=(\S+) kind=(quote|set|mixed)$")


def _format_float(value: float) -> str:
    # float32 -> float64 is exact and repr(float64) round-trips, so parsing
    # back through float() and casting to float32 is bit-exact.
    return repr(float(value))


def write_embeddings(
    path: str | Path,
    quote_embeddings: Iterable[QuoteEmbedding] = (),
    set_embeddings: Iterable[SetEmbedding] = (),
    comments: Sequence[str] = (),
) -> int:
    """Write embeddings in the interchange format; returns record count."""
    quotes = sorted(quote_embeddings, key=lambda e: e.quote_id)
    sets = sorted(set_embeddings, key=lambda e: e.key)
    records = len(quotes) + len(sets)
    if records == 0:
        raise ValidationError("nothing to write: no embeddings given")
    encoder_ids = {e.encoder_id for e in quotes} | {e.encoder_id for e in sets}
    if len(encoder_ids) != 1:
        raise ValidationError(f"one file carries one encoder, got {sorted(encoder_ids)}")
    dims = {e.dim for e in quotes} | {e.dim for e in sets}
    if len(dims) != 1:
        raise ValidationError(f"mixed dims in one file: {sorted(dims)}")
    kind = "mixed" if quotes and sets else ("quote" if quotes else "set")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim={dims.pop()} encoder={encoder_ids.pop()} kind={kind}\n")
        for comment in comments:
            fh.write(f"# {comment}\n")
        for emb in quotes:
            values = " ".join(_format_float(v) for v in emb.vector)
            fh.write(f"q {emb.quote_id} {values}\n")
        for emb in sets:
            values = " ".join(_format_float(v) for v in emb.vector)
            fh.write(f"s {emb.novel_id} {emb.character_id} {emb.subset_descriptor} {values}\n")
    return records


@dataclass(frozen=True)
class ImportedEmbeddings:
    encoder_id: str
    dim: int
    quotes: Mapping[str, QuoteEmbedding]
    sets: Mapping[tuple[str, str, str], SetEmbedding]


def import_embeddings(
    path: str | Path, expected_encoder: EncoderSpec | None = None
) -> ImportedEmbeddings:
    """Read and validate an interchange file.

    Raises ValidationError with the offending line number for dimension
    mismatches, non-finite values, duplicates, or malformed records.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read embeddings file {path}: {exc}") from exc
    if not lines:
        raise ValidationError(f"{path}: empty file, missing header")
    header = _HEADER.match(lines[0])
    if header is None:
        raise ValidationError(
            f"{path}:1: bad header {lines[0]!r} (want '#dim=<d> encoder=<id> kind=<quote|set|mixed>')"
        )
    dim, encoder_id, kind = int(header.group(1)), header.group(2), header.group(3)
    if expected_encoder is not None and encoder_id != expected_encoder.encoder_id:
        raise ValidationError(
            f"{path}:1: file encoder {encoder_id!r} != expected {expected_encoder.encoder_id!r}"
        )
    if expected_encoder is not None and dim != expected_encoder.dim:
        raise ValidationError(
            f"{path}:1: file dim {dim} != expected {expected_encoder.dim}"
        )

    quotes: dict[str, QuoteEmbedding] = {}
    sets: dict[tuple[str, str, str], SetEmbedding] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split(" ")
        tag = parts[0]
        if tag == "q":
            n_meta = 2
            if len(parts) < n_meta + 1:
                raise ValidationError(f"{path}:{lineno}: truncated quote record")
            key_fields = parts[1:n_meta]
        elif tag == "s":
            n_meta = 4
            if len(parts) < n_meta + 1:
                raise ValidationError(f"{path}:{lineno}: truncated set record")
            key_fields = parts[1:n_meta]
        else:
            raise ValidationError(f"{path}:{lineno}: unknown record tag {tag!r}")
        if kind == "quote" and tag == "s" or kind == "set" and tag == "q":
            raise ValidationError(f"{path}:{lineno}: record tag {tag!r} under kind={kind} header")
        raw_values = parts[n_meta:]
        if len(raw_values) != dim:
            raise ValidationError(
                f"{path}:{lineno}: record has {len(raw_values)} values, header dim is {dim}"
            )
        try:
            vector = np.array([float(v) for v in raw_values], dtype=np.float32)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: bad float: {exc}") from exc
        if not np.all(np.isfinite(vector)):
            raise ValidationError(f"{path}:{lineno}: non-finite embedding values")
        if tag == "q":
            quote_id = key_fields[0]
            if quote_id in quotes:
                raise ValidationError(
                    f"{path}:{lineno}: duplicate record for (quote_id={quote_id!r}, "
                    f"encoder_id={encoder_id!r})"
                )
            quotes[quote_id] = QuoteEmbedding(quote_id, encoder_id, vector, dim)
        else:
            novel_id, character_id, descriptor = key_fields
            key = (novel_id, character_id, descriptor)
            if key in sets:
                raise ValidationError(f"{path}:{lineno}: duplicate set record for {key}")
            sets[key] = SetEmbedding(
                novel_id, character_id, descriptor, encoder_id, vector, dim, support_count=1
            )
    return ImportedEmbeddings(encoder_id=encoder_id, dim=dim, quotes=quotes, sets=sets)
