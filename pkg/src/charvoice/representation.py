"""Character query/target representations from quote subsets.

Three subset strategies over a novel's quotes:

* chapterwise — query = a character's quotes in one chapter, targets from
  the remaining chapters;
* explicit — like chapterwise but the query pools only quotes whose gold
  mention names the speaker; targets keep all types;
* reading order — query = a character's first n quotes in the first half
  of the novel (by chapter), targets from the second half.

Queries pool per-quote vectors with an arithmetic mean unless set-level
vectors from an external encoder are attached afterwards.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Novel, Quote, ReferentType
from .encoders import QuoteEmbedding, SetEmbedding
from .errors import ValidationError

log = logging.getLogger(__name__)

DEFAULT_MIN_QUERY_QUOTES = 5


class Strategy(Enum):
    CHAPTERWISE = "chapterwise"
    EXPLICIT = "explicit"
    READING_ORDER = "readingorder"


@dataclass(frozen=True)
class SubsetSpec:
    """Which quote subset forms the query side of an experiment.

    Chapterwise variants set ``chapter_index``; reading order sets
    ``n_quotes``.  Exactly the fields relevant to the strategy may be set.
    """

    strategy: Strategy
    chapter_index: int | None = None
    n_quotes: int | None = None
    min_query_quotes: int = DEFAULT_MIN_QUERY_QUOTES

    def __post_init__(self):
        if self.min_query_quotes < 1:
            raise ValidationError("min_query_quotes must be >= 1")
        if self.strategy in (Strategy.CHAPTERWISE, Strategy.EXPLICIT):
            if self.chapter_index is None or self.n_quotes is not None:
                raise ValidationError(
                    f"{self.strategy.value} subset needs chapter_index and no n_quotes"
                )
        else:
            if self.n_quotes is None or self.chapter_index is not None:
                raise ValidationError("reading-order subset needs n_quotes and no chapter_index")
            if self.n_quotes < 1:
                raise ValidationError("n_quotes must be >= 1")

    def descriptor(self, side: str) -> str:
        """Canonical string key, stable across runs: ``<strategy>:<param>=<value>:side=<q|t>``."""
        if side not in ("q", "t"):
            raise ValidationError(f"side must be 'q' or 't', got {side!r}")
        if self.strategy is Strategy.READING_ORDER:
            return f"{self.strategy.value}:n={self.n_quotes}:side={side}"
        return f"{self.strategy.value}:chapter={self.chapter_index}:side={side}"


@dataclass(frozen=True)
class CharacterEmbedding:
    novel_id: str
    character_id: str
    subset_descriptor: str
    encoder_id: str
    vector: np.ndarray
    support_count: int
    quote_ids: tuple[str, ...]

    def __post_init__(self):
        if not np.all(np.isfinite(self.vector)):
            raise ValidationError(
                f"character embedding {self.character_id}/{self.subset_descriptor} "
                "has non-finite entries"
            )
        if self.support_count != len(self.quote_ids):
            raise ValidationError("support_count must match the pooled quote_ids")


@dataclass(frozen=True)
class QueryTargetBundle:
    """One experiment instance for one novel and one subset spec.

    ``queries`` and ``character_targets`` pair by character_id; every query
    has exactly one target with its character_id (queries without one were
    dropped and listed in ``dropped_queries``).  Query and target quote
    sets are disjoint.
    """

    novel_id: str
    subset_spec: SubsetSpec
    queries: tuple[CharacterEmbedding, ...]
    character_targets: tuple[CharacterEmbedding, ...]
    quote_targets: tuple[tuple[QuoteEmbedding, str], ...]
    heldout_descriptor: str
    dropped_queries: tuple[str, ...] = ()

    def query_quote_ids(self) -> set[str]:
        return {qid for q in self.queries for qid in q.quote_ids}

    def target_quote_ids(self) -> set[str]:
        return {qid for t in self.character_targets for qid in t.quote_ids}

    def character_target_by_id(self, character_id: str) -> CharacterEmbedding | None:
        for t in self.character_targets:
            if t.character_id == character_id:
                return t
        return None


def pool_mean(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Coordinate-wise arithmetic mean; no re-normalization."""
    if len(vectors) == 0:
        raise ValidationError("pool_mean needs at least one vector")
    shapes = {np.asarray(v).shape for v in vectors}
    if len(shapes) != 1 or len(next(iter(shapes))) != 1:
        raise ValidationError(f"pool_mean needs equal-dimension 1-d vectors, got shapes {shapes}")
    stacked = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
    if not np.all(np.isfinite(stacked)):
        raise ValidationError("pool_mean input contains non-finite values")
    return stacked.mean(axis=0).astype(np.float32)


def _require_embeddings(
    quotes: Iterable[Quote], embeddings: Mapping[str, QuoteEmbedding]
) -> None:
    missing = sorted(q.quote_id for q in quotes if q.quote_id not in embeddings)
    if missing:
        raise ValidationError(f"missing per-quote embeddings for quote_ids {missing}")


def _encoder_id(embeddings: Mapping[str, QuoteEmbedding]) -> str:
    ids = {e.encoder_id for e in embeddings.values()}
    if len(ids) != 1:
        raise ValidationError(f"embeddings must come from a single encoder, got {sorted(ids)}")
    return ids.pop()


def _pool_character(
    novel_id: str,
    character_id: str,
    quotes: Sequence[Quote],
    embeddings: Mapping[str, QuoteEmbedding],
    descriptor: str,
    encoder_id: str,
) -> CharacterEmbedding:
    ordered = sorted(quotes, key=lambda q: q.ordinal)
    vec = pool_mean([embeddings[q.quote_id].vector for q in ordered])
    return CharacterEmbedding(
        novel_id=novel_id,
        character_id=character_id,
        subset_descriptor=descriptor,
        encoder_id=encoder_id,
        vector=vec,
        support_count=len(ordered),
        quote_ids=tuple(q.quote_id for q in ordered),
    )


def _assemble(
    novel: Novel,
    spec: SubsetSpec,
    query_quotes: Mapping[str, Sequence[Quote]],
    heldout_quotes: Sequence[Quote],
    embeddings: Mapping[str, QuoteEmbedding],
    heldout_descriptor: str,
) -> QueryTargetBundle:
    encoder_id = _encoder_id(embeddings) if embeddings else "none"
    query_desc = spec.descriptor("q")
    target_desc = spec.descriptor("t")

    by_speaker: dict[str, list[Quote]] = {}
    for q in heldout_quotes:
        by_speaker.setdefault(q.speaker_id, []).append(q)
    targets = tuple(
        _pool_character(novel.novel_id, cid, qs, embeddings, target_desc, encoder_id)
        for cid, qs in sorted(by_speaker.items())
    )
    target_ids = set(by_speaker)

    queries: list[CharacterEmbedding] = []
    dropped: list[str] = []
    for cid in sorted(query_quotes):
        if cid not in target_ids:
            dropped.append(cid)
            log.info(
                "%s: query for %s dropped, character absent from held-out subset %s",
                novel.novel_id, cid, heldout_descriptor,
            )
            continue
        queries.append(
            _pool_character(
                novel.novel_id, cid, query_quotes[cid], embeddings, query_desc, encoder_id
            )
        )

    quote_targets = tuple(
        (embeddings[q.quote_id], q.speaker_id)
        for q in sorted(heldout_quotes, key=lambda q: q.ordinal)
    )
    if not queries:
        log.info("%s: no queries for %s (valid empty bundle)", novel.novel_id, query_desc)
    return QueryTargetBundle(
        novel_id=novel.novel_id,
        subset_spec=spec,
        queries=tuple(queries),
        character_targets=targets,
        quote_targets=quote_targets,
        heldout_descriptor=heldout_descriptor,
        dropped_queries=tuple(dropped),
    )


def _build_chapter_experiment(
    novel: Novel,
    embeddings: Mapping[str, QuoteEmbedding],
    chapter: int,
    min_q: int,
    strategy: Strategy,
) -> QueryTargetBundle:
    if not (0 <= chapter < novel.chapter_count):
        raise ValidationError(
            f"chapter {chapter} out of range for {novel.novel_id} "
            f"({novel.chapter_count} chapters)"
        )
    _require_embeddings(novel.quotes, embeddings)
    spec = SubsetSpec(strategy=strategy, chapter_index=chapter, min_query_quotes=min_q)

    in_chapter = [q for q in novel.quotes if q.chapter_index == chapter]
    heldout = [q for q in novel.quotes if q.chapter_index != chapter]
    if strategy is Strategy.EXPLICIT:
        pool_from = [q for q in in_chapter if q.referent_type is ReferentType.EXPLICIT]
    else:
        pool_from = in_chapter

    by_char: dict[str, list[Quote]] = {}
    for q in pool_from:
        by_char.setdefault(q.speaker_id, []).append(q)
    query_quotes = {cid: qs for cid, qs in by_char.items() if len(qs) >= min_q}

    return _assemble(
        novel, spec, query_quotes, heldout, embeddings,
        heldout_descriptor=f"chapters!={chapter}",
    )


def build_chapterwise(
    novel: Novel,
    embeddings: Mapping[str, QuoteEmbedding],
    chapter: int,
    min_q: int = DEFAULT_MIN_QUERY_QUOTES,
) -> QueryTargetBundle:
    """Queries from all of a character's quotes in ``chapter`` (at least
    ``min_q`` of them); targets from the held-out chapters."""
    return _build_chapter_experiment(novel, embeddings, chapter, min_q, Strategy.CHAPTERWISE)


def build_explicit(
    novel: Novel,
    embeddings: Mapping[str, QuoteEmbedding],
    chapter: int,
    min_q: int = DEFAULT_MIN_QUERY_QUOTES,
) -> QueryTargetBundle:
    """Like chapterwise, but query pools use only explicit quotes; targets
    keep all referent types."""
    return _build_chapter_experiment(novel, embeddings, chapter, min_q, Strategy.EXPLICIT)


def first_half_chapters(chapter_count: int) -> int:
    """Chapters [0, ceil(K/2)) form the first half of a novel."""
    return math.ceil(chapter_count / 2)


def build_reading_order(
    novel: Novel, embeddings: Mapping[str, QuoteEmbedding], n: int
) -> QueryTargetBundle:
    """Queries from each character's first ``n`` quotes (by ordinal) in the
    first half of the novel; targets from the second half."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    _require_embeddings(novel.quotes, embeddings)
    spec = SubsetSpec(strategy=Strategy.READING_ORDER, n_quotes=n, min_query_quotes=1)
    half = first_half_chapters(novel.chapter_count)
    first = [q for q in novel.quotes if q.chapter_index < half]
    second = [q for q in novel.quotes if q.chapter_index >= half]

    by_char: dict[str, list[Quote]] = {}
    for q in sorted(first, key=lambda q: q.ordinal):
        by_char.setdefault(q.speaker_id, []).append(q)
    query_quotes = {cid: qs[:n] for cid, qs in by_char.items() if len(qs) >= n}

    return _assemble(
        novel, spec, query_quotes, second, embeddings,
        heldout_descriptor=f"chapters>={half}",
    )


def attach_set_embeddings(
    bundle: QueryTargetBundle,
    set_embeddings: Mapping[tuple[str, str, str], SetEmbedding],
) -> QueryTargetBundle:
    """Swap pooled query/target vectors for externally computed set-level
    vectors keyed by (novel_id, character_id, subset_descriptor).

    Per-quote target vectors are untouched.  Raises ValidationError naming
    every uncovered key.
    """
    missing = [
        (emb.novel_id, emb.character_id, emb.subset_descriptor)
        for emb in (*bundle.queries, *bundle.character_targets)
        if (emb.novel_id, emb.character_id, emb.subset_descriptor) not in set_embeddings
    ]
    if missing:
        raise ValidationError(f"set embeddings missing for descriptors {missing}")

    def swap(emb: CharacterEmbedding) -> CharacterEmbedding:
        ext = set_embeddings[(emb.novel_id, emb.character_id, emb.subset_descriptor)]
        return replace(emb, vector=ext.vector, encoder_id=ext.encoder_id)

    return replace(
        bundle,
        queries=tuple(swap(q) for q in bundle.queries),
        character_targets=tuple(swap(t) for t in bundle.character_targets),
    )


def write_manifest(bundles: Iterable[QueryTargetBundle], path: str | Path) -> int:
    """Line-delimited bundle manifest: ids and descriptors, no vectors.

    One line per query or character target:
    ``novel_id<TAB>character_id<TAB>subset_descriptor<TAB>qid1,qid2,...``
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for bundle in bundles:
            for emb in (*bundle.queries, *bundle.character_targets):
                fh.write(
                    f"{emb.novel_id}\t{emb.character_id}\t{emb.subset_descriptor}\t"
                    + ",".join(emb.quote_ids)
                    + "\n"
                )
                count += 1
    return count


def read_manifest(path: str | Path) -> list[tuple[str, str, str, tuple[str, ...]]]:
    entries: list[tuple[str, str, str, tuple[str, ...]]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValidationError(f"{path}:{lineno}: expected 4 tab-separated fields")
        novel_id, character_id, descriptor, ids = parts
        entries.append((novel_id, character_id, descriptor, tuple(i for i in ids.split(",") if i)))
    return entries
