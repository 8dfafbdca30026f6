"""Cosine scoring and AUC ranking evaluations.

Two evaluations per experiment: character-character (rank the same
character's held-out representation against other characters') and
character-quote (rank the character's held-out quotes against everyone
else's).  AUC is the probability that a positive outranks a random
negative, with ties credited 0.5.  Aggregation is per novel, per role,
and macro over novels.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, Novel, Role
from .encoders import QuoteEmbedding, SetEmbedding
from .errors import QuerySkipped, ValidationError
from .representation import (
    CharacterEmbedding,
    QueryTargetBundle,
    Strategy,
    attach_set_embeddings,
    build_chapterwise,
    build_explicit,
    build_reading_order,
)

log = logging.getLogger(__name__)


class _ZeroVectorCounter:
    """Counts cosine calls that saw an all-zero vector (these score 0.0);
    zero vectors legitimately arise from the function-word encoder."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def bump(self) -> None:
        with self._lock:
            self._count += 1

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


zero_vector_warnings = _ZeroVectorCounter()


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; an all-zero operand yields 0.0 and
    bumps the zero-vector warning counter."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"cosine dims differ: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        zero_vector_warnings.bump()
        return 0.0
    value = float(np.dot(a, b) / (norm_a * norm_b))
    return min(1.0, max(-1.0, value))


def mann_whitney_auc(positive_scores: Sequence[float], negative_scores: Sequence[float]) -> float:
    """P(random positive > random negative) + 0.5 * P(tie).

    O(N log N): fractional ranks over the pooled scores, then the rank-sum
    identity U = R_pos - n_pos(n_pos+1)/2, AUC = U / (n_pos * n_neg).
    """
    n_pos = len(positive_scores)
    n_neg = len(negative_scores)
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC needs at least one positive and one negative score")
    pooled = np.concatenate(
        [np.asarray(positive_scores, dtype=np.float64), np.asarray(negative_scores, dtype=np.float64)]
    )
    if not np.all(np.isfinite(pooled)):
        raise ValidationError("AUC scores must be finite")
    order = np.argsort(pooled, kind="mergesort")
    ranks = np.empty(n_pos + n_neg, dtype=np.float64)
    sorted_scores = pooled[order]
    i = 0
    while i < len(sorted_scores):
        j = i
        while j + 1 < len(sorted_scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # 1-based ranks i+1..j+1 share the average rank
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    rank_sum_pos = float(ranks[:n_pos].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class RankedScores:
    query_key: tuple[str, str, str]  # (novel_id, character_id, descriptor)
    positive_scores: tuple[float, ...]
    negative_scores: tuple[float, ...]


def auc_cc(
    query: CharacterEmbedding, targets: Sequence[CharacterEmbedding]
) -> tuple[float, RankedScores]:
    """Rank the query character's own target among all character targets.

    AUC = (#negatives scored below the positive + 0.5 * ties) / #negatives.
    """
    positives = [t for t in targets if t.character_id == query.character_id]
    if len(positives) != 1:
        raise ValidationError(
            f"query {query.character_id}: expected exactly one positive target, "
            f"found {len(positives)}"
        )
    negatives = [t for t in targets if t.character_id != query.character_id]
    if not negatives:
        raise ValidationError(f"query {query.character_id}: no negative targets")
    pos_score = cosine(query.vector, positives[0].vector)
    neg_scores = [cosine(query.vector, t.vector) for t in negatives]
    below = sum(1 for s in neg_scores if s < pos_score)
    ties = sum(1 for s in neg_scores if s == pos_score)
    auc = (below + 0.5 * ties) / len(neg_scores)
    scores = RankedScores(
        query_key=(query.novel_id, query.character_id, query.subset_descriptor),
        positive_scores=(pos_score,),
        negative_scores=tuple(neg_scores),
    )
    return auc, scores


def auc_cq(
    query: CharacterEmbedding, quote_targets: Sequence[tuple[QuoteEmbedding, str]]
) -> tuple[float, RankedScores]:
    """Rank the query character's held-out quotes against other speakers'.

    Raises QuerySkipped("no_positive_targets" / "no_negative_targets") when
    one side of the ranking is empty.
    """
    pos_scores: list[float] = []
    neg_scores: list[float] = []
    for emb, speaker_id in quote_targets:
        score = cosine(query.vector, emb.vector)
        (pos_scores if speaker_id == query.character_id else neg_scores).append(score)
    if not pos_scores:
        raise QuerySkipped("no_positive_targets", f"{query.character_id}: no held-out quotes")
    if not neg_scores:
        raise QuerySkipped("no_negative_targets", f"{query.character_id}: no other speakers")
    auc = mann_whitney_auc(pos_scores, neg_scores)
    scores = RankedScores(
        query_key=(query.novel_id, query.character_id, query.subset_descriptor),
        positive_scores=tuple(pos_scores),
        negative_scores=tuple(neg_scores),
    )
    return auc, scores


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerQueryAuc:
    novel_id: str
    character_id: str
    descriptor: str
    eval_kind: str  # "cc" | "cq"
    auc: float
    n_pos: int
    n_neg: int
    role: Role


@dataclass(frozen=True)
class SkippedQuery:
    novel_id: str
    character_id: str
    descriptor: str
    eval_kind: str
    reason: str


@dataclass(frozen=True)
class NovelAggregate:
    novel_id: str
    mean: float
    std: float
    n_queries: int


@dataclass(frozen=True)
class RoleAggregate:
    role: Role
    mean: float
    std: float
    n_queries: int
    n_novels: int


@dataclass(frozen=True)
class MacroAggregate:
    mean: float
    std: float
    n_novels: int


@dataclass(frozen=True)
class AucReport:
    eval_kind: str
    aggregation: str  # "mean" | "pooled"
    per_query: tuple[PerQueryAuc, ...]
    per_novel: tuple[NovelAggregate, ...]
    per_role: tuple[RoleAggregate, ...]
    macro: MacroAggregate | None
    excluded_novels: tuple[str, ...]


def _novel_mean(results: Sequence[PerQueryAuc], aggregation: str) -> tuple[float, float]:
    aucs = np.array([r.auc for r in results], dtype=np.float64)
    if aggregation == "pooled":
        weights = np.array([r.n_pos * r.n_neg for r in results], dtype=np.float64)
        mean = float(np.average(aucs, weights=weights))
        std = float(np.sqrt(np.average((aucs - mean) ** 2, weights=weights)))
    else:
        mean = float(aucs.mean())
        std = float(aucs.std())  # population std
    return mean, std


def aggregate(
    results: Iterable[PerQueryAuc],
    novel_ids: Sequence[str],
    aggregation: str = "mean",
) -> AucReport:
    """Aggregate per-query AUCs.

    Per-novel value = unweighted mean of the novel's per-query AUCs (or the
    pair-pooled weighted mean under ``aggregation="pooled"``).  Macro mean
    and population std are taken over per-novel means.  Per-role aggregates
    apply the same two-level rule restricted to queries of that role.
    Novels with zero scored queries are excluded from the macro and listed.
    """
    if aggregation not in ("mean", "pooled"):
        raise ValidationError(f"unknown aggregation {aggregation!r}")
    results = list(results)
    kinds = {r.eval_kind for r in results}
    if len(kinds) > 1:
        raise ValidationError(f"aggregate expects one evaluation kind, got {sorted(kinds)}")
    eval_kind = kinds.pop() if kinds else "none"

    by_novel: dict[str, list[PerQueryAuc]] = {}
    for r in results:
        by_novel.setdefault(r.novel_id, []).append(r)

    per_novel = []
    for novel_id in sorted(by_novel):
        mean, std = _novel_mean(by_novel[novel_id], aggregation)
        per_novel.append(NovelAggregate(novel_id, mean, std, len(by_novel[novel_id])))

    novel_means = np.array([n.mean for n in per_novel], dtype=np.float64)
    macro = None
    if len(novel_means):
        macro = MacroAggregate(
            mean=float(novel_means.mean()),
            std=float(novel_means.std()),
            n_novels=len(novel_means),
        )

    per_role = []
    for role in sorted({r.role for r in results}, reverse=True):
        of_role = [r for r in results if r.role == role]
        by_novel_role: dict[str, list[PerQueryAuc]] = {}
        for r in of_role:
            by_novel_role.setdefault(r.novel_id, []).append(r)
        role_means = np.array(
            [_novel_mean(rs, aggregation)[0] for _, rs in sorted(by_novel_role.items())],
            dtype=np.float64,
        )
        per_role.append(
            RoleAggregate(
                role=role,
                mean=float(role_means.mean()),
                std=float(role_means.std()),
                n_queries=len(of_role),
                n_novels=len(role_means),
            )
        )

    excluded = tuple(sorted(set(novel_ids) - set(by_novel)))
    return AucReport(
        eval_kind=eval_kind,
        aggregation=aggregation,
        per_query=tuple(results),
        per_novel=tuple(per_novel),
        per_role=tuple(per_role),
        macro=macro,
        excluded_novels=excluded,
    )


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------


def build_bundles(
    novel: Novel,
    embeddings: Mapping[str, QuoteEmbedding],
    strategy: Strategy,
    min_q: int = 5,
    n: int | None = None,
) -> list[QueryTargetBundle]:
    """All bundles of one strategy for one (already filtered) novel: one
    per chapter for chapterwise/explicit, a single bundle for reading order."""
    if strategy is Strategy.READING_ORDER:
        if n is None:
            raise ValidationError("reading order needs n")
        return [build_reading_order(novel, embeddings, n)]
    builder = build_chapterwise if strategy is Strategy.CHAPTERWISE else build_explicit
    return [builder(novel, embeddings, chapter, min_q) for chapter in range(novel.chapter_count)]


def evaluate_bundle(
    bundle: QueryTargetBundle, roles: Mapping[str, Role]
) -> tuple[list[PerQueryAuc], list[PerQueryAuc], list[SkippedQuery]]:
    """Score every query in a bundle under both evaluations."""
    cc_results: list[PerQueryAuc] = []
    cq_results: list[PerQueryAuc] = []
    skipped: list[SkippedQuery] = []
    for query in bundle.queries:
        role = roles[query.character_id]
        key = (bundle.novel_id, query.character_id, query.subset_descriptor)
        if len(bundle.character_targets) < 2:
            skipped.append(SkippedQuery(*key, "cc", "no_negative_targets"))
        else:
            auc, scores = auc_cc(query, bundle.character_targets)
            cc_results.append(
                PerQueryAuc(
                    *key, "cc", auc,
                    n_pos=len(scores.positive_scores),
                    n_neg=len(scores.negative_scores),
                    role=role,
                )
            )
        try:
            auc, scores = auc_cq(query, bundle.quote_targets)
        except QuerySkipped as skip:
            skipped.append(SkippedQuery(*key, "cq", skip.code))
        else:
            cq_results.append(
                PerQueryAuc(
                    *key, "cq", auc,
                    n_pos=len(scores.positive_scores),
                    n_neg=len(scores.negative_scores),
                    role=role,
                )
            )
    return cc_results, cq_results, skipped


@dataclass(frozen=True)
class ExperimentResult:
    cc: AucReport
    cq: AucReport
    skipped: tuple[SkippedQuery, ...]
    n_bundles: int


def run_experiment(
    corpus: Corpus,
    embeddings_by_novel: Mapping[str, Mapping[str, QuoteEmbedding]],
    strategy: Strategy,
    min_q: int = 5,
    n: int | None = None,
    aggregation: str = "mean",
    set_embeddings: Mapping[tuple[str, str, str], SetEmbedding] | None = None,
) -> ExperimentResult:
    """Build and evaluate every bundle of one strategy over a filtered
    corpus, then aggregate both evaluations.

    When ``set_embeddings`` is given, pooled query/target vectors are
    swapped for the external set-level vectors before scoring.
    """
    cc_all: list[PerQueryAuc] = []
    cq_all: list[PerQueryAuc] = []
    skipped_all: list[SkippedQuery] = []
    n_bundles = 0
    for novel in corpus.novels:
        roles = {c.character_id: c.role for c in novel.characters}
        for bundle in build_bundles(novel, embeddings_by_novel[novel.novel_id], strategy, min_q, n):
            if set_embeddings is not None:
                bundle = attach_set_embeddings(bundle, set_embeddings)
            n_bundles += 1
            cc, cq, skipped = evaluate_bundle(bundle, roles)
            cc_all.extend(cc)
            cq_all.extend(cq)
            skipped_all.extend(skipped)
    novel_ids = [nov.novel_id for nov in corpus.novels]
    return ExperimentResult(
        cc=aggregate(cc_all, novel_ids, aggregation),
        cq=aggregate(cq_all, novel_ids, aggregation),
        skipped=tuple(skipped_all),
        n_bundles=n_bundles,
    )


@dataclass(frozen=True)
class CurvePoint:
    n: int
    cc_macro: float | None
    cq_macro: float | None
    n_queries: int


def reading_order_curve(
    corpus: Corpus,
    embeddings_by_novel: Mapping[str, Mapping[str, QuoteEmbedding]],
    n_grid: Sequence[int],
    aggregation: str = "mean",
    set_embeddings: Mapping[tuple[str, str, str], SetEmbedding] | None = None,
) -> list[CurvePoint]:
    """Macro AUCs of the reading-order experiment for each n in the grid.

    A grid point with zero queries corpus-wide yields null AUCs.
    """
    if not n_grid or any(n < 1 for n in n_grid) or list(n_grid) != sorted(n_grid):
        raise ValidationError("n_grid must be non-empty, positive, ascending")
    points: list[CurvePoint] = []
    for n in n_grid:
        result = run_experiment(
            corpus,
            embeddings_by_novel,
            Strategy.READING_ORDER,
            n=n,
            aggregation=aggregation,
            set_embeddings=set_embeddings,
        )
        n_queries = len(result.cc.per_query) + sum(
            1 for s in result.skipped if s.eval_kind == "cc"
        )
        points.append(
            CurvePoint(
                n=n,
                cc_macro=result.cc.macro.mean if result.cc.macro else None,
                cq_macro=result.cq.macro.mean if result.cq.macro else None,
                n_queries=n_queries,
            )
        )
    return points
