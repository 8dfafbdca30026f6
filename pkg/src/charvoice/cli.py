"""Command-line front end.

Subcommands: ``ingest`` (normalized corpus dump + validation counts),
``stats`` (summary table for the configured experiment), ``encode``
(built-in encoder embeddings as interchange files), ``run`` (full AUC
evaluation with CSV report), ``report`` (re-aggregate a per-query CSV).

Runs are driven by one declarative config file (INI sections) so a run
directory carries its own provenance; flags mirror the config fields and
``CHARVOICE_CORPUS_ROOT`` / ``CHARVOICE_SCHEMA`` / ``CHARVOICE_OUTPUT_DIR``
override the corresponding paths.  Precedence: flag, then environment,
then config file.  Relative paths inside a config file resolve against the
config file's directory.

Exit codes: 0 success, 1 evaluation produced no queries, 2 input or
config error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import re
import sys
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import (
    Corpus,
    IngestReport,
    IngestSchema,
    ReferentType,
    Role,
    RoleThresholds,
    filter_corpus,
    load_corpus,
    write_dump,
)
from .encoders import (
    DEFAULT_DIM,
    EncoderKind,
    EncoderSpec,
    QuoteEmbedding,
    SetEmbedding,
    char_ngram_spec,
    encode_quotes,
    function_word_spec,
    import_embeddings,
    token_unigram_spec,
    write_embeddings,
)
from .errors import CharvoiceError, ConfigError, ValidationError
from .evaluation import (
    AucReport,
    CurvePoint,
    ExperimentResult,
    PerQueryAuc,
    SkippedQuery,
    aggregate,
    build_bundles,
    reading_order_curve,
    run_experiment,
    zero_vector_warnings,
)
from .representation import (
    QueryTargetBundle,
    Strategy,
    write_manifest,
)

log = logging.getLogger(__name__)

ENV_CORPUS_ROOT = "CHARVOICE_CORPUS_ROOT"
ENV_SCHEMA = "CHARVOICE_SCHEMA"
ENV_OUTPUT_DIR = "CHARVOICE_OUTPUT_DIR"

_REPORT_COLUMNS = (
    "section", "eval", "novel_id", "character_id", "role", "descriptor",
    "auc", "auc_std", "n_pos", "n_neg", "n_queries", "n_novels", "excluded_novels",
)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfiguredEncoder:
    """One encoder to evaluate: a spec plus, for external encoders, the
    interchange file(s) its vectors come from."""

    spec: EncoderSpec
    path: Path | None = None
    sets_path: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    corpus_root: Path
    schema_path: Path | None  # None selects the packaged schema
    output_dir: Path
    seed: int
    thresholds: RoleThresholds
    min_role: Role
    strategy: Strategy
    min_q: int
    n: int | None
    n_grid: tuple[int, ...] | None
    aggregation: str
    parallelism: int
    encoders: tuple[ConfiguredEncoder, ...]


def _parse_role(value: str) -> Role:
    try:
        return Role[value.strip().upper()]
    except KeyError:
        raise ConfigError(
            f"unknown role {value!r} (want minor/intermediate/major)"
        ) from None


def _parse_strategy(value: str) -> Strategy:
    try:
        return Strategy(value.strip().lower())
    except ValueError:
        raise ConfigError(
            f"unknown strategy {value!r} (want chapterwise/explicit/readingorder)"
        ) from None


def _parse_grid(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in re.split(r"[,\s]+", value.strip()) if v)
    except ValueError:
        raise ConfigError(f"n_grid must be a list of integers, got {value!r}") from None


def _resolve(value: str, base: Path) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def _read_stopwords(path: Path) -> tuple[str, ...]:
    try:
        words = tuple(
            w.strip().lower() for w in path.read_text(encoding="utf-8").splitlines() if w.strip()
        )
    except OSError as exc:
        raise ConfigError(f"cannot read stopword list {path}: {exc}") from exc
    if not words:
        raise ConfigError(f"stopword list {path} is empty")
    return words


def _parse_encoder_section(
    parser: ConfigParser, section: str, base: Path, default_seed: int
) -> ConfiguredEncoder:
    encoder_id = section.partition(":")[2].strip()
    if not encoder_id:
        raise ConfigError(f"config section [{section}] needs a name after 'encoder:'")
    kind = parser.get(section, "kind", fallback="").strip().lower()
    dim = parser.getint(section, "dim", fallback=DEFAULT_DIM)
    seed = parser.getint(section, "seed", fallback=default_seed)
    if kind == "char_ngram":
        n = parser.getint(section, "n", fallback=3)
        return ConfiguredEncoder(char_ngram_spec(n, dim, seed, encoder_id=encoder_id))
    if kind == "token_unigram":
        return ConfiguredEncoder(token_unigram_spec(dim, seed, encoder_id=encoder_id))
    if kind == "function_word":
        stopword_file = parser.get(section, "stopwords", fallback="").strip()
        if stopword_file:
            words = _read_stopwords(_resolve(stopword_file, base))
            return ConfiguredEncoder(function_word_spec(words, encoder_id=encoder_id))
        return ConfiguredEncoder(function_word_spec(encoder_id=encoder_id))
    if kind == "external":
        path_value = parser.get(section, "path", fallback="").strip()
        if not path_value:
            raise ConfigError(f"[{section}] external encoder needs path = <interchange file>")
        if not parser.get(section, "dim", fallback="").strip():
            raise ConfigError(f"[{section}] external encoder needs dim = <expected dimension>")
        sets_value = parser.get(section, "sets", fallback="").strip()
        return ConfiguredEncoder(
            EncoderSpec(encoder_id, EncoderKind.EXTERNAL, {"dim": dim}),
            path=_resolve(path_value, base),
            sets_path=_resolve(sets_value, base) if sets_value else None,
        )
    raise ConfigError(
        f"[{section}] unknown encoder kind {kind!r} "
        "(want char_ngram/token_unigram/function_word/external)"
    )


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, environment path overrides, and the config file."""
    parser = ConfigParser(interpolation=None)
    base = Path.cwd()
    if args.config is not None:
        config_path = Path(args.config)
        if not config_path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        try:
            with open(config_path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (ConfigParserError, OSError) as exc:
            raise ConfigError(f"cannot parse config file {config_path}: {exc}") from exc
        base = config_path.parent

    def conf(section: str, key: str) -> str | None:
        value = parser.get(section, key, fallback="").strip()
        return value or None

    def pick_path(flag: str | None, env: str, value: str | None) -> Path | None:
        if flag:
            return Path(flag)
        if os.environ.get(env, "").strip():
            return Path(os.environ[env].strip())
        if value:
            return _resolve(value, base)
        return None

    corpus_root = pick_path(args.corpus, ENV_CORPUS_ROOT, conf("corpus", "root"))
    if corpus_root is None:
        raise ConfigError(
            "no corpus root configured (set [corpus] root, --corpus, or "
            f"{ENV_CORPUS_ROOT})"
        )
    schema_path = pick_path(args.schema, ENV_SCHEMA, conf("corpus", "schema"))
    output_dir = pick_path(args.output_dir, ENV_OUTPUT_DIR, conf("run", "output_dir"))
    if output_dir is None:
        output_dir = Path("out")

    seed = args.seed if args.seed is not None else parser.getint("run", "seed", fallback=0)
    try:
        thresholds = RoleThresholds(
            intermediate_min=(
                args.intermediate_min
                if args.intermediate_min is not None
                else parser.getint("roles", "intermediate_min", fallback=10)
            ),
            major_min=(
                args.major_min
                if args.major_min is not None
                else parser.getint("roles", "major_min", fallback=100)
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"bad role thresholds: {exc}") from exc
    min_role = _parse_role(args.min_role or conf("roles", "min_role") or "intermediate")
    strategy = _parse_strategy(args.strategy or conf("experiment", "strategy") or "chapterwise")
    min_q = (
        args.min_q if args.min_q is not None
        else parser.getint("experiment", "min_q", fallback=5)
    )
    if min_q < 1:
        raise ConfigError(f"min_q must be >= 1, got {min_q}")
    n = args.n if args.n is not None else (
        parser.getint("experiment", "n", fallback=0) or None
    )
    if args.n_grid is not None:
        n_grid: tuple[int, ...] | None = tuple(args.n_grid)
    else:
        grid_value = conf("experiment", "n_grid")
        n_grid = _parse_grid(grid_value) if grid_value else None
    aggregation = (args.aggregation or conf("run", "aggregation") or "mean").lower()
    if aggregation not in ("mean", "pooled"):
        raise ConfigError(f"aggregation must be 'mean' or 'pooled', got {aggregation!r}")
    parallelism = (
        args.parallelism if args.parallelism is not None
        else parser.getint("run", "parallelism", fallback=1)
    )
    if parallelism < 1:
        raise ConfigError(f"parallelism must be >= 1, got {parallelism}")

    encoders = tuple(
        _parse_encoder_section(parser, section, base, seed)
        for section in parser.sections()
        if section.startswith("encoder:")
    )
    if not encoders:
        encoders = (ConfiguredEncoder(char_ngram_spec(seed=seed)),)
    ids = [c.spec.encoder_id for c in encoders]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate encoder ids in config: {sorted(ids)}")

    return RunConfig(
        corpus_root=corpus_root,
        schema_path=schema_path,
        output_dir=output_dir,
        seed=seed,
        thresholds=thresholds,
        min_role=min_role,
        strategy=strategy,
        min_q=min_q,
        n=n,
        n_grid=n_grid,
        aggregation=aggregation,
        parallelism=parallelism,
        encoders=encoders,
    )


def _load_schema(config: RunConfig) -> IngestSchema:
    if config.schema_path is not None:
        return IngestSchema.from_file(config.schema_path)
    ref = resources.files("charvoice") / "schemas" / "pdnc.schema"
    with resources.as_file(ref) as path:
        return IngestSchema.from_file(path)


def _load_corpora(config: RunConfig) -> tuple[Corpus, Corpus, IngestReport]:
    """(raw corpus, role-filtered corpus, load-time exclusion report)."""
    schema = _load_schema(config)
    report = IngestReport()
    raw = load_corpus(
        config.corpus_root, schema, config.thresholds,
        parallelism=config.parallelism, report=report,
    )
    return raw, filter_corpus(raw, config.min_role), report


def _require_experiment_params(config: RunConfig, need_single_n: bool) -> None:
    if config.strategy is not Strategy.READING_ORDER:
        return
    if need_single_n:
        if config.n is None:
            raise ConfigError("reading-order stats need [experiment] n")
        return
    if (config.n is None) == (config.n_grid is None):
        raise ConfigError(
            "reading-order runs need exactly one of [experiment] n (single run) "
            "or n_grid (curve)"
        )


def _file_tag(encoder_id: str) -> str:
    return re.sub(r"[^\w.-]", "_", encoder_id)


def _require_unique_quote_ids(corpus: Corpus) -> None:
    """The embedding interchange format keys quote records by quote_id
    alone, so corpus-wide exports and imports need globally unique ids.
    Per-novel evaluation with built-in encoders has no such constraint."""
    owners: dict[str, str] = {}
    collisions: dict[str, list[str]] = {}
    for novel in corpus.novels:
        for quote in novel.quotes:
            owner = owners.setdefault(quote.quote_id, novel.novel_id)
            if owner != novel.novel_id:
                collisions.setdefault(quote.quote_id, [owner]).append(novel.novel_id)
    if collisions:
        shown = "; ".join(
            f"{quote_id} in {', '.join(novels)}"
            for quote_id, novels in sorted(collisions.items())[:5]
        )
        more = f" (+{len(collisions) - 5} more)" if len(collisions) > 5 else ""
        raise ValidationError(
            f"quote ids repeat across novels: {shown}{more}; embedding "
            "interchange files need corpus-wide unique quote ids"
        )


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def cmd_ingest(config: RunConfig) -> int:
    raw, filtered, report = _load_corpora(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    dump_path = config.output_dir / "dump.tsv"
    dumped = write_dump(filtered, dump_path)

    excluded_path = config.output_dir / "excluded.tsv"
    with open(excluded_path, "w", encoding="utf-8", newline="\n") as fh:
        for novel_id in sorted(report.excluded):
            for quote_id, reason in report.excluded[novel_id]:
                fh.write(f"{novel_id}\t{quote_id}\t{reason}\n")

    print(f"novels: {len(raw.novels)}")
    for novel in raw.novels:
        kept = filtered.novel(novel.novel_id)
        print(
            f"  {novel.novel_id}: chapters={novel.chapter_count} "
            f"quotes={len(novel.quotes)} retained={len(kept.quotes)} "
            f"speakers={len(novel.characters)} retained_speakers={len(kept.characters)}"
        )
    raw_quotes = sum(len(n.quotes) for n in raw.novels)
    kept_quotes = sum(len(n.quotes) for n in filtered.novels)
    reasons: dict[str, int] = {}
    for rows in report.excluded.values():
        for _, reason in rows:
            reasons[reason] = reasons.get(reason, 0) + 1
    reason_text = (
        ", ".join(f"{k}={v}" for k, v in sorted(reasons.items())) if reasons else "none"
    )
    print(f"quotes: {raw_quotes} loaded, {kept_quotes} retained (role >= {config.min_role.name.lower()})")
    print(f"excluded at load: {report.total_excluded} ({reason_text})")
    print(f"dump: {dump_path} ({dumped} lines)")
    print(f"excluded log: {excluded_path}")
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NovelStats:
    novel_id: str
    chapters: int
    quotes: int
    explicit_share: float
    speakers_retained: int
    speakers_in_targets: int
    active_speakers: int
    queries: int
    query_lengths: tuple[int, ...]
    targets_char: tuple[int, ...]
    targets_quote: tuple[int, ...]

    @property
    def activity_pct(self) -> float:
        if self.speakers_retained == 0:
            return 0.0
        return 100.0 * self.active_speakers / self.speakers_retained


def _probe_embeddings(novel) -> dict[str, QuoteEmbedding]:
    # Bundle membership never depends on vector values, so a constant
    # one-dimensional embedding reproduces exactly the bundles `run` uses.
    one = np.ones(1, dtype=np.float32)
    return {q.quote_id: QuoteEmbedding(q.quote_id, "probe", one, 1) for q in novel.quotes}


def _novel_bundles(novel, config: RunConfig) -> list[QueryTargetBundle]:
    return build_bundles(
        novel, _probe_embeddings(novel), config.strategy, config.min_q, config.n
    )


def _novel_stats(novel, bundles: Sequence[QueryTargetBundle]) -> NovelStats:
    queries = [q for b in bundles for q in b.queries]
    targets_char: list[int] = []
    targets_quote: list[int] = []
    for bundle in bundles:
        targets_char.extend(len(bundle.character_targets) for _ in bundle.queries)
        targets_quote.extend(len(bundle.quote_targets) for _ in bundle.queries)
    explicit = sum(1 for q in novel.quotes if q.referent_type is ReferentType.EXPLICIT)
    return NovelStats(
        novel_id=novel.novel_id,
        chapters=novel.chapter_count,
        quotes=len(novel.quotes),
        explicit_share=(100.0 * explicit / len(novel.quotes)) if novel.quotes else 0.0,
        speakers_retained=len(novel.characters),
        speakers_in_targets=len(
            {t.character_id for b in bundles for t in b.character_targets}
        ),
        active_speakers=len({q.character_id for q in queries}),
        queries=len(queries),
        query_lengths=tuple(q.support_count for q in queries),
        targets_char=tuple(targets_char),
        targets_quote=tuple(targets_quote),
    )


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def cmd_stats(config: RunConfig) -> int:
    _require_experiment_params(config, need_single_n=True)
    _, filtered, _ = _load_corpora(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    rows: list[NovelStats] = []
    all_bundles: list[QueryTargetBundle] = []
    for novel in filtered.novels:
        bundles = _novel_bundles(novel, config)
        all_bundles.extend(bundles)
        rows.append(_novel_stats(novel, bundles))

    manifest_path = config.output_dir / "manifest.tsv"
    manifest_rows = write_manifest(all_bundles, manifest_path)

    header = (
        f"{'novel':<28} {'chap':>4} {'quotes':>6} {'expl%':>6} {'spkrs':>5} "
        f"{'tgts':>5} {'activ':>5} {'act%':>5} {'quers':>5} {'qlen':>6} "
        f"{'t/chr':>6} {'t/qt':>7}"
    )
    print(f"experiment: {config.strategy.value}"
          + (f" n={config.n}" if config.strategy is Strategy.READING_ORDER else f" min_q={config.min_q}"))
    print(header)
    for row in rows:
        qlen, _ = _mean_std(row.query_lengths) if row.query_lengths else (float("nan"), 0.0)
        tchr, _ = _mean_std(row.targets_char) if row.targets_char else (float("nan"), 0.0)
        tqt, _ = _mean_std(row.targets_quote) if row.targets_quote else (float("nan"), 0.0)
        print(
            f"{row.novel_id:<28.28} {row.chapters:>4} {row.quotes:>6} "
            f"{row.explicit_share:>6.1f} {row.speakers_retained:>5} "
            f"{row.speakers_in_targets:>5} {row.active_speakers:>5} "
            f"{row.activity_pct:>5.1f} {row.queries:>5} {qlen:>6.1f} "
            f"{tchr:>6.1f} {tqt:>7.1f}"
        )

    total_queries = sum(r.queries for r in rows)
    zero_novels = sorted(r.novel_id for r in rows if r.queries == 0)
    spk_mean, spk_std = _mean_std([r.speakers_retained for r in rows])
    tgt_mean, tgt_std = _mean_std([r.speakers_in_targets for r in rows])
    act_mean, act_std = _mean_std([r.activity_pct for r in rows])
    qn_mean, qn_std = _mean_std([r.queries for r in rows])
    with_queries = [r for r in rows if r.queries > 0]
    qlen_mean, qlen_std = _mean_std(
        [_mean_std(r.query_lengths)[0] for r in with_queries]
    ) if with_queries else (float("nan"), float("nan"))
    tchr_mean, tchr_std = _mean_std(
        [_mean_std(r.targets_char)[0] for r in with_queries]
    ) if with_queries else (float("nan"), float("nan"))
    tqt_mean, tqt_std = _mean_std(
        [_mean_std(r.targets_quote)[0] for r in with_queries]
    ) if with_queries else (float("nan"), float("nan"))

    total_quotes = sum(r.quotes for r in rows)
    explicit_quotes = sum(
        1
        for novel in filtered.novels
        for q in novel.quotes
        if q.referent_type is ReferentType.EXPLICIT
    )
    share_retained = (100.0 * explicit_quotes / total_quotes) if total_quotes else 0.0
    shares = [r.explicit_share for r in rows if r.quotes]

    print()
    print(f"total queries: {total_queries}")
    print(f"novels with zero queries: {', '.join(zero_novels) if zero_novels else 'none'}")
    print("mean over novels (std):")
    print(f"  speakers retained       {spk_mean:.1f} ({spk_std:.1f})")
    print(f"  speakers in targets     {tgt_mean:.1f} ({tgt_std:.1f})")
    print(f"  activity %              {act_mean:.1f} ({act_std:.1f})")
    print(f"  queries                 {qn_mean:.1f} ({qn_std:.1f})")
    print(f"  query length (quotes)   {qlen_mean:.1f} ({qlen_std:.1f})")
    print(f"  targets/query character {tchr_mean:.1f} ({tchr_std:.1f})")
    print(f"  targets/query quote     {tqt_mean:.1f} ({tqt_std:.1f})")
    if shares:
        print(
            f"explicit quote share: {share_retained:.1f}% of retained quotes "
            f"(novel min {min(shares):.1f}%, max {max(shares):.1f}%)"
        )
    print(f"manifest: {manifest_path} ({manifest_rows} entries)")

    stats_path = config.output_dir / "stats.tsv"
    with open(stats_path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(
            (
                "novel_id", "chapters", "quotes", "explicit_share_pct",
                "speakers_retained", "speakers_in_targets", "active_speakers",
                "activity_pct", "queries", "query_len_mean",
                "targets_char_mean", "targets_quote_mean",
            )
        )
        for row in rows:
            qlen = _mean_std(row.query_lengths)[0] if row.query_lengths else ""
            tchr = _mean_std(row.targets_char)[0] if row.targets_char else ""
            tqt = _mean_std(row.targets_quote)[0] if row.targets_quote else ""
            writer.writerow(
                (
                    row.novel_id, row.chapters, row.quotes, repr(row.explicit_share),
                    row.speakers_retained, row.speakers_in_targets, row.active_speakers,
                    repr(row.activity_pct), row.queries,
                    repr(qlen) if qlen != "" else "",
                    repr(tchr) if tchr != "" else "",
                    repr(tqt) if tqt != "" else "",
                )
            )
    print(f"stats table: {stats_path}")
    return 0


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------


def cmd_encode(config: RunConfig) -> int:
    _, filtered, _ = _load_corpora(config)
    _require_unique_quote_ids(filtered)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    quotes = [q for novel in filtered.novels for q in novel.quotes]
    for cenc in config.encoders:
        if cenc.spec.kind is EncoderKind.EXTERNAL:
            imported = import_embeddings(cenc.path, expected_encoder=cenc.spec)
            print(
                f"{cenc.spec.encoder_id}: external file {cenc.path} valid "
                f"({len(imported.quotes)} quote records, {len(imported.sets)} set records)"
            )
            if cenc.sets_path is not None:
                imported_sets = import_embeddings(cenc.sets_path, expected_encoder=cenc.spec)
                print(
                    f"{cenc.spec.encoder_id}: external file {cenc.sets_path} valid "
                    f"({len(imported_sets.quotes)} quote records, "
                    f"{len(imported_sets.sets)} set records)"
                )
            continue
        embeddings, skipped = encode_quotes(quotes, cenc.spec)
        out_path = config.output_dir / f"embeddings_{_file_tag(cenc.spec.encoder_id)}.vec"
        written = write_embeddings(out_path, quote_embeddings=embeddings.values())
        print(
            f"{cenc.spec.encoder_id}: {written} records -> {out_path}"
            + (f" ({len(skipped)} quotes skipped)" if skipped else "")
        )
        if skipped:
            skip_path = config.output_dir / f"encode_skipped_{_file_tag(cenc.spec.encoder_id)}.log"
            with open(skip_path, "w", encoding="utf-8", newline="\n") as fh:
                for quote_id, reason in skipped:
                    fh.write(f"{quote_id}\t{reason}\n")
            print(f"{cenc.spec.encoder_id}: skipped quotes logged to {skip_path}")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _drop_quotes(corpus: Corpus, drop: set[str]) -> Corpus:
    if not drop:
        return corpus
    novels = tuple(
        replace(n, quotes=tuple(q for q in n.quotes if q.quote_id not in drop))
        for n in corpus.novels
    )
    return replace(corpus, novels=novels)


def _builtin_embeddings(
    corpus: Corpus, spec: EncoderSpec
) -> tuple[Corpus, dict[str, Mapping[str, QuoteEmbedding]], list[tuple[str, str]]]:
    """Encode every retained quote; quotes the encoder cannot handle are
    dropped from the evaluated corpus view and reported."""
    by_novel: dict[str, Mapping[str, QuoteEmbedding]] = {}
    skipped_all: list[tuple[str, str]] = []
    for novel in corpus.novels:
        embeddings, skipped = encode_quotes(novel.quotes, spec)
        by_novel[novel.novel_id] = embeddings
        skipped_all.extend(skipped)
    evaluated = _drop_quotes(corpus, {quote_id for quote_id, _ in skipped_all})
    return evaluated, by_novel, skipped_all


def _external_embeddings(
    corpus: Corpus, cenc: ConfiguredEncoder
) -> tuple[
    dict[str, Mapping[str, QuoteEmbedding]],
    dict[tuple[str, str, str], SetEmbedding] | None,
]:
    _require_unique_quote_ids(corpus)
    imported = import_embeddings(cenc.path, expected_encoder=cenc.spec)
    sets: dict[tuple[str, str, str], SetEmbedding] = dict(imported.sets)
    if cenc.sets_path is not None:
        extra = import_embeddings(cenc.sets_path, expected_encoder=cenc.spec)
        overlap = sets.keys() & extra.sets.keys()
        if overlap:
            raise ValidationError(
                f"set records duplicated across {cenc.path} and {cenc.sets_path}: "
                f"{sorted(overlap)[:10]}"
            )
        sets.update(extra.sets)

    retained = [q.quote_id for novel in corpus.novels for q in novel.quotes]
    uncovered = sorted(set(retained) - imported.quotes.keys())
    if uncovered:
        shown = ", ".join(uncovered[:50])
        more = f" (+{len(uncovered) - 50} more)" if len(uncovered) > 50 else ""
        raise ValidationError(
            f"encoder {cenc.spec.encoder_id}: {cenc.path} is missing embeddings for "
            f"{len(uncovered)} retained quotes: {shown}{more}"
        )
    by_novel = {novel.novel_id: imported.quotes for novel in corpus.novels}
    return by_novel, (sets or None)


def _csv_row(**fields: object) -> list[str]:
    return [str(fields.get(col, "")) for col in _REPORT_COLUMNS]


def _report_rows(report: AucReport) -> Iterable[list[str]]:
    for r in report.per_query:
        yield _csv_row(
            section="per_query", eval=r.eval_kind, novel_id=r.novel_id,
            character_id=r.character_id, role=r.role.name.lower(),
            descriptor=r.descriptor, auc=repr(r.auc), n_pos=r.n_pos, n_neg=r.n_neg,
        )
    for nov in report.per_novel:
        yield _csv_row(
            section="per_novel", eval=report.eval_kind, novel_id=nov.novel_id,
            auc=repr(nov.mean), auc_std=repr(nov.std), n_queries=nov.n_queries,
        )
    for role in report.per_role:
        yield _csv_row(
            section="per_role", eval=report.eval_kind, role=role.role.name.lower(),
            auc=repr(role.mean), auc_std=repr(role.std),
            n_queries=role.n_queries, n_novels=role.n_novels,
        )
    if report.macro is not None:
        yield _csv_row(
            section="macro", eval=report.eval_kind, auc=repr(report.macro.mean),
            auc_std=repr(report.macro.std), n_novels=report.macro.n_novels,
            excluded_novels=";".join(report.excluded_novels),
        )


def _write_report_csv(path: Path, cc: AucReport, cq: AucReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_REPORT_COLUMNS)
        for report in (cc, cq):
            writer.writerows(_report_rows(report))


def _write_skipped(path: Path, skipped: Sequence[SkippedQuery]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in skipped:
            fh.write(f"{s.novel_id}\t{s.character_id}\t{s.descriptor}\t{s.eval_kind}\t{s.reason}\n")


def _write_curve(path: Path, points: Sequence[CurvePoint]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n\tcc_auc\tcq_auc\n")
        for p in points:
            cc = repr(p.cc_macro) if p.cc_macro is not None else "NA"
            cq = repr(p.cq_macro) if p.cq_macro is not None else "NA"
            fh.write(f"{p.n}\t{cc}\t{cq}\n")


def _print_result(encoder_id: str, result: ExperimentResult) -> None:
    def macro_text(report: AucReport) -> str:
        if report.macro is None:
            return "n/a (no scored queries)"
        text = f"{report.macro.mean:.3f} (std {report.macro.std:.3f}, {report.macro.n_novels} novels)"
        if report.excluded_novels:
            text += f", excluded: {', '.join(report.excluded_novels)}"
        return text

    print(f"{encoder_id}: cc macro {macro_text(result.cc)}")
    print(f"{encoder_id}: cq macro {macro_text(result.cq)}")
    print(
        f"{encoder_id}: queries cc={len(result.cc.per_query)} cq={len(result.cq.per_query)} "
        f"skipped={len(result.skipped)} bundles={result.n_bundles} "
        f"zero_vector_cosines={zero_vector_warnings.count}"
    )


def cmd_run(config: RunConfig) -> int:
    _require_experiment_params(config, need_single_n=False)
    _, filtered, _ = _load_corpora(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    any_queries = False
    for cenc in config.encoders:
        zero_vector_warnings.reset()
        tag = _file_tag(cenc.spec.encoder_id)
        evaluated = filtered
        sets: dict[tuple[str, str, str], SetEmbedding] | None = None
        if cenc.spec.kind is EncoderKind.EXTERNAL:
            by_novel, sets = _external_embeddings(filtered, cenc)
        else:
            evaluated, by_novel, enc_skipped = _builtin_embeddings(filtered, cenc.spec)
            if enc_skipped:
                log.warning(
                    "%s: %d quotes not encodable, dropped from evaluation",
                    cenc.spec.encoder_id, len(enc_skipped),
                )

        if config.strategy is Strategy.READING_ORDER and config.n_grid is not None:
            points = reading_order_curve(
                evaluated, by_novel, config.n_grid,
                aggregation=config.aggregation, set_embeddings=sets,
            )
            curve_path = config.output_dir / f"curve_{tag}.tsv"
            _write_curve(curve_path, points)
            for p in points:
                cc = f"{p.cc_macro:.3f}" if p.cc_macro is not None else "NA"
                cq = f"{p.cq_macro:.3f}" if p.cq_macro is not None else "NA"
                print(f"{cenc.spec.encoder_id}: n={p.n} cc={cc} cq={cq} queries={p.n_queries}")
            print(f"{cenc.spec.encoder_id}: curve -> {curve_path}")
            any_queries = any_queries or any(p.n_queries > 0 for p in points)
            continue

        result = run_experiment(
            evaluated, by_novel, config.strategy,
            min_q=config.min_q, n=config.n,
            aggregation=config.aggregation, set_embeddings=sets,
        )
        report_path = config.output_dir / f"report_{tag}.csv"
        _write_report_csv(report_path, result.cc, result.cq)
        skipped_path = config.output_dir / f"skipped_{tag}.log"
        _write_skipped(skipped_path, result.skipped)
        _print_result(cenc.spec.encoder_id, result)
        print(f"{cenc.spec.encoder_id}: report -> {report_path}")
        constructed = len(result.cc.per_query) + sum(
            1 for s in result.skipped if s.eval_kind == "cc"
        )
        any_queries = any_queries or constructed > 0

    if not any_queries:
        print("evaluation produced no queries", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# report (re-aggregation)
# ---------------------------------------------------------------------------


def _read_per_query(path: Path) -> list[PerQueryAuc]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ValidationError(f"{path}: empty report")
            missing = [c for c in _REPORT_COLUMNS if c not in reader.fieldnames]
            if missing:
                raise ValidationError(f"{path}: missing report columns {missing}")
            rows = [row for row in reader if row["section"] == "per_query"]
    except OSError as exc:
        raise ValidationError(f"cannot read report {path}: {exc}") from exc
    results = []
    for row in rows:
        try:
            results.append(
                PerQueryAuc(
                    novel_id=row["novel_id"],
                    character_id=row["character_id"],
                    descriptor=row["descriptor"],
                    eval_kind=row["eval"],
                    auc=float(row["auc"]),
                    n_pos=int(row["n_pos"]),
                    n_neg=int(row["n_neg"]),
                    role=Role[row["role"].upper()],
                )
            )
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"{path}: bad per_query row {row!r}: {exc}") from exc
    return results


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.input)
    per_query = _read_per_query(path)
    if not per_query:
        print("report has no per-query rows", file=sys.stderr)
        return 1
    aggregation = args.aggregation or "mean"
    novel_ids = sorted({r.novel_id for r in per_query})
    for eval_kind in ("cc", "cq"):
        subset = [r for r in per_query if r.eval_kind == eval_kind]
        if not subset:
            continue
        report = aggregate(subset, novel_ids, aggregation)
        print(f"[{eval_kind}] aggregation={aggregation}")
        for nov in report.per_novel:
            print(f"  {nov.novel_id:<28.28} {nov.mean:.3f} (std {nov.std:.3f}, n={nov.n_queries})")
        for role in report.per_role:
            print(
                f"  role {role.role.name.lower():<12} {role.mean:.3f} "
                f"(std {role.std:.3f}, n={role.n_queries}, novels={role.n_novels})"
            )
        assert report.macro is not None
        print(f"  macro {report.macro.mean:.3f} (std {report.macro.std:.3f}, novels={report.macro.n_novels})")
        if args.out:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            out_path = out_dir / f"reaggregated_{eval_kind}_{aggregation}.csv"
            with open(out_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(_REPORT_COLUMNS)
                writer.writerows(_report_rows(report))
            print(f"  written -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charvoice",
        description="Character voice distinguishability experiments over "
        "speaker-annotated novel corpora.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase log verbosity (-v info, -vv debug)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (INI sections)")
    common.add_argument("--corpus", help="corpus root directory")
    common.add_argument("--schema", help="ingest schema file")
    common.add_argument("--output-dir", help="artifact output directory")
    common.add_argument("--seed", type=int, help="hash seed for built-in encoders")
    common.add_argument("--min-role", choices=("minor", "intermediate", "major"),
                        help="lowest character role kept")
    common.add_argument("--intermediate-min", type=int, help="quote count for intermediate role")
    common.add_argument("--major-min", type=int, help="quote count for major role")
    common.add_argument("--strategy", choices=("chapterwise", "explicit", "readingorder"),
                        help="query subset strategy")
    common.add_argument("--min-q", type=int, help="minimum quotes per query subset")
    common.add_argument("--n", type=int, help="reading-order quote budget (single run)")
    common.add_argument("--n-grid", type=int, nargs="+", help="reading-order curve grid")
    common.add_argument("--aggregation", choices=("mean", "pooled"),
                        help="per-novel aggregation of per-query AUCs")
    common.add_argument("--parallelism", type=int, help="ingest worker threads")

    subparsers.add_parser("ingest", parents=[common],
                          help="load the corpus, write the normalized dump")
    subparsers.add_parser("stats", parents=[common],
                          help="summary table for the configured experiment")
    subparsers.add_parser("encode", parents=[common],
                          help="write built-in encoder embeddings, validate external files")
    subparsers.add_parser("run", parents=[common],
                          help="evaluate the configured experiment, write reports")

    report = subparsers.add_parser("report", help="re-aggregate a per-query report CSV")
    report.add_argument("input", help="report CSV produced by `run`")
    report.add_argument("--aggregation", choices=("mean", "pooled"))
    report.add_argument("--out", help="directory for re-aggregated CSVs")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        if args.command == "report":
            return cmd_report(args)
        config = load_run_config(args)
        command = {
            "ingest": cmd_ingest,
            "stats": cmd_stats,
            "encode": cmd_encode,
            "run": cmd_run,
        }[args.command]
        return command(config)
    except CharvoiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
