"""Speaker-annotated novel corpus ingestion, cleaning, and filtering.

Reads PDNC-style directory trees: one subdirectory per novel, each holding
a quotation table (quote text, type, speaker, chapter) and a character
table (canonical names plus aliases).  Column names, label values, and the
way incises are encoded all come from a declarative schema file, so that
parsing survives dataset releases with different layouts.

Schema files use INI ``key = value`` sections::

    [files]
    quotes = quotation_info.csv
    characters = character_info.csv
    meta = meta.txt                ; optional, key = value per line

    [quotes]
    id = quoteID
    chapter = chapter
    text = quoteText
    type = quoteType
    speaker = speaker
    encoding = segments            ; "segments" or "plain"
    incise_spans =                 ; span column for encoding=plain
    speaker_separator =            ; set to flag multi-speaker rows

    [characters]
    name = Main Name
    aliases = Aliases
    alias_separator = ;

    [types]
    Explicit = explicit
    Anaphoric = anaphoric
    Implicit = implicit

    [schema]
    version = pdnc-2022

With ``encoding = segments`` the text cell holds a list literal of speech
segments (narrative incises already removed between elements), the layout
used by PDNC.  With ``encoding = plain`` the cell is the raw annotated
string and the ``incise_spans`` column holds a JSON list of
``[start, end)`` character offsets to strip.
"""

from __future__ import annotations

import ast
import csv
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, IngestError, ValidationError

log = logging.getLogger(__name__)

_WS_RUN = re.compile(r"\s+")


class ReferentType(Enum):
    """How the gold mention refers to the speaker."""

    EXPLICIT = "explicit"
    ANAPHORIC = "anaphoric"
    IMPLICIT = "implicit"


class Role(IntEnum):
    """Character prominence class; ordering supports ``role >= min_role``."""

    MINOR = 0
    INTERMEDIATE = 1
    MAJOR = 2


@dataclass(frozen=True)
class RoleThresholds:
    """Quote-count cutoffs for role assignment.

    A character is MAJOR with at least ``major_min`` quotes, INTERMEDIATE
    with at least ``intermediate_min``, MINOR otherwise.
    """

    intermediate_min: int = 10
    major_min: int = 100

    def __post_init__(self):
        if not (0 < self.intermediate_min <= self.major_min):
            raise ConfigError(
                f"role thresholds must satisfy 0 < intermediate_min <= major_min, "
                f"got ({self.intermediate_min}, {self.major_min})"
            )

    def classify(self, quote_count: int) -> Role:
        if quote_count >= self.major_min:
            return Role.MAJOR
        if quote_count >= self.intermediate_min:
            return Role.INTERMEDIATE
        return Role.MINOR


DEFAULT_THRESHOLDS = RoleThresholds()


@dataclass(frozen=True)
class Quote:
    """One utterance of direct speech.

    ``ordinal`` is the 0-based position of the quote in the novel's reading
    order (chapters ascending, table order within a chapter).  ``clean_text``
    is the speech with incises removed and is never empty.
    """

    quote_id: str
    novel_id: str
    chapter_index: int
    ordinal: int
    raw_text: str
    clean_text: str
    referent_type: ReferentType
    speaker_id: str


@dataclass(frozen=True)
class Character:
    character_id: str
    novel_id: str
    main_name: str
    aliases: frozenset[str]
    role: Role
    quote_count: int


@dataclass(frozen=True)
class Novel:
    novel_id: str
    title: str
    author: str
    chapter_count: int
    characters: tuple[Character, ...]
    quotes: tuple[Quote, ...]

    def character_by_id(self, character_id: str) -> Character:
        for c in self.characters:
            if c.character_id == character_id:
                return c
        raise KeyError(character_id)

    def quotes_of(self, character_id: str) -> tuple[Quote, ...]:
        return tuple(q for q in self.quotes if q.speaker_id == character_id)

    def quotes_in_chapter(self, chapter_index: int) -> tuple[Quote, ...]:
        return tuple(q for q in self.quotes if q.chapter_index == chapter_index)


@dataclass(frozen=True)
class Provenance:
    source_path: str
    schema_version: str


@dataclass(frozen=True)
class Corpus:
    novels: tuple[Novel, ...]
    provenance: Provenance

    def novel(self, novel_id: str) -> Novel:
        for n in self.novels:
            if n.novel_id == novel_id:
                return n
        raise KeyError(novel_id)


@dataclass
class IngestReport:
    """Per-novel record of rows the loader kept out of the corpus."""

    excluded: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def exclude(self, novel_id: str, quote_id: str, reason: str) -> None:
        self.excluded.setdefault(novel_id, []).append((quote_id, reason))

    @property
    def total_excluded(self) -> int:
        return sum(len(v) for v in self.excluded.values())


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IngestSchema:
    """Declarative mapping from corpus table columns to domain fields."""

    quote_file: str
    character_file: str
    meta_file: str | None
    quote_id_col: str
    chapter_col: str
    text_col: str
    type_col: str
    speaker_col: str
    text_encoding: str  # "segments" | "plain"
    incise_spans_col: str | None
    speaker_separator: str | None
    name_col: str
    aliases_col: str | None
    alias_separator: str
    type_labels: Mapping[str, ReferentType]
    version: str

    @classmethod
    def from_file(cls, path: str | Path) -> "IngestSchema":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"schema file not found: {path}")
        parser = ConfigParser(interpolation=None)
        parser.optionxform = str  # type labels are case-sensitive
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (ConfigParserError, OSError) as exc:
            raise ConfigError(f"cannot parse schema file {path}: {exc}") from exc

        def req(section: str, key: str) -> str:
            if not parser.has_option(section, key) or not parser.get(section, key).strip():
                raise ConfigError(f"schema {path}: missing required key [{section}] {key}")
            return parser.get(section, key).strip()

        def opt(section: str, key: str) -> str | None:
            if parser.has_option(section, key) and parser.get(section, key).strip():
                return parser.get(section, key).strip()
            return None

        encoding = req("quotes", "encoding")
        if encoding not in ("segments", "plain"):
            raise ConfigError(f"schema {path}: quotes.encoding must be 'segments' or 'plain'")
        if not parser.has_section("types") or not parser.options("types"):
            raise ConfigError(f"schema {path}: missing [types] mapping")
        labels: dict[str, ReferentType] = {}
        for label, canonical in parser.items("types"):
            try:
                labels[label] = ReferentType(canonical.strip().lower())
            except ValueError:
                raise ConfigError(
                    f"schema {path}: [types] {label} maps to unknown referent type "
                    f"{canonical!r} (want explicit/anaphoric/implicit)"
                ) from None
        return cls(
            quote_file=req("files", "quotes"),
            character_file=req("files", "characters"),
            meta_file=opt("files", "meta"),
            quote_id_col=req("quotes", "id"),
            chapter_col=req("quotes", "chapter"),
            text_col=req("quotes", "text"),
            type_col=req("quotes", "type"),
            speaker_col=req("quotes", "speaker"),
            text_encoding=encoding,
            incise_spans_col=opt("quotes", "incise_spans"),
            speaker_separator=opt("quotes", "speaker_separator"),
            name_col=req("characters", "name"),
            aliases_col=opt("characters", "aliases"),
            alias_separator=opt("characters", "alias_separator") or ";",
            type_labels=labels,
            version=opt("schema", "version") or "unversioned",
        )


# ---------------------------------------------------------------------------
# Text cleaning
# ---------------------------------------------------------------------------


def strip_incise(raw_text: str, incise_spans: Sequence[tuple[int, int]]) -> str:
    """Remove narrative incises from an annotated quote.

    ``incise_spans`` are sorted, non-overlapping ``[start, end)`` character
    ranges within ``raw_text``.  The remaining speech segments are stripped
    and joined with a single space.

    Raises ValidationError for out-of-bounds, overlapping, or unsorted spans.
    """
    prev_end = 0
    segments: list[str] = []
    for start, end in incise_spans:
        if start < 0 or end > len(raw_text) or start > end:
            raise ValidationError(
                f"incise span ({start}, {end}) out of bounds for text of length {len(raw_text)}"
            )
        if start < prev_end:
            raise ValidationError(
                f"incise span ({start}, {end}) overlaps or is out of order "
                f"(previous span ended at {prev_end})"
            )
        segments.append(raw_text[prev_end:start])
        prev_end = end
    segments.append(raw_text[prev_end:])
    return " ".join(s.strip() for s in segments if s.strip())


@dataclass(frozen=True)
class QuoteSpan:
    """Character-offset range of quoted content, marks excluded."""

    start: int
    end: int
    unterminated: bool = False


@dataclass(frozen=True)
class QuoteMarkConfig:
    """Open/close mark pairs for direct-speech detection.

    A pair whose open and close marks are the same character (straight
    quotes) is only legal when ``symmetric_alternation`` is set; such marks
    are then paired by alternation.
    """

    pairs: tuple[tuple[str, str], ...]
    symmetric_alternation: bool = True

    def __post_init__(self):
        if not self.pairs:
            raise ConfigError("quote mark config needs at least one open/close pair")
        for opener, closer in self.pairs:
            if not opener or not closer:
                raise ConfigError("quote marks must be non-empty strings")
            if opener == closer and not self.symmetric_alternation:
                raise ConfigError(
                    f"symmetric mark {opener!r} requires symmetric_alternation"
                )


DEFAULT_QUOTE_MARKS = QuoteMarkConfig(pairs=(("\u201c", "\u201d"), ('"', '"')))

_PARAGRAPH_BREAK = re.compile(r"\n[ \t]*\n")


def detect_quotes(
    raw_text: str, config: QuoteMarkConfig = DEFAULT_QUOTE_MARKS
) -> list[QuoteSpan]:
    """Find direct-speech spans between matched quote marks.

    Returns maximal non-nested content spans in document order.  An open
    mark with no matching close yields a span running to the end of the
    paragraph (next blank line) flagged ``unterminated``.
    """
    spans: list[QuoteSpan] = []
    pos = 0
    n = len(raw_text)
    while pos < n:
        best: tuple[int, str, str] | None = None
        for opener, closer in config.pairs:
            idx = raw_text.find(opener, pos)
            if idx != -1 and (best is None or idx < best[0]):
                best = (idx, opener, closer)
        if best is None:
            break
        open_idx, opener, closer = best
        content_start = open_idx + len(opener)
        close_idx = raw_text.find(closer, content_start)
        if close_idx == -1:
            m = _PARAGRAPH_BREAK.search(raw_text, content_start)
            end = m.start() if m else n
            spans.append(QuoteSpan(content_start, end, unterminated=True))
            pos = end
        else:
            spans.append(QuoteSpan(content_start, close_idx))
            pos = close_idx + len(closer)
    return spans


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _sanitize_id(name: str) -> str:
    return _WS_RUN.sub("_", name.strip())


def _parse_cell_list(cell: str) -> list[str] | None:
    """Parse a list-literal table cell ("['a', 'b']"); None when not one."""
    text = cell.strip()
    if not text.startswith("["):
        return None
    try:
        value = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return None
    if isinstance(value, list) and all(isinstance(v, str) for v in value):
        return value
    return None


def _read_table(path: Path) -> list[dict[str, str]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise IngestError(f"empty table: {path}")
            return list(reader)
    except OSError as exc:
        raise IngestError(f"cannot read corpus file {path}: {exc}") from exc
    except csv.Error as exc:
        raise IngestError(f"malformed CSV in {path}: {exc}") from exc


def _require_columns(rows: list[dict[str, str]], cols: Iterable[str], path: Path) -> None:
    if not rows:
        return
    missing = [c for c in cols if c not in rows[0]]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing} (present: {sorted(rows[0])})")


def _read_meta(path: Path) -> dict[str, str]:
    meta: dict[str, str] = {}
    try:
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, value = line.partition("=")
            meta[key.strip().lower()] = value.strip()
    except OSError as exc:
        raise IngestError(f"cannot read meta file {path}: {exc}") from exc
    return meta


def _build_alias_map(characters: Sequence[Character]) -> dict[str, str]:
    """Alias string -> character_id.  Ambiguous aliases are dropped with a
    warning; main names always resolve."""
    claimed: dict[str, list[str]] = {}
    for char in characters:
        for alias in char.aliases:
            claimed.setdefault(alias, []).append(char.character_id)
    alias_map: dict[str, str] = {}
    for alias, owners in claimed.items():
        if len(owners) == 1:
            alias_map[alias] = owners[0]
        else:
            log.warning("alias %r is ambiguous between %s; dropped from resolution", alias, owners)
    for char in characters:  # main names win over colliding aliases
        alias_map[char.main_name] = char.character_id
    return alias_map


def load_novel(
    novel_dir: str | Path,
    schema: IngestSchema,
    thresholds: RoleThresholds = DEFAULT_THRESHOLDS,
    report: IngestReport | None = None,
) -> Novel:
    """Load one novel directory into a validated, ordered Novel."""
    novel_dir = Path(novel_dir)
    novel_id = _sanitize_id(novel_dir.name)
    quote_path = novel_dir / schema.quote_file
    char_path = novel_dir / schema.character_file
    if not quote_path.is_file():
        raise IngestError(f"missing quotation table: {quote_path}")
    if not char_path.is_file():
        raise IngestError(f"missing character table: {char_path}")

    char_rows = _read_table(char_path)
    _require_columns(char_rows, [schema.name_col], char_path)
    quote_rows = _read_table(quote_path)
    quote_cols = [
        schema.quote_id_col,
        schema.chapter_col,
        schema.text_col,
        schema.type_col,
        schema.speaker_col,
    ]
    if schema.text_encoding == "plain" and schema.incise_spans_col:
        quote_cols.append(schema.incise_spans_col)
    _require_columns(quote_rows, quote_cols, quote_path)

    problems: list[str] = []

    # Characters and alias resolution.
    proto_chars: list[tuple[str, frozenset[str]]] = []
    seen_ids: dict[str, str] = {}
    for row in char_rows:
        main_name = row[schema.name_col].strip()
        if not main_name:
            problems.append(f"{char_path}: character row with empty name")
            continue
        aliases = {main_name}
        if schema.aliases_col and row.get(schema.aliases_col, "").strip():
            cell = row[schema.aliases_col]
            listed = _parse_cell_list(cell)
            if listed is None:
                listed = cell.split(schema.alias_separator)
            aliases.update(a.strip() for a in listed if a.strip())
        char_id = _sanitize_id(main_name)
        if char_id in seen_ids:
            problems.append(
                f"{char_path}: characters {seen_ids[char_id]!r} and {main_name!r} "
                f"collide on id {char_id!r}"
            )
            continue
        seen_ids[char_id] = main_name
        proto_chars.append((main_name, frozenset(aliases)))

    placeholder = [
        Character(_sanitize_id(name), novel_id, name, aliases, Role.MINOR, 0)
        for name, aliases in proto_chars
    ]
    alias_map = _build_alias_map(placeholder)

    # Quotes.
    parsed: list[tuple[int, str, str, str, ReferentType, str]] = []
    seen_quote_ids: set[str] = set()
    unresolved: list[str] = []
    for lineno, row in enumerate(quote_rows, start=2):
        quote_id = row[schema.quote_id_col].strip()
        if not quote_id:
            problems.append(f"{quote_path}:{lineno}: empty quote id")
            continue
        if _WS_RUN.search(quote_id):
            problems.append(f"{quote_path}:{lineno}: quote id {quote_id!r} contains whitespace")
            continue
        if quote_id in seen_quote_ids:
            problems.append(f"{quote_path}:{lineno}: duplicate quote id {quote_id!r}")
            continue
        seen_quote_ids.add(quote_id)

        try:
            chapter = int(row[schema.chapter_col].strip())
        except ValueError:
            problems.append(
                f"{quote_path}:{lineno}: chapter {row[schema.chapter_col]!r} is not an integer"
            )
            continue
        if chapter < 0:
            problems.append(f"{quote_path}:{lineno}: negative chapter index {chapter}")
            continue

        raw_cell = row[schema.text_col]
        if schema.text_encoding == "segments":
            segments = _parse_cell_list(raw_cell)
            if segments is None:
                segments = [raw_cell]
            clean = " ".join(s.strip() for s in segments if s.strip())
            raw = clean
        else:
            raw = raw_cell
            spans: list[tuple[int, int]] = []
            if schema.incise_spans_col:
                cell = row.get(schema.incise_spans_col, "").strip()
                if cell:
                    try:
                        loaded = json.loads(cell)
                        spans = [(int(s), int(e)) for s, e in loaded]
                    except (ValueError, TypeError) as exc:
                        problems.append(
                            f"{quote_path}:{lineno}: bad incise spans {cell!r}: {exc}"
                        )
                        continue
            try:
                clean = strip_incise(raw, spans)
            except ValidationError as exc:
                problems.append(f"{quote_path}:{lineno}: {exc}")
                continue
        if not clean:
            log.info("%s: quote %s is empty after cleaning; excluded", novel_id, quote_id)
            if report is not None:
                report.exclude(novel_id, quote_id, "empty_after_cleaning")
            continue

        type_label = row[schema.type_col].strip()
        if type_label not in schema.type_labels:
            problems.append(
                f"{quote_path}:{lineno}: unknown quote type label {type_label!r} "
                f"(schema knows {sorted(schema.type_labels)})"
            )
            continue
        referent = schema.type_labels[type_label]

        speaker_cell = row[schema.speaker_col].strip()
        if schema.speaker_separator and schema.speaker_separator in speaker_cell:
            log.info("%s: quote %s has multiple speakers; excluded", novel_id, quote_id)
            if report is not None:
                report.exclude(novel_id, quote_id, "multiple_speakers")
            continue
        speaker_id = alias_map.get(speaker_cell)
        if speaker_id is None:
            unresolved.append(quote_id)
            continue

        parsed.append((chapter, quote_id, raw, clean, referent, speaker_id))

    if problems:
        raise ValidationError(
            f"novel {novel_id}: {len(problems)} invalid rows:\n  " + "\n  ".join(problems)
        )
    if unresolved:
        raise ValidationError(
            f"novel {novel_id}: unresolvable speakers for quote_ids {unresolved}"
        )

    # Reading order: chapters ascending, table order within a chapter.
    parsed.sort(key=lambda item: item[0])
    quotes = tuple(
        Quote(
            quote_id=quote_id,
            novel_id=novel_id,
            chapter_index=chapter,
            ordinal=ordinal,
            raw_text=raw,
            clean_text=clean,
            referent_type=referent,
            speaker_id=speaker_id,
        )
        for ordinal, (chapter, quote_id, raw, clean, referent, speaker_id) in enumerate(parsed)
    )

    counts: dict[str, int] = {}
    for q in quotes:
        counts[q.speaker_id] = counts.get(q.speaker_id, 0) + 1
    characters = tuple(
        Character(
            character_id=_sanitize_id(name),
            novel_id=novel_id,
            main_name=name,
            aliases=aliases,
            role=thresholds.classify(counts.get(_sanitize_id(name), 0)),
            quote_count=counts.get(_sanitize_id(name), 0),
        )
        for name, aliases in proto_chars
    )

    meta = _read_meta(novel_dir / schema.meta_file) if schema.meta_file and (
        novel_dir / schema.meta_file
    ).is_file() else {}
    max_chapter = max((q.chapter_index for q in quotes), default=-1)
    chapter_count = max_chapter + 1
    if "chapters" in meta:
        declared = int(meta["chapters"])
        if declared < chapter_count:
            raise ValidationError(
                f"novel {novel_id}: meta declares {declared} chapters but quotes "
                f"reach chapter index {max_chapter}"
            )
        chapter_count = declared
    chapter_count = max(chapter_count, 1)

    return Novel(
        novel_id=novel_id,
        title=meta.get("title", novel_dir.name),
        author=meta.get("author", "unknown"),
        chapter_count=chapter_count,
        characters=characters,
        quotes=quotes,
    )


def load_corpus(
    root_path: str | Path,
    schema: IngestSchema,
    thresholds: RoleThresholds = DEFAULT_THRESHOLDS,
    parallelism: int = 1,
    report: IngestReport | None = None,
) -> Corpus:
    """Load every novel directory under ``root_path``.

    Novel directories are those containing the schema's quotation table.
    Loading is per-novel independent and runs on a thread pool when
    ``parallelism`` > 1; the resulting Corpus is immutable.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise IngestError(f"corpus root is not a directory: {root}")
    novel_dirs = sorted(
        d for d in root.iterdir() if d.is_dir() and (d / schema.quote_file).is_file()
    )
    if not novel_dirs:
        raise IngestError(
            f"no novel directories under {root} (looked for subdirectories "
            f"containing {schema.quote_file}); zero novels loaded"
        )

    def _one(d: Path) -> Novel:
        return load_novel(d, schema, thresholds, report)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            novels = list(pool.map(_one, novel_dirs))
    else:
        novels = [_one(d) for d in novel_dirs]
    novels.sort(key=lambda n: n.novel_id)
    ids = [n.novel_id for n in novels]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate novel ids after sanitization: {dupes}")
    return Corpus(
        novels=tuple(novels),
        provenance=Provenance(source_path=str(root), schema_version=schema.version),
    )


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


def filter_speakers(novel: Novel, min_role: Role) -> Novel:
    """View of a novel keeping only characters with role >= min_role and
    their quotes.  The original novel is unmodified; quote ordinals keep
    their corpus values."""
    kept = tuple(c for c in novel.characters if c.role >= min_role)
    kept_ids = {c.character_id for c in kept}
    return replace(
        novel,
        characters=kept,
        quotes=tuple(q for q in novel.quotes if q.speaker_id in kept_ids),
    )


def filter_corpus(corpus: Corpus, min_role: Role) -> Corpus:
    return replace(corpus, novels=tuple(filter_speakers(n, min_role) for n in corpus.novels))


# ---------------------------------------------------------------------------
# Normalized dump (line-delimited interchange with the encoder sidecar)
# ---------------------------------------------------------------------------

_DUMP_FIELDS = 7


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")
    )


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def write_dump(corpus: Corpus, path: str | Path) -> int:
    """Write the normalized one-quote-per-line dump; returns quote count.

    Fields, tab-separated: quote_id, novel_id, chapter_index, ordinal,
    referent_type, speaker_id, clean_text (tabs/newlines escaped).
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for novel in sorted(corpus.novels, key=lambda n: n.novel_id):
            for q in sorted(novel.quotes, key=lambda q: q.ordinal):
                fh.write(
                    "\t".join(
                        (
                            q.quote_id,
                            q.novel_id,
                            str(q.chapter_index),
                            str(q.ordinal),
                            q.referent_type.value,
                            q.speaker_id,
                            _escape(q.clean_text),
                        )
                    )
                    + "\n"
                )
                count += 1
    return count


def read_dump(path: str | Path) -> tuple[Quote, ...]:
    """Read a dump back into Quote records (raw_text == clean_text)."""
    quotes: list[Quote] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read dump {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != _DUMP_FIELDS:
            raise ValidationError(
                f"{path}:{lineno}: expected {_DUMP_FIELDS} tab-separated fields, got {len(parts)}"
            )
        quote_id, novel_id, chapter_s, ordinal_s, type_s, speaker_id, text = parts
        try:
            chapter = int(chapter_s)
            ordinal = int(ordinal_s)
            referent = ReferentType(type_s)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
        clean = _unescape(text)
        quotes.append(
            Quote(quote_id, novel_id, chapter, ordinal, clean, clean, referent, speaker_id)
        )
    return tuple(quotes)
