"""Readers for the two text interfaces this sidecar consumes, and a
writer for the one it produces.

Corpus dump (input): one quote per line, 7 tab-separated fields —
quote_id, novel_id, chapter_index, ordinal, referent_type, speaker_id,
clean_text — with backslash escapes for ``\\ \\t \\n \\r`` in the text.

Bundle manifest (input): one character subset per line, 4 tab-separated
fields — novel_id, character_id, subset_descriptor, comma-joined
quote_ids.

Embedding interchange (output): a ``#dim=<d> encoder=<id> kind=<k>``
header, optional ``#`` comment lines, then one record per line:
``q <quote_id> <floats>`` or ``s <novel_id> <character_id> <descriptor>
<floats>`` with floats rendered by ``repr`` so float32 values survive a
round trip bit-exactly.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

_DUMP_FIELDS = 7
_MANIFEST_FIELDS = 4
_ESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


@dataclass(frozen=True)
class DumpRow:
    quote_id: str
    novel_id: str
    chapter_index: int
    ordinal: int
    referent_type: str
    speaker_id: str
    text: str


@dataclass(frozen=True)
class ManifestEntry:
    novel_id: str
    character_id: str
    descriptor: str
    quote_ids: tuple[str, ...]


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            mapped = _ESCAPES.get(text[i + 1])
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def read_dump(path: str | Path) -> tuple[DumpRow, ...]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read dump {path}: {exc}") from exc
    rows: list[DumpRow] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != _DUMP_FIELDS:
            raise InputError(
                f"{path}:{lineno}: expected {_DUMP_FIELDS} tab-separated fields, "
                f"got {len(parts)}"
            )
        quote_id, novel_id, chapter, ordinal, referent_type, speaker_id, text = parts
        try:
            row = DumpRow(
                quote_id=quote_id,
                novel_id=novel_id,
                chapter_index=int(chapter),
                ordinal=int(ordinal),
                referent_type=referent_type,
                speaker_id=speaker_id,
                text=_unescape(text),
            )
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        if row.quote_id in seen:
            raise InputError(f"{path}:{lineno}: duplicate quote_id {row.quote_id!r}")
        seen.add(row.quote_id)
        rows.append(row)
    if not rows:
        raise InputError(f"{path}: dump contains no quotes")
    return tuple(rows)


def read_manifest(path: str | Path) -> tuple[ManifestEntry, ...]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    entries: list[ManifestEntry] = []
    seen: set[tuple[str, str, str]] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != _MANIFEST_FIELDS:
            raise InputError(
                f"{path}:{lineno}: expected {_MANIFEST_FIELDS} tab-separated fields, "
                f"got {len(parts)}"
            )
        novel_id, character_id, descriptor, joined = parts
        quote_ids = tuple(q for q in joined.split(",") if q)
        if not quote_ids:
            raise InputError(f"{path}:{lineno}: entry lists no quote_ids")
        key = (novel_id, character_id, descriptor)
        if key in seen:
            raise InputError(f"{path}:{lineno}: duplicate manifest entry for {key}")
        seen.add(key)
        entries.append(ManifestEntry(novel_id, character_id, descriptor, quote_ids))
    return tuple(entries)


def _format_vector(vector: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in vector)


def _check_vector(label: str, vector: np.ndarray, dim: int) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float32)
    if vector.ndim != 1 or vector.shape[0] != dim:
        raise InputError(f"{label}: vector shape {vector.shape} does not match dim={dim}")
    if not np.all(np.isfinite(vector)):
        raise InputError(f"{label}: vector contains NaN/Inf")
    return vector


def write_interchange(
    path: str | Path,
    encoder_id: str,
    dim: int,
    kind: str,
    quote_records: Iterable[tuple[str, np.ndarray]] = (),
    set_records: Iterable[tuple[tuple[str, str, str], np.ndarray]] = (),
    comments: Sequence[str] = (),
) -> int:
    """Atomically write an interchange file (temp file + rename); the
    destination never holds a partial file.  Returns the record count."""
    path = Path(path)
    if kind not in ("quote", "set", "mixed"):
        raise InputError(f"unknown interchange kind {kind!r}")
    if not encoder_id or any(c.isspace() for c in encoder_id):
        raise InputError(f"encoder id must be non-empty and whitespace-free: {encoder_id!r}")
    if dim < 1:
        raise InputError(f"dim must be >= 1, got {dim}")

    lines = [f"#dim={dim} encoder={encoder_id} kind={kind}"]
    for comment in comments:
        if "\n" in comment:
            raise InputError("header comments must be single-line")
        lines.append(f"# {comment}")
    count = 0
    for quote_id, vector in sorted(quote_records, key=lambda r: r[0]):
        if any(c.isspace() for c in quote_id):
            raise InputError(f"quote id contains whitespace: {quote_id!r}")
        vector = _check_vector(f"quote {quote_id}", vector, dim)
        lines.append(f"q {quote_id} {_format_vector(vector)}")
        count += 1
    for key, vector in sorted(set_records, key=lambda r: r[0]):
        if any(any(c.isspace() for c in field) for field in key):
            raise InputError(f"set key contains whitespace: {key!r}")
        vector = _check_vector(f"set {key}", vector, dim)
        lines.append(" ".join(("s", *key, _format_vector(vector))))
        count += 1

    fd, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return count
