"""Shared test utilities: a synthetic corpus generator whose characters
speak from disjoint vocabularies (so voice separation is knowable by
construction) and a speaker-label shuffler for permutation-null controls."""

from __future__ import annotations

import csv
from dataclasses import replace
from pathlib import Path

import numpy as np

from charvoice import Corpus

FIXTURES = Path(__file__).parent / "fixtures"

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = tuple(c + v for c in _CONSONANTS for v in _VOWELS)
_TYPE_LABELS = ("Explicit", "Anaphoric", "Implicit")


def _character_words(char_index: int, rng: np.random.Generator) -> list[str]:
    """Twenty pseudo-words built only from this character's private
    syllable slice, so vocabularies never overlap within a novel."""
    per_char = len(_SYLLABLES) // 5
    own = _SYLLABLES[char_index * per_char : (char_index + 1) * per_char]
    words = []
    for _ in range(20):
        length = int(rng.integers(2, 4))
        words.append("".join(rng.choice(own) for _ in range(length)))
    return words


def make_voice_corpus(
    root: Path,
    n_novels: int = 4,
    n_chars: int = 5,
    n_chapters: int = 6,
    per_cell: int = 8,
    p_explicit: float = 0.6,
    seed: int = 11,
) -> Path:
    """Write a corpus where every character utters ``per_cell`` quotes in
    every chapter, drawn from a character-private vocabulary."""
    assert n_chars <= 5, "syllable pool is partitioned five ways"
    names = ["Person Ash", "Person Birch", "Person Cedar", "Person Dove", "Person Elm"]
    for novel_index in range(n_novels):
        novel_dir = root / f"novel_{novel_index:02d}"
        novel_dir.mkdir(parents=True)
        rows = []
        quote_id = 0
        for char_index in range(n_chars):
            rng = np.random.default_rng(seed + 1000 * novel_index + char_index)
            words = _character_words(char_index, rng)
            for chapter in range(n_chapters):
                for _ in range(per_cell):
                    length = int(rng.integers(6, 13))
                    text = " ".join(rng.choice(words) for _ in range(length)) + "."
                    label = (
                        "Explicit"
                        if rng.random() < p_explicit
                        else _TYPE_LABELS[1 + int(rng.integers(0, 2))]
                    )
                    rows.append(
                        (
                            f"q{novel_index:02d}_{quote_id:05d}",
                            chapter, f"['{text}']", label, names[char_index],
                        )
                    )
                    quote_id += 1
        with open(novel_dir / "quotation_info.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("quoteID", "chapter", "quoteText", "quoteType", "speaker"))
            writer.writerows(rows)
        with open(novel_dir / "character_info.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("Main Name", "Aliases"))
            for name in names[:n_chars]:
                writer.writerow((name, "[]"))
        (novel_dir / "meta.txt").write_text(
            f"title = Novel {novel_index}\nauthor = Generator\nchapters = {n_chapters}\n",
            encoding="utf-8",
        )
    return root


def shuffle_speakers(corpus: Corpus, seed: int) -> Corpus:
    """Permute speaker labels across each novel's quotes.

    The label multiset is preserved, so per-character quote counts and
    roles are unchanged; only the pairing of text to speaker is destroyed.
    """
    rng = np.random.default_rng(seed)
    novels = []
    for novel in corpus.novels:
        labels = [q.speaker_id for q in novel.quotes]
        order = rng.permutation(len(labels))
        shuffled = tuple(
            replace(q, speaker_id=labels[order[i]]) for i, q in enumerate(novel.quotes)
        )
        novels.append(replace(novel, quotes=shuffled))
    return replace(corpus, novels=tuple(novels))
