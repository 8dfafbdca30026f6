"""Shared test data and builders: a fixed dump/manifest pair, tiny
self-contained model checkpoints (no network), and a small on-disk
speaker-annotated corpus whose texts use the checkpoints' vocabulary."""

from __future__ import annotations

import csv
import importlib
import sys
from pathlib import Path

import numpy as np

WORDS = (
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
    "india", "juliet", "kilo", "lima", "mike", "november", "oscar", "papa",
    "quebec", "romeo", "sierra", "tango", "uniform", "victor", "whiskey",
    "xray", "yankee", "zulu",
)

# quote_id, novel_id, chapter_index, ordinal, referent_type, speaker_id, text
DUMP_ROWS = (
    ("d01", "ashmoor", 0, 0, "explicit", "Ann_Prior", "alpha bravo charlie delta"),
    ("d02", "ashmoor", 0, 1, "anaphoric", "Ann_Prior", "echo foxtrot golf"),
    ("d03", "ashmoor", 1, 2, "explicit", "Ann_Prior", "hotel india juliet"),
    ("d04", "ashmoor", 1, 3, "implicit", "Ann_Prior", "kilo lima"),
    ("d05", "ashmoor", 0, 4, "explicit", "Bram_Holt", "mike november oscar"),
    ("d06", "ashmoor", 0, 5, "anaphoric", "Bram_Holt", "papa quebec"),
    ("d07", "ashmoor", 1, 6, "explicit", "Bram_Holt", "romeo sierra tango"),
    ("d08", "ashmoor", 1, 7, "explicit", "Bram_Holt", "uniform victor"),
    ("d09", "briarfield", 0, 0, "explicit", "Cora_Venn", "whiskey xray yankee"),
    ("d10", "briarfield", 0, 1, "anaphoric", "Cora_Venn", "zulu alpha"),
    ("d11", "briarfield", 1, 2, "explicit", "Cora_Venn", "bravo charlie delta echo"),
    ("d12", "briarfield", 1, 3, "explicit", "Cora_Venn", "foxtrot golf hotel india"),
)

MANIFEST_ENTRIES = (
    ("ashmoor", "Ann_Prior", "chapterwise:chapter=0:side=q", "d01,d02"),
    ("ashmoor", "Ann_Prior", "chapterwise:chapter=0:side=t", "d03,d04"),
    ("ashmoor", "Bram_Holt", "chapterwise:chapter=0:side=q", "d05,d06"),
    ("briarfield", "Cora_Venn", "readingorder:n=4:side=q", "d09,d10,d11,d12"),
)


def escape_text(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def write_dump(path: Path, rows=DUMP_ROWS) -> Path:
    lines = [
        "\t".join((q, n, str(c), str(o), r, s, escape_text(t)))
        for q, n, c, o, r, s, t in rows
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_manifest(path: Path, entries=MANIFEST_ENTRIES) -> Path:
    lines = ["\t".join(entry) for entry in entries]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Tiny local checkpoints
# ---------------------------------------------------------------------------

def _write_vocab(path: Path) -> int:
    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", *WORDS, "a"]
    path.write_text("\n".join(tokens) + "\n", encoding="utf-8")
    return len(tokens)


def quiet_transformers() -> None:
    import transformers

    transformers.utils.logging.set_verbosity_error()
    transformers.utils.logging.disable_progress_bar()


def build_tiny_bert(ckpt: Path) -> str:
    """A 2-layer, 16-dim BERT checkpoint over the WORDS vocabulary."""
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    quiet_transformers()
    vocab_size = _write_vocab(ckpt / "vocab.txt")
    config = BertConfig(
        vocab_size=vocab_size,
        hidden_size=16,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=96,
    )
    torch.manual_seed(7)
    BertModel(config).save_pretrained(ckpt)
    BertTokenizer(str(ckpt / "vocab.txt")).save_pretrained(ckpt)
    return str(ckpt)


_SET_CONFIG_SRC = '''\
from transformers import PretrainedConfig


class TinyLuarConfig(PretrainedConfig):
    model_type = "luar"

    def __init__(self, vocab_size=64, embed_dim=16, out_dim=12, **kwargs):
        self.vocab_size = vocab_size
        self.embed_dim = embed_dim
        self.out_dim = out_dim
        super().__init__(**kwargs)
'''

_SET_MODEL_SRC = '''\
import torch
from torch import nn
from transformers import PreTrainedModel

try:
    from .configuration_tiny_luar import TinyLuarConfig
except ImportError:  # direct import while the checkpoint is being built
    from configuration_tiny_luar import TinyLuarConfig


class TinyLuarModel(PreTrainedModel):
    config_class = TinyLuarConfig

    def __init__(self, config):
        super().__init__(config)
        self.embed = nn.Embedding(config.vocab_size, config.embed_dim)
        self.proj = nn.Linear(config.embed_dim, config.out_dim)
        self.post_init()

    def forward(self, input_ids=None, attention_mask=None):
        if input_ids.dim() != 3:
            raise ValueError("episode input must be [batch, episode, tokens]")
        hidden = self.embed(input_ids)
        mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
        token_mean = (hidden * mask).sum(dim=2) / mask.sum(dim=2).clamp(min=1.0)
        return (self.proj(token_mean.mean(dim=1)),)
'''


def build_tiny_setmodel(ckpt: Path) -> str:
    """A local trust_remote_code checkpoint whose forward consumes whole
    quote collections as [batch, episode, tokens], mimicking the set-
    verification architecture (model_type ``luar``, output dim 12)."""
    import torch
    from transformers import BertTokenizer

    quiet_transformers()
    vocab_size = _write_vocab(ckpt / "vocab.txt")
    (ckpt / "configuration_tiny_luar.py").write_text(_SET_CONFIG_SRC, encoding="utf-8")
    (ckpt / "modeling_tiny_luar.py").write_text(_SET_MODEL_SRC, encoding="utf-8")
    sys.path.insert(0, str(ckpt))
    try:
        config_mod = importlib.import_module("configuration_tiny_luar")
        model_mod = importlib.import_module("modeling_tiny_luar")
    finally:
        sys.path.remove(str(ckpt))
    config = config_mod.TinyLuarConfig(vocab_size=vocab_size)
    config.auto_map = {
        "AutoConfig": "configuration_tiny_luar.TinyLuarConfig",
        "AutoModel": "modeling_tiny_luar.TinyLuarModel",
    }
    config.architectures = ["TinyLuarModel"]
    torch.manual_seed(9)
    model_mod.TinyLuarModel(config).save_pretrained(ckpt)
    BertTokenizer(str(ckpt / "vocab.txt")).save_pretrained(ckpt)
    return str(ckpt)


# ---------------------------------------------------------------------------
# Driving the consumer CLI and reading its artifacts
# ---------------------------------------------------------------------------

def charvoice_main(args) -> int:
    from charvoice import cli

    return cli.main([str(a) for a in args])


def quotevec_main(args) -> int:
    from quotevec import cli

    return cli.main([str(a) for a in args])


def interchange_dim(path: Path) -> int:
    header = Path(path).read_text(encoding="utf-8").splitlines()[0]
    fields = dict(part.split("=", 1) for part in header.lstrip("#").split(" "))
    return int(fields["dim"])


def read_macro(report_path: Path, kind: str) -> float:
    with open(report_path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if row and row[0] == "macro" and row[1] == kind:
                return float(row[6])
    raise AssertionError(f"no macro {kind} row in {report_path}")


def read_curve(curve_path: Path) -> dict[int, float | None]:
    lines = Path(curve_path).read_text(encoding="utf-8").splitlines()[1:]
    points: dict[int, float | None] = {}
    for line in lines:
        n, cc, _cq = line.split("\t")
        points[int(n)] = None if cc == "NA" else float(cc)
    return points


def encode_with_quotevec(work: Path, model: str, checkpoint: str, dump: Path,
                         encoder_id: str, manifest: Path | None = None,
                         extra_args=()) -> Path:
    suffix = "sets" if manifest is not None else "quotes"
    out = work / f"{encoder_id}_{suffix}.emb"
    args = ["encode", "--model", model, "--checkpoint", checkpoint,
            "--input", dump, "--out", out, "--encoder-id", encoder_id, *extra_args]
    if manifest is not None:
        args += ["--manifest", manifest]
    rc = quotevec_main(args)
    assert rc == 0, f"quotevec encode failed for {encoder_id} ({suffix})"
    return out


def run_charvoice_external(work: Path, corpus_root: Path, encoder_id: str,
                           quotes_file: Path, sets_file: Path | None = None,
                           extra_args=(), role_args=()) -> Path:
    """Run the consumer's evaluation with an external encoder section;
    returns the artifact directory."""
    out = work / f"run_{encoder_id}"
    out.mkdir(parents=True, exist_ok=True)
    config = out / "run.ini"
    section = (
        f"[encoder:{encoder_id}]\nkind = external\n"
        f"path = {quotes_file}\ndim = {interchange_dim(quotes_file)}\n"
    )
    if sets_file is not None:
        section += f"sets = {sets_file}\n"
    config.write_text(section, encoding="utf-8")
    rc = charvoice_main(
        ["run", "--config", config, "--corpus", corpus_root, "--output-dir", out,
         *role_args, *extra_args]
    )
    assert rc == 0, f"charvoice run failed for {encoder_id}"
    return out


# ---------------------------------------------------------------------------
# A small speaker-annotated corpus whose texts use the WORDS vocabulary
# ---------------------------------------------------------------------------

def make_word_corpus(root: Path, n_novels: int = 2, n_chapters: int = 2,
                     per_cell: int = 4, overlap: bool = False) -> Path:
    """Three characters per novel speaking from slices of WORDS, so the
    tiny tokenizers see no unknown tokens.  Slices are private per
    character by default; ``overlap=True`` makes neighbours share words,
    which keeps ranking scores off the ceiling."""
    names = ("Speaker Ash", "Speaker Birch", "Speaker Cedar")
    for novel_index in range(n_novels):
        novel_dir = root / f"novel_{novel_index:02d}"
        novel_dir.mkdir(parents=True)
        rows = []
        quote_id = 0
        for char_index, name in enumerate(names):
            rng = np.random.default_rng(31 + 100 * novel_index + char_index)
            if overlap:
                own = WORDS[char_index * 7 : char_index * 7 + 12]
            else:
                own = WORDS[char_index * 8 : (char_index + 1) * 8]
            for chapter in range(n_chapters):
                for _ in range(per_cell):
                    text = " ".join(rng.choice(own) for _ in range(5)) + "."
                    label = "Explicit" if rng.random() < 0.7 else "Anaphoric"
                    rows.append(
                        (f"w{novel_index:02d}_{quote_id:04d}", chapter,
                         f"['{text}']", label, name)
                    )
                    quote_id += 1
        with open(novel_dir / "quotation_info.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("quoteID", "chapter", "quoteText", "quoteType", "speaker"))
            writer.writerows(rows)
        with open(novel_dir / "character_info.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("Main Name", "Aliases"))
            for name in names:
                writer.writerow((name, "[]"))
        (novel_dir / "meta.txt").write_text(
            f"title = Word Novel {novel_index}\nauthor = Generator\n"
            f"chapters = {n_chapters}\n",
            encoding="utf-8",
        )
    return root
