"""quotevec command-line interface.

    quotevec encode --model Semantic --input corpus_dump.tsv --out quotes.emb
    quotevec encode --model SetAV --input corpus_dump.tsv \
        --manifest manifest.tsv --out sets.emb

Without ``--manifest`` every dump row is encoded to a quote record;
with it every manifest entry is encoded to a set record.  Output files
are written atomically, so a failed run never leaves a partial file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import dumpio, encode
from .errors import QuotevecError
from .models import Pooling, parse_model_id, spec_for


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quotevec")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode a corpus dump with a pretrained model")
    enc.add_argument("--model", required=True, help="Semantic, StyleAV, SetAV, or Emotion")
    enc.add_argument("--input", required=True, help="corpus dump (tab-separated)")
    enc.add_argument("--out", required=True, help="embedding interchange file to write")
    enc.add_argument("--manifest", help="bundle manifest; switches to set encoding")
    enc.add_argument("--checkpoint", help="override the registered checkpoint path")
    enc.add_argument("--max-tokens", type=int, default=None, help="truncation length (default 64)")
    enc.add_argument(
        "--pooling",
        choices=[p.value for p in Pooling],
        default=None,
        help="native (default), token_mean, or first_token",
    )
    enc.add_argument("--batch-size", type=int, default=None)
    enc.add_argument("--encoder-id", help="encoder id for the header (default: the model id)")
    enc.add_argument("--device", help="torch device (default: cuda if available, else cpu)")
    return parser


def cmd_encode(args: argparse.Namespace) -> int:
    model_id = parse_model_id(args.model)
    pooling = Pooling(args.pooling) if args.pooling else None
    spec = spec_for(
        model_id,
        checkpoint=args.checkpoint,
        max_tokens=args.max_tokens,
        pooling=pooling,
        batch_size=args.batch_size,
    )
    rows = dumpio.read_dump(Path(args.input))
    entries = dumpio.read_manifest(Path(args.manifest)) if args.manifest else None

    encoder = encode.load_encoder(spec, device=args.device)
    encoder_id = args.encoder_id or model_id.value
    out_path = Path(args.out)
    comments = encode.header_comments(encoder, set_mode=entries is not None)

    if entries is None:
        records = encode.encode_quotes(rows, encoder)
        count = dumpio.write_interchange(
            out_path, encoder_id, encoder.dim, "quote",
            quote_records=records, comments=comments,
        )
    else:
        records = encode.encode_sets(rows, entries, encoder)
        count = dumpio.write_interchange(
            out_path, encoder_id, encoder.dim, "set",
            set_records=records, comments=comments,
        )
    kind = "set" if entries is not None else "quote"
    print(f"wrote {count} {kind} records (dim={encoder.dim}) to {out_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return cmd_encode(args)
    except QuotevecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
