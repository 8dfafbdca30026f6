"""Pretrained-transformer quote encoders for the charvoice toolkit.

Reads a charvoice corpus dump (and optionally a bundle manifest),
encodes quotes or quote sets with a registered pretrained model, and
writes the result in the embedding interchange format that
``charvoice run`` consumes through an ``external`` encoder section.
"""

from .dumpio import DumpRow, ManifestEntry, read_dump, read_manifest, write_interchange
from .encode import LoadedEncoder, encode_quotes, encode_sets, encode_texts, load_encoder
from .errors import InputError, ModelError, QuotevecError
from .models import REGISTRY, ModelId, ModelSpec, Pooling, parse_model_id, spec_for

__all__ = [
    "DumpRow",
    "ManifestEntry",
    "read_dump",
    "read_manifest",
    "write_interchange",
    "LoadedEncoder",
    "encode_quotes",
    "encode_sets",
    "encode_texts",
    "load_encoder",
    "InputError",
    "ModelError",
    "QuotevecError",
    "REGISTRY",
    "ModelId",
    "ModelSpec",
    "Pooling",
    "parse_model_id",
    "spec_for",
]
