"""Character voice distinguishability experiments over speaker-annotated
novel corpora.

The pipeline: ingest a corpus of novels with quote-level speaker
annotations (`corpus`), turn quotes into vectors (`encoders`), pool them
into per-character query and target representations under one of three
subset strategies (`representation`), and score how well queries retrieve
their own character by cosine ranking AUC (`evaluation`).  The `cli`
module wires the stages behind one declarative run configuration.
"""

from .corpus import (
    Character,
    Corpus,
    IngestReport,
    IngestSchema,
    Novel,
    Provenance,
    Quote,
    QuoteMarkConfig,
    QuoteSpan,
    ReferentType,
    Role,
    RoleThresholds,
    detect_quotes,
    filter_corpus,
    filter_speakers,
    load_corpus,
    load_novel,
    read_dump,
    strip_incise,
    write_dump,
)
from .encoders import (
    DEFAULT_DIM,
    DEFAULT_FUNCTION_WORDS,
    EncoderKind,
    EncoderSpec,
    ImportedEmbeddings,
    QuoteEmbedding,
    SetEmbedding,
    char_ngram_spec,
    count_char_ngrams,
    encode_char_ngram,
    encode_function_words,
    encode_quotes,
    encode_text,
    encode_token_unigram,
    function_word_spec,
    import_embeddings,
    token_unigram_spec,
    tokenize,
    write_embeddings,
)
from .errors import (
    CharvoiceError,
    ConfigError,
    IngestError,
    QuerySkipped,
    ValidationError,
)
from .evaluation import (
    AucReport,
    CurvePoint,
    ExperimentResult,
    MacroAggregate,
    NovelAggregate,
    PerQueryAuc,
    RankedScores,
    RoleAggregate,
    SkippedQuery,
    aggregate,
    auc_cc,
    auc_cq,
    build_bundles,
    cosine,
    evaluate_bundle,
    mann_whitney_auc,
    reading_order_curve,
    run_experiment,
    zero_vector_warnings,
)
from .representation import (
    CharacterEmbedding,
    QueryTargetBundle,
    Strategy,
    SubsetSpec,
    attach_set_embeddings,
    build_chapterwise,
    build_explicit,
    build_reading_order,
    first_half_chapters,
    pool_mean,
    read_manifest,
    write_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "AucReport",
    "Character",
    "CharacterEmbedding",
    "CharvoiceError",
    "ConfigError",
    "Corpus",
    "CurvePoint",
    "DEFAULT_DIM",
    "DEFAULT_FUNCTION_WORDS",
    "EncoderKind",
    "EncoderSpec",
    "ExperimentResult",
    "ImportedEmbeddings",
    "IngestError",
    "IngestReport",
    "IngestSchema",
    "MacroAggregate",
    "Novel",
    "NovelAggregate",
    "PerQueryAuc",
    "Provenance",
    "QueryTargetBundle",
    "QuerySkipped",
    "Quote",
    "QuoteEmbedding",
    "QuoteMarkConfig",
    "QuoteSpan",
    "RankedScores",
    "ReferentType",
    "Role",
    "RoleAggregate",
    "RoleThresholds",
    "SetEmbedding",
    "SkippedQuery",
    "Strategy",
    "SubsetSpec",
    "ValidationError",
    "aggregate",
    "attach_set_embeddings",
    "auc_cc",
    "auc_cq",
    "build_bundles",
    "build_chapterwise",
    "build_explicit",
    "build_reading_order",
    "char_ngram_spec",
    "cosine",
    "count_char_ngrams",
    "detect_quotes",
    "encode_char_ngram",
    "encode_function_words",
    "encode_quotes",
    "encode_text",
    "encode_token_unigram",
    "evaluate_bundle",
    "filter_corpus",
    "filter_speakers",
    "first_half_chapters",
    "function_word_spec",
    "import_embeddings",
    "load_corpus",
    "load_novel",
    "mann_whitney_auc",
    "pool_mean",
    "read_dump",
    "read_manifest",
    "reading_order_curve",
    "run_experiment",
    "strip_incise",
    "token_unigram_spec",
    "tokenize",
    "write_dump",
    "write_embeddings",
    "write_manifest",
    "zero_vector_warnings",
]
