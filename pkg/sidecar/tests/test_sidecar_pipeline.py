"""End-to-end loop across the package boundary: charvoice ingest/stats
produce the dump and manifest, quotevec encodes both record kinds with
tiny checkpoints, and charvoice run consumes the interchange files."""

from __future__ import annotations

from charvoice import import_embeddings

from sidecar_fixtures import (
    charvoice_main,
    make_word_corpus,
    encode_with_quotevec,
    read_macro,
    run_charvoice_external,
)

ROLE_ARGS = ("--intermediate-min", "3", "--major-min", "8", "--min-q", "2")


class TestFullLoop:
    def test_dump_to_evaluation_report(self, tmp_path, word_corpus, tiny_bert, tiny_setmodel):
        out = tmp_path / "artifacts"
        assert charvoice_main(
            ["ingest", "--corpus", word_corpus, "--output-dir", out, *ROLE_ARGS]
        ) == 0
        dump = out / "dump.tsv"
        assert len(dump.read_text(encoding="utf-8").splitlines()) == 48

        assert charvoice_main(
            ["stats", "--corpus", word_corpus, "--output-dir", out, *ROLE_ARGS]
        ) == 0
        manifest = out / "manifest.tsv"
        manifest_entries = len(manifest.read_text(encoding="utf-8").splitlines())
        assert manifest_entries > 0

        sem_quotes = encode_with_quotevec(
            tmp_path, "Semantic", tiny_bert, dump, "tinysem"
        )
        set_quotes = encode_with_quotevec(
            tmp_path, "SetAV", tiny_setmodel, dump, "tinyset"
        )
        set_sets = encode_with_quotevec(
            tmp_path, "SetAV", tiny_setmodel, dump, "tinyset", manifest=manifest
        )
        assert len(import_embeddings(sem_quotes).quotes) == 48
        assert len(import_embeddings(set_quotes).quotes) == 48
        assert len(import_embeddings(set_sets).sets) == manifest_entries

        sem_run = run_charvoice_external(
            tmp_path, word_corpus, "tinysem", sem_quotes, role_args=ROLE_ARGS
        )
        set_run = run_charvoice_external(
            tmp_path, word_corpus, "tinyset", set_quotes, sets_file=set_sets,
            role_args=ROLE_ARGS,
        )
        for run_dir, tag in ((sem_run, "tinysem"), (set_run, "tinyset")):
            report = run_dir / f"report_{tag}.csv"
            cc = read_macro(report, "cc")
            cq = read_macro(report, "cq")
            assert 0.0 <= cc <= 1.0
            assert 0.0 <= cq <= 1.0

    def test_set_vectors_change_the_character_ranking(self, tmp_path, tiny_bert):
        """The sets file must actually reach the evaluation: supplying
        set vectors pooled differently from the quote vectors moves the
        character-level scores."""
        corpus = make_word_corpus(tmp_path / "corpus", overlap=True)
        out = tmp_path / "artifacts"
        assert charvoice_main(
            ["ingest", "--corpus", corpus, "--output-dir", out, *ROLE_ARGS]
        ) == 0
        assert charvoice_main(
            ["stats", "--corpus", corpus, "--output-dir", out, *ROLE_ARGS]
        ) == 0
        dump, manifest = out / "dump.tsv", out / "manifest.tsv"

        quotes = encode_with_quotevec(tmp_path, "Semantic", tiny_bert, dump, "mix")
        foreign_sets = encode_with_quotevec(
            tmp_path, "Semantic", tiny_bert, dump, "mix", manifest=manifest,
            extra_args=("--pooling", "first_token"),
        )
        plain = run_charvoice_external(
            tmp_path / "plain", corpus, "mix", quotes, role_args=ROLE_ARGS
        )
        overridden = run_charvoice_external(
            tmp_path / "overridden", corpus, "mix", quotes,
            sets_file=foreign_sets, role_args=ROLE_ARGS,
        )
        plain_cc = read_macro(plain / "report_mix.csv", "cc")
        overridden_cc = read_macro(overridden / "report_mix.csv", "cc")
        assert plain_cc != overridden_cc
