"""modelkit command line: train/export the twin LSTM, build sentence
caches, serve the /embed sidecar, and run the pipeline sanity check."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .cache import export_sentence_cache, read_corpus_questions
from .sanity import main_qqp_sanity
from .siamese_train import TrainingRun, train_siamese


@click.group()
def cli() -> None:
    """Offline toolkit for the qqmatch engine."""


@cli.command("train-siamese")
@click.argument("base_pairs", type=click.Path(exists=True))
@click.option("--domain-pairs", type=click.Path(exists=True), default=None,
              help="Domain TSV for the fine-tuning phase.")
@click.option("--out-dir", type=click.Path(), default="artifacts", show_default=True)
@click.option("--epochs", type=int, default=5, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--seq-len", type=int, default=144, show_default=True)
@click.option("--embed-dim", type=int, default=300, show_default=True)
@click.option("--hidden-dim", type=int, default=75, show_default=True)
@click.option("--vocab-cap", type=int, default=20000, show_default=True)
@click.option("--export-word-table", is_flag=True,
              help="Also write the word-vector table from the trained embedding matrix.")
def cli_train_siamese(base_pairs, domain_pairs, out_dir, epochs, batch_size, seed,
                      seq_len, embed_dim, hidden_dim, vocab_cap, export_word_table) -> None:
    """Train both text variants and export SLW1 weights."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = TrainingRun(
        base_pairs=Path(base_pairs),
        domain_pairs=None if domain_pairs is None else Path(domain_pairs),
        out_unnorm=out / "siamese_unnorm.slw",
        out_norm=out / "siamese_norm.slw",
        out_token_index=out / "tokens.txt",
        out_word_table=(out / "table.vec") if export_word_table else None,
        epochs=epochs,
        batch_size=batch_size,
        seed=seed,
        seq_len=seq_len,
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        vocab_cap=vocab_cap,
    )
    click.echo(json.dumps(train_siamese(run)))


@cli.command("export-cache")
@click.argument("source", type=click.Path(exists=True))
@click.option("--model", "model_name", default="hash:16", show_default=True,
              help='Embedder: "hash:<dim>" or a sentence-transformers name.')
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--plain-text", is_flag=True,
              help="SOURCE is one text per line instead of corpus JSON-lines.")
def cli_export_cache(source, model_name, out_path, plain_text) -> None:
    """Precompute the engine's sentence-embedding cache for a corpus."""
    if plain_text:
        texts = [line for line in Path(source).read_text(encoding="utf-8").splitlines() if line.strip()]
    else:
        texts = read_corpus_questions(source)
    count = export_sentence_cache(texts, model_name, out_path)
    click.echo(json.dumps({"lines": count, "model": model_name, "path": str(out_path)}))


@cli.command("serve-embed")
@click.option("--model", "model_name", default="hash:16", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
def cli_serve_embed(model_name, host, port) -> None:
    """Run the /embed sidecar (blocks)."""
    from .sidecar import serve_embed

    serve_embed(port=port, model_name=model_name, host=host)


@cli.command("qqp-sanity")
@click.option("--qqp-csv", type=click.Path(exists=True), default=None,
              help="QQP-format CSV (question1, question2, is_duplicate); "
                   "omit to run on the bundled synthetic paraphrase corpus.")
@click.option("--workdir", type=click.Path(), default="sanity_run", show_default=True)
@click.option("--n-train", type=int, default=160, show_default=True)
@click.option("--n-eval", type=int, default=80, show_default=True)
@click.option("--model", "embed_model", default="hash:16", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cli_qqp_sanity(qqp_csv, workdir, n_train, n_eval, embed_model, seed) -> None:
    """Toy-scale end-to-end M5 run; fails if macro F1 <= 0.5 chance floor."""
    report = main_qqp_sanity(
        Path(workdir),
        None if qqp_csv is None else Path(qqp_csv),
        n_train,
        n_eval,
        embed_model,
        seed,
    )
    click.echo(json.dumps(report))
    if report["macro_f1"] <= 0.5:
        raise click.ClickException(f"macro F1 {report['macro_f1']:.3f} not above the 0.5 floor")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        sys.stderr.write(json.dumps({"error": "usage", "message": exc.format_message()}) + "\n")
        return 64
    except click.ClickException as exc:
        sys.stderr.write(json.dumps({"error": "error", "message": exc.format_message()}) + "\n")
        return exc.exit_code
    except (ValueError, RuntimeError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
