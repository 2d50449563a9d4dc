"""Command-line interface.

All machine output is JSON, one object per line, on stdout; errors go to
stderr as JSON.  Exit codes: 0 ok, 1 domain error, 2 missing resource,
64 usage, 65 data format.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import wire
from .config import load_config, load_norm_config, load_resources, resolve_config_path
from .errors import (
    BuildError,
    CacheMissError,
    ConfigError,
    ContractError,
    FormatError,
    InputError,
    QQMatchError,
    TrainingError,
    TransportError,
)
from .evaluation import EvalReport, evaluate, load_pairs_qqp, load_pairs_tsv
from .index import build_index, load_corpus, load_index, match_query, save_index, score_pair
from .svm import calibration_split, save_model, train
from .textnorm import preprocess

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_MISSING = 2
EXIT_USAGE = 64
EXIT_DATA = 65

_EXIT_BY_ERROR: tuple[tuple[type, int], ...] = (
    (ConfigError, EXIT_MISSING),
    (FormatError, EXIT_DATA),
    (BuildError, EXIT_DOMAIN),
    (TrainingError, EXIT_DOMAIN),
    (InputError, EXIT_DOMAIN),
    (ContractError, EXIT_DOMAIN),
    (CacheMissError, EXIT_DOMAIN),
    (TransportError, EXIT_DOMAIN),
    (QQMatchError, EXIT_DOMAIN),
)


@click.group()
@click.option("--config", "config_path", default=None, help="Engine config JSON (or $QQMATCH_CONFIG).")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None) -> None:
    """Query-to-question similarity engine."""
    ctx.obj = config_path


def _config(ctx: click.Context, skip_meta_check: bool = False):
    return load_config(resolve_config_path(ctx.obj), skip_meta_check=skip_meta_check)


@cli.command("index")
@click.pass_context
def cli_index(ctx: click.Context) -> None:
    """Build and persist the precomputed question index."""
    cfg = _config(ctx)
    if cfg.corpus is None:
        raise ConfigError("paths.corpus is required to build an index")
    if cfg.index is None:
        raise ConfigError("paths.index is required to build an index")
    resources = load_resources(cfg, with_meta=False)
    index = build_index(load_corpus(cfg.corpus), resources)
    save_index(index, cfg.index)
    click.echo(
        json.dumps(
            {
                "count": len(index),
                "mode": index.mode,
                "dims": {"hidden": index.hidden_dim, "avg": index.avg_dim, "sentence": index.sent_dim},
                "path": str(cfg.index),
            }
        )
    )


@cli.command("query")
@click.argument("query_text")
@click.option("--top-k", type=int, default=None, help="Number of results (default from config).")
@click.pass_context
def cli_query(ctx: click.Context, query_text: str, top_k: int | None) -> None:
    """Match a query against the indexed corpus."""
    cfg = _config(ctx)
    k = cfg.top_k if top_k is None else top_k
    if k < 1:
        raise click.UsageError(f"top-k must be >= 1, got {k}")
    if cfg.index is None or not cfg.index.is_file():
        raise ConfigError(f"index file not found: {cfg.index}")
    resources = load_resources(cfg)
    index = load_index(cfg.index)
    response = match_query(query_text, index, resources, top_k=k)
    click.echo(wire.render_match_response(response))


@cli.command("score-pair")
@click.argument("question1")
@click.argument("question2")
@click.pass_context
def cli_score_pair(ctx: click.Context, question1: str, question2: str) -> None:
    """Score one question pair and classify it."""
    from .service import pick_pair_model

    cfg = _config(ctx)
    resources = load_resources(cfg)
    features = score_pair(question1, question2, resources)
    model, used = pick_pair_model(resources, len(features))
    feats = np.asarray(features[:used])
    probability = model.predict_proba(feats)
    degraded = resources.provider.kind != "disabled" and len(features) == 4
    click.echo(wire.render_score_pair(feats, probability, model.classify(feats), degraded))


@cli.command("train-meta")
@click.argument("pairs_path", type=click.Path())
@click.option("--mode", type=click.Choice(["m1", "m5"]), default="m1", help="Feature mode.")
@click.option("--qqp", is_flag=True, help="Pairs file is QQP-format CSV instead of TSV.")
@click.option("--c", "c_value", type=float, default=0.2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def cli_train_meta(ctx: click.Context, pairs_path: str, mode: str, qqp: bool, c_value: float, seed: int) -> None:
    """Train the SVM meta-classifier from a labeled pairs file."""
    cfg = _config(ctx, skip_meta_check=True)
    out_path = cfg.meta_model_m5 if mode == "m5" else cfg.meta_model_m1
    if out_path is None:
        raise ConfigError(f"paths.meta_model_{mode} is required to train mode {mode.upper()}")
    resources = load_resources(cfg, with_meta=False)
    if mode == "m5" and resources.provider.kind == "disabled":
        raise TrainingError("mode M5 needs a sentence provider, but the provider is disabled")

    pairs = load_pairs_qqp(pairs_path) if qqp else load_pairs_tsv(pairs_path)
    if not pairs:
        raise InputError(f"{pairs_path}: no labeled pairs")
    want = 5 if mode == "m5" else 4
    rows = []
    for pair in pairs:
        f = score_pair(pair.question1, pair.question2, resources)
        if len(f) < want:
            raise TrainingError(
                f"pair ({pair.question1!r}, {pair.question2!r}) produced {len(f)} features; "
                f"mode {mode.upper()} needs {want} (sentence provider failure?)"
            )
        rows.append(f[:want])
    features = np.asarray(rows)
    labels = np.asarray([p.label for p in pairs])
    threshold = 0.7 if cfg.classification_threshold is None else cfg.classification_threshold
    model = train(features, labels, C=c_value, threshold=threshold, seed=seed)
    save_model(model, out_path)

    train_idx, calib_idx = calibration_split(labels, seed)
    report_idx = calib_idx if len(np.unique(labels[calib_idx])) == 2 else train_idx
    probs = np.atleast_1d(model.predict_proba(features[report_idx]))
    tp = int(np.sum((probs >= model.threshold) & (labels[report_idx] == 1)))
    fp = int(np.sum((probs >= model.threshold) & (labels[report_idx] == 0)))
    tn = int(np.sum((probs < model.threshold) & (labels[report_idx] == 0)))
    fn = int(np.sum((probs < model.threshold) & (labels[report_idx] == 1)))
    report = EvalReport.from_confusion(tp, fp, tn, fn, model.threshold)
    click.echo(json.dumps({"model": str(out_path), "mode": mode.upper(), "calibration": report.as_dict()}))


@cli.command("evaluate")
@click.argument("pairs_path", type=click.Path())
@click.option("--mode", type=click.Choice(["m1", "m5"]), default="m1", help="Model to evaluate.")
@click.option("--qqp", is_flag=True, help="Pairs file is QQP-format CSV instead of TSV.")
@click.option("--threshold", type=float, default=None, help="Override the model's threshold.")
@click.pass_context
def cli_evaluate(ctx: click.Context, pairs_path: str, mode: str, qqp: bool, threshold: float | None) -> None:
    """Report accuracy / macro F1 / positive precision over labeled pairs."""
    cfg = _config(ctx)
    resources = load_resources(cfg)
    model = resources.meta_m5 if mode == "m5" else resources.meta_m1
    if model is None:
        raise ConfigError(f"paths.meta_model_{mode} is not configured")
    pairs = load_pairs_qqp(pairs_path) if qqp else load_pairs_tsv(pairs_path)
    report = evaluate(pairs, model, resources, threshold=threshold)
    click.echo(json.dumps(report.as_dict()))


@cli.command("preprocess")
@click.argument("text", required=False)
@click.option("--stdin", "from_stdin", is_flag=True, help="Read one text per line from stdin.")
@click.pass_context
def cli_preprocess(ctx: click.Context, text: str | None, from_stdin: bool) -> None:
    """Emit the unnormalized/normalized variants of input text.

    Works without a config file (packaged normalization tables) so
    offline tooling can reuse the exact pipeline."""
    import os

    from .config import ENV_VAR
    from .textnorm import NormalizationConfig

    config_path = ctx.obj or os.environ.get(ENV_VAR)
    norm = load_norm_config(_config(ctx)) if config_path else NormalizationConfig.default()
    if from_stdin == (text is not None):
        raise click.UsageError("pass exactly one of TEXT or --stdin")
    lines = sys.stdin.read().splitlines() if from_stdin else [text]
    for line in lines:
        pre = preprocess(line, norm)
        click.echo(
            json.dumps(
                {
                    "raw": pre.raw,
                    "unnormalized": pre.unnormalized,
                    "normalized": pre.normalized,
                    "unnorm_tokens": list(pre.unnorm_tokens),
                    "norm_tokens": list(pre.norm_tokens),
                }
            )
        )


@cli.command("serve")
@click.pass_context
def cli_serve(ctx: click.Context) -> None:
    """Run the HTTP service (blocks)."""
    import uvicorn

    from .service import create_app

    cfg = _config(ctx)
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.UsageError as exc:
        sys.stderr.write(wire.render_error("usage", exc.format_message()) + "\n")
        return EXIT_USAGE
    except click.ClickException as exc:
        sys.stderr.write(wire.render_error("error", exc.format_message()) + "\n")
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    except QQMatchError as exc:
        for etype, code in _EXIT_BY_ERROR:
            if isinstance(exc, etype):
                sys.stderr.write(wire.render_error(etype.__name__, str(exc)) + "\n")
                return code
        sys.stderr.write(wire.render_error("error", str(exc)) + "\n")
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        sys.stderr.write(wire.render_error("ConfigError", str(exc)) + "\n")
        return EXIT_MISSING


if __name__ == "__main__":
    sys.exit(main())
