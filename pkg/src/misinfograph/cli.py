"""Command-line entry points.

Exit codes: 0 success, 2 bad input (files, formats, arguments),
3 model failure (divergence, checkpoint problems).
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path

import click

from .classifier import checkpoint as ckpt
from .classifier.metrics import evaluate
from .classifier.model import ModelConfig, init_params
from .classifier.training import TrainConfig, predict, train
from .community import (
    detect,
    project_hashtag_network,
    project_news_graph,
    project_user_interactions,
)
from .corpus import (
    build_from_manifest,
    load_source,
    merge_corpora,
    read_corpus,
    registered_sources,
    split,
    write_corpus,
)
from .errors import InputError, MisinfoError, ModelError
from .pipeline import run_pipeline, save_export
from .propgraph import build_hashtag_network, build_news_graph, load_graph, read_tweets, save_graph
from .tokenizer import Vocab, encode, tokenize, train_vocab

logging.basicConfig(level=logging.INFO, format="%(message)s")


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ModelError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except (InputError, MisinfoError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


def _parse_keywords(raw: str) -> list[str]:
    keywords = [k.strip() for k in raw.split(",") if k.strip()]
    if not keywords:
        raise InputError("no keywords given; pass a comma-separated list")
    return keywords


# ---------------------------------------------------------------- corpus

@click.group(name="corpus")
def corpus_cli():
    """Build and split labeled document collections."""


@corpus_cli.command("build")
@click.option("--manifest", "--sources", "manifest", type=click.Path(),
              help="JSON manifest of {path, kind} entries.")
@click.option("--input", "input_path", type=click.Path(), help="Single source file.")
@click.option("--source", "source_kind", type=str, help="Registered source kind for --input.")
@click.option("--tolerance", type=float, default=0.01, show_default=True,
              help="Maximum tolerated fraction of malformed rows per source.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@handle_errors
def corpus_build(manifest, input_path, source_kind, tolerance, out_path):
    """Normalize one or more raw sources into a merged corpus."""
    if manifest and input_path:
        raise InputError("pass either --manifest or --input/--source, not both")
    if manifest:
        corpus = build_from_manifest(manifest, tolerance=tolerance)
    elif input_path:
        if not source_kind:
            raise InputError(f"--source is required with --input; known: {', '.join(registered_sources())}")
        result = load_source(input_path, source_kind, tolerance=tolerance)
        corpus = merge_corpora([result.records])
    else:
        raise InputError("pass --manifest or --input/--source")
    write_corpus(corpus, out_path)
    click.echo(f"wrote {len(corpus)} documents to {out_path}")
    click.echo(f"labels: real={corpus.label_counts.get(0, 0)} fake={corpus.label_counts.get(1, 0)}")
    for source, count in sorted(corpus.source_counts.items()):
        click.echo(f"  {source}: {count}")


@corpus_cli.command("split")
@click.option("--corpus", "--in", "corpus_path", type=click.Path(), required=True)
@click.option("--train-fraction", "--fraction", "train_fraction",
              type=float, default=0.8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--train-out", type=click.Path(), required=True)
@click.option("--val-out", type=click.Path(), required=True)
@handle_errors
def corpus_split(corpus_path, train_fraction, seed, train_out, val_out):
    """Shuffle deterministically and split into train/validation files."""
    corpus = read_corpus(corpus_path)
    train_c, val_c = split(corpus, train_fraction, seed)
    write_corpus(train_c, train_out)
    write_corpus(val_c, val_out)
    click.echo(f"train: {len(train_c)} documents -> {train_out}")
    click.echo(f"validation: {len(val_c)} documents -> {val_out}")


# ------------------------------------------------------------- tokenizer

@click.group(name="tok")
def tok_cli():
    """Vocabulary induction and text encoding."""


@tok_cli.command("build-vocab")
@click.option("--corpus", "corpus_path", type=click.Path(), required=True)
@click.option("--size", type=int, default=8000, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@handle_errors
def tok_build_vocab(corpus_path, size, out_path):
    """Induce a subword vocabulary from corpus texts."""
    corpus = read_corpus(corpus_path)
    vocab = train_vocab((d.text for d in corpus), size)
    vocab.save(out_path)
    click.echo(f"wrote {len(vocab)} tokens to {out_path}")


@tok_cli.command("encode")
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--text", type=str, required=True)
@click.option("--max-len", type=int, default=256, show_default=True)
@handle_errors
def tok_encode(vocab_path, text, max_len):
    """Print the subword pieces and padded id sequence for a text."""
    vocab = Vocab.load(vocab_path)
    pieces = tokenize(vocab, text)
    seq = encode(vocab, pieces, max_len)
    click.echo(json.dumps({
        "pieces": pieces,
        "ids": list(seq.ids),
        "true_length": seq.true_length,
    }))


# ------------------------------------------------------------ classifier

@click.group(name="clf")
def clf_cli():
    """Train, evaluate, and apply the encoder classifier."""


@clf_cli.command("train")
@click.option("--train", "train_path", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--layers", type=int, default=2, show_default=True)
@click.option("--hidden", type=int, default=128, show_default=True)
@click.option("--heads", type=int, default=4, show_default=True)
@click.option("--ffn", type=int, default=512, show_default=True)
@click.option("--max-len", type=int, default=256, show_default=True)
@click.option("--dropout", type=float, default=0.1, show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--lr", type=float, default=3e-5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@handle_errors
def clf_train(train_path, vocab_path, out_path, layers, hidden, heads, ffn,
              max_len, dropout, epochs, batch_size, lr, seed):
    """Train from random initialization and write a checkpoint."""
    corpus = read_corpus(train_path)
    vocab = Vocab.load(vocab_path)
    config = ModelConfig(num_layers=layers, hidden_dim=hidden, num_heads=heads,
                         ffn_dim=ffn, max_seq_len=max_len, vocab_size=len(vocab),
                         dropout_rate=dropout)
    params = init_params(config, seed)
    schedule = TrainConfig(epochs=epochs, batch_size=batch_size, learning_rate=lr, seed=seed)
    params, history = train(params, corpus, vocab, schedule)
    ckpt.save_model(out_path, params, vocab, meta={"seed": seed})
    for i, loss in enumerate(history, start=1):
        click.echo(f"epoch {i}: mean batch loss {loss:.6f}")
    click.echo(f"saved model to {out_path}")


@clf_cli.command("eval")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--eval", "eval_path", type=click.Path(), required=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--json", "json_out", type=click.Path(), help="Also write the full report as JSON.")
@handle_errors
def clf_eval(model_path, vocab_path, eval_path, threshold, json_out):
    """Report confusion counts and threshold metrics on a labeled corpus."""
    vocab = Vocab.load(vocab_path)
    params, _ = ckpt.load_model(model_path, vocab)
    corpus = read_corpus(eval_path)
    report = evaluate(params, vocab, corpus, threshold)
    click.echo(f"tp={report.tp} fp={report.fp} tn={report.tn} fn={report.fn}")
    click.echo(f"precision={report.precision:.4f} recall={report.recall:.4f} "
               f"f1={report.f1:.4f} mcc={report.mcc:.4f} accuracy={report.accuracy:.4f}")
    if json_out:
        Path(json_out).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
        click.echo(f"wrote report to {json_out}")


@clf_cli.command("predict")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--text", type=str, required=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@handle_errors
def clf_predict(model_path, vocab_path, text, threshold):
    """Score one text: probability of the fake class and the label."""
    vocab = Vocab.load(vocab_path)
    params, _ = ckpt.load_model(model_path, vocab)
    prob, label = predict(params, vocab, text, threshold)
    click.echo(json.dumps({"probability": prob, "label": label}))


# ----------------------------------------------------------------- graph

@click.group(name="graph")
def graph_cli():
    """Build propagation graphs from tweet streams."""


@graph_cli.command("build")
@click.option("--tweets", "tweets_path", type=click.Path(), required=True)
@click.option("--keywords", type=str, required=True, help="Comma-separated keyword list.")
@click.option("--any", "any_mode", is_flag=True, help="Match any keyword instead of all.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@handle_errors
def graph_build(tweets_path, keywords, any_mode, out_path):
    """Construct the news graph and hashtag network for the keywords."""
    kw = _parse_keywords(keywords)
    tweets = read_tweets(tweets_path)
    graph = build_news_graph(tweets, kw, any_mode=any_mode)
    net = build_hashtag_network(tweets)
    save_graph(out_path, graph, net, kw)
    click.echo(f"originals: {len(graph.originals)} retweets: {len(graph.retweets)} "
               f"edges: {graph.edge_count}")
    if graph.unobserved:
        click.echo(f"unobserved originals: {len(graph.unobserved)}")
    if graph.rejected_clock_skew:
        click.echo(f"rejected for clock skew: {graph.rejected_clock_skew}")
    click.echo(f"wrote graph to {out_path}")


# ------------------------------------------------------------- community

@click.group(name="community")
def community_cli():
    """Cluster projected graphs."""


@community_cli.command("detect")
@click.option("--graph", "graph_path", type=click.Path(), required=True)
@click.option("--method", type=click.Choice(["louvain", "infomap"]), default="louvain",
              show_default=True)
@click.option("--projection", type=click.Choice(["users", "tweets", "hashtags"]),
              default="users", show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@handle_errors
def community_detect(graph_path, method, projection, seed, out_path):
    """Run community detection on a projection of a built graph."""
    news_graph, net = load_graph(graph_path)
    if projection == "users":
        ugraph, keys = project_user_interactions(news_graph)
    elif projection == "tweets":
        ugraph, keys = project_news_graph(news_graph)
    else:
        if net is None:
            raise InputError("graph document has no hashtag network; rebuild with graph build")
        ugraph, keys = project_hashtag_network(net)
    if ugraph.m <= 0:
        raise InputError(f"projection {projection!r} has no edges to cluster")
    partition = detect(ugraph, method, seed)
    doc = {
        "method": partition.method,
        "projection": projection,
        "seed": seed,
        "quality": partition.quality,
        "num_communities": partition.num_communities,
        "assignments": {key: int(cid) for key, cid in zip(keys, partition.assignments)},
    }
    Path(out_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(f"{partition.num_communities} communities, "
               f"{'Q' if method == 'louvain' else 'L'}={partition.quality:.6f}")
    click.echo(f"wrote partition to {out_path}")


# ------------------------------------------------------------- top level

@click.group(name="misinfograph")
def misinfograph():
    """End-to-end misinformation graph analysis."""


@misinfograph.command("run")
@click.option("--tweets", "tweets_path", type=click.Path(), required=True)
@click.option("--keywords", type=str, required=True, help="Comma-separated keyword list.")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--vocab", "vocab_path", type=click.Path(), required=True)
@click.option("--method", type=click.Choice(["louvain", "infomap"]), default="louvain",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--viral-threshold", type=int, default=1000, show_default=True)
@click.option("--bucket-seconds", type=int, default=3600, show_default=True)
@click.option("--any", "any_mode", is_flag=True, help="Match any keyword instead of all.")
@click.option("--per-hashtag", is_flag=True, help="Include per-hashtag trend series.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@handle_errors
def misinfograph_run(tweets_path, keywords, model_path, vocab_path, method, seed,
                     threshold, viral_threshold, bucket_seconds, any_mode,
                     per_hashtag, out_path):
    """Score tweets, annotate the graph, cluster users, export explorer JSON."""
    kw = _parse_keywords(keywords)
    vocab = Vocab.load(vocab_path)
    params, _ = ckpt.load_model(model_path, vocab)
    doc = run_pipeline(tweets_path, kw, params, vocab, method=method, seed=seed,
                       threshold=threshold, viral_threshold=viral_threshold,
                       bucket_seconds=bucket_seconds, any_mode=any_mode,
                       per_hashtag=per_hashtag)
    save_export(out_path, doc)
    summary = doc["summary"]
    click.echo(f"nodes: {summary['node_count']} links: {summary['link_count']} "
               f"users: {summary['distinct_users']}")
    viral_at = doc["trend"]["viral_at"]
    click.echo(f"viral_at: {viral_at if viral_at is not None else 'not reached'}")
    click.echo(f"wrote export to {out_path}")


misinfograph.add_command(corpus_cli, name="corpus")
misinfograph.add_command(tok_cli, name="tok")
misinfograph.add_command(clf_cli, name="clf")
misinfograph.add_command(graph_cli, name="graph")
misinfograph.add_command(community_cli, name="community")


if __name__ == "__main__":
    misinfograph()
