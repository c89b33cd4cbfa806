"""Batch entry points for the pipeline.

Each command reads prior-stage artifacts from the artifact directory,
writes its own artifact plus a run manifest (config snapshot, input
digests, seeds, timings), and exits with a distinct code per error
class. All flags can also come from ``LBD_``-prefixed env vars.
"""

import hashlib
import json
import os
import shutil
import sys
import time
from pathlib import Path

import click

from . import errors, topicquery
from .embed import EmbedParams, load_embeddings, save_embeddings, train_embeddings
from .graph import build_graph, load_graph, save_graph
from .ingest import (
    TokenSet,
    build_ngram_list,
    load_corpus,
    load_lexicon,
    load_vocabulary,
    normalize_words,
    sentences_of,
    tokenize,
)
from .predictor import (
    format_ranked_table,
    load_model,
    make_training_pairs,
    rank_candidates,
    save_model,
    train_predictor,
)

EXIT_MISSING_ARTIFACT = 3
EXIT_INVALID_CONFIG = 4
EXIT_NODE_NOT_FOUND = 5
EXIT_NO_PATH = 6
EXIT_IO = 7
EXIT_OTHER = 2

_EXIT_CODES = [
    (errors.MissingArtifact, EXIT_MISSING_ARTIFACT),
    (errors.InvalidConfig, EXIT_INVALID_CONFIG),
    ((errors.NodeNotFound, errors.InsufficientCodedTerms), EXIT_NODE_NOT_FOUND),
    (errors.NoPath, EXIT_NO_PATH),
    ((errors.IoFailure, errors.MalformedRecord, errors.DuplicateDocId), EXIT_IO),
    ((errors.LbdError, ValueError), EXIT_OTHER),
]


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    for types, code in _EXIT_CODES:
        if isinstance(exc, types):
            sys.exit(code)
    sys.exit(EXIT_OTHER)


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(artifact_dir, command, config, inputs, outputs, started):
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _digest(p) for p in inputs},
        "outputs": {str(p): _digest(p) for p in outputs},
        "elapsed_seconds": round(time.monotonic() - started, 3),
    }
    path = Path(artifact_dir) / f"manifest-{command}.json"
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    os.replace(tmp, path)


def _require(path, stage):
    if not Path(path).exists():
        raise errors.MissingArtifact(
            f"{path} not found; run `lbd {stage}` first"
        )
    return Path(path)


def _load_tokens(path):
    token_sets = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            ts = TokenSet(rec["sent_id"])
            for key, count in rec["counts"].items():
                ts.add(key, count)
            token_sets.append(ts)
    return token_sets


def _parse_bias(spec):
    weights = topicquery.BiasWeights()
    if spec:
        for part in spec.split(","):
            name, _, value = part.partition("=")
            if name not in ("coded", "lemma", "entity", "ngram"):
                raise errors.InvalidConfig(f"unknown bias type {name!r}")
            try:
                setattr(weights, name, int(value))
            except ValueError:
                raise errors.InvalidConfig(f"bias weight {value!r} not an integer")
    try:
        weights.validate()
    except ValueError as exc:
        raise errors.InvalidConfig(str(exc))
    return weights


@click.group(context_settings={"auto_envvar_prefix": "LBD"})
@click.option("--artifact-dir", default="artifacts", show_default=True,
              help="Directory holding stage artifacts.")
@click.pass_context
def main(ctx, artifact_dir):
    """Literature-based discovery pipeline."""
    ctx.obj = Path(artifact_dir)
    ctx.obj.mkdir(parents=True, exist_ok=True)


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.argument("vocab", type=click.Path(exists=True))
@click.option("--entities", type=click.Path(exists=True), default=None)
@click.option("--ngram-min-count", default=3, show_default=True)
@click.pass_obj
def ingest(artifact_dir, corpus, vocab, entities, ngram_min_count):
    """Tokenize a corpus into the per-sentence token store."""
    started = time.monotonic()
    try:
        docs = load_corpus(corpus)
        vocabulary = load_vocabulary(vocab)
        entity_lexicon = load_lexicon(entities) if entities else []
        sentences = [s for doc in docs for s in sentences_of(doc)]
        ngrams = build_ngram_list(
            (normalize_words(s.text) for s in sentences),
            min_count=max(ngram_min_count, 2),
        )
        out = artifact_dir / "tokens.jsonl"
        with open(out, "w", encoding="utf-8") as fh:
            for sent in sentences:
                ts = tokenize(sent, vocabulary, entity_lexicon, ngrams)
                rec = {"sent_id": ts.sent_id,
                       "counts": dict(sorted(ts.counts.items()))}
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        shutil.copyfile(vocab, artifact_dir / "vocab.tsv")
        inputs = [corpus, vocab] + ([entities] if entities else [])
        _write_manifest(artifact_dir, "ingest",
                        {"ngram_min_count": ngram_min_count},
                        inputs, [out, artifact_dir / "vocab.tsv"], started)
    except Exception as exc:
        _fail(exc)


@main.command("build-graph")
@click.pass_obj
def build_graph_cmd(artifact_dir):
    """Build the sentence-token graph from the token store."""
    started = time.monotonic()
    try:
        tokens_path = _require(artifact_dir / "tokens.jsonl", "ingest")
        g = build_graph(_load_tokens(tokens_path))
        out = artifact_dir / "graph.txt"
        save_graph(g, out)
        _write_manifest(artifact_dir, "build-graph", {},
                        [tokens_path], [out], started)
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--dim", default=64, show_default=True)
@click.option("--walk-length", default=8, show_default=True)
@click.option("--walks-per-node", default=10, show_default=True)
@click.option("--window", default=3, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=5, show_default=True)
@click.option("--learning-rate", default=0.025, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def embed(artifact_dir, dim, walk_length, walks_per_node, window,
          negatives, epochs, learning_rate, seed):
    """Train node embeddings over the semantic graph."""
    started = time.monotonic()
    try:
        graph_path = _require(artifact_dir / "graph.txt", "build-graph")
        g = load_graph(graph_path)
        params = EmbedParams(dim, walk_length, walks_per_node, window,
                             negatives, epochs, learning_rate, seed)
        table = train_embeddings(g, params)
        out = artifact_dir / "embeddings.txt"
        save_embeddings(table, out)
        _write_manifest(artifact_dir, "embed", vars(params),
                        [graph_path], [out], started)
    except Exception as exc:
        _fail(exc)


@main.command("train-predictor")
@click.option("--neg-ratio", default=1, show_default=True)
@click.option("--epochs", default=20, show_default=True)
@click.option("--learning-rate", default=0.05, show_default=True)
@click.option("--margin", default=0.2, show_default=True)
@click.option("--hidden", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def train_predictor_cmd(artifact_dir, neg_ratio, epochs, learning_rate,
                        margin, hidden, seed):
    """Train the pair-plausibility ranker."""
    started = time.monotonic()
    try:
        graph_path = _require(artifact_dir / "graph.txt", "build-graph")
        emb_path = _require(artifact_dir / "embeddings.txt", "embed")
        g = load_graph(graph_path)
        table = load_embeddings(emb_path)
        pairs = make_training_pairs(g, neg_ratio=neg_ratio, seed=seed)
        model = train_predictor(pairs, table, epochs=epochs,
                                learning_rate=learning_rate, margin=margin,
                                hidden=hidden, seed=seed)
        out = artifact_dir / "predictor.txt"
        save_model(model, out)
        config = {"neg_ratio": neg_ratio, "epochs": epochs,
                  "learning_rate": learning_rate, "margin": margin,
                  "hidden": hidden, "seed": seed}
        _write_manifest(artifact_dir, "train-predictor", config,
                        [graph_path, emb_path], [out], started)
    except Exception as exc:
        _fail(exc)


@main.command()
@click.argument("pairs_file", type=click.Path(exists=True))
@click.option("--threshold", default=0.7, show_default=True,
              help="Promising threshold (strict).")
@click.option("--secondary-threshold", default=0.5, show_default=True)
@click.option("--output", default=None, help="Output path (default stdout).")
@click.pass_obj
def rank(artifact_dir, pairs_file, threshold, secondary_threshold, output):
    """Score code pairs from a two-column file and print a ranked table."""
    started = time.monotonic()
    try:
        emb_path = _require(artifact_dir / "embeddings.txt", "embed")
        model_path = _require(artifact_dir / "predictor.txt", "train-predictor")
        vocab_path = _require(artifact_dir / "vocab.tsv", "ingest")
        table = load_embeddings(emb_path)
        model = load_model(model_path)
        vocabulary = load_vocabulary(vocab_path)
        pair_filter = []
        with open(pairs_file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    a, b = line.split()[:2]
                    pair_filter.append((a, b))
        ranked = rank_candidates(model, table, vocabulary, pair_filter,
                                 threshold, secondary_threshold)
        text = format_ranked_table(ranked)
        if output:
            Path(output).write_text(text)
            outputs = [output]
        else:
            click.echo(text, nl=False)
            outputs = []
        _write_manifest(artifact_dir, "rank",
                        {"threshold": threshold,
                         "secondary_threshold": secondary_threshold},
                        [pairs_file, emb_path, model_path], outputs, started)
    except Exception as exc:
        _fail(exc)


@main.command()
@click.argument("source_code")
@click.argument("target_code")
@click.option("--topics", default=50, show_default=True)
@click.option("--knn-k", default=5, show_default=True)
@click.option("--bias", default="coded=4,lemma=1,entity=3,ngram=1",
              show_default=True)
@click.option("--alpha", default=None, type=float)
@click.option("--beta", default=0.01, show_default=True)
@click.option("--gibbs-iterations", default=500, show_default=True)
@click.option("--cap", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--output", default=None, help="Output path (default stdout).")
@click.pass_obj
def query(artifact_dir, source_code, target_code, topics, knn_k, bias,
          alpha, beta, gibbs_iterations, cap, seed, output):
    """Run a full topic query between two coded terms."""
    started = time.monotonic()
    try:
        graph_path = _require(artifact_dir / "graph.txt", "build-graph")
        emb_path = _require(artifact_dir / "embeddings.txt", "embed")
        g = load_graph(graph_path)
        table = load_embeddings(emb_path)
        qparams = topicquery.QueryParams(
            topics=topics, knn_k=knn_k, bias=_parse_bias(bias),
            alpha=alpha, beta=beta, gibbs_iterations=gibbs_iterations,
            cap=cap, seed=seed,
        )
        result = topicquery.run_query(g, table, source_code, target_code,
                                      qparams)
        doc = topicquery.serialize_result(result)
        if output:
            Path(output).write_text(doc)
            outputs = [output]
        else:
            click.echo(doc, nl=False)
            outputs = []
        _write_manifest(artifact_dir, "query",
                        {"topics": topics, "knn_k": knn_k, "bias": bias,
                         "cap": cap, "seed": seed},
                        [graph_path, emb_path], outputs, started)
    except Exception as exc:
        _fail(exc)


@main.command("export-figure")
@click.argument("query_result", type=click.Path(exists=True))
@click.option("--svg", default="layout.svg", show_default=True)
@click.option("--coords", default="layout.tsv", show_default=True)
@click.pass_obj
def export_figure(artifact_dir, query_result, svg, coords):
    """Render a query result to an SVG plus a coordinate table."""
    started = time.monotonic()
    try:
        doc = json.loads(Path(query_result).read_text())
        svg_text, coords_text = render_figure(doc)
        Path(svg).write_text(svg_text)
        Path(coords).write_text(coords_text)
        _write_manifest(artifact_dir, "export-figure", {},
                        [query_result], [svg, coords], started)
    except Exception as exc:
        _fail(exc)


def render_figure(doc, width=800, height=600, margin=40):
    """SVG scatter of the topic network with the active path highlighted,
    plus a plain coordinate table for image-free testing."""
    nodes = doc["nodes"]
    xs = [n["x"] for n in nodes]
    ys = [n["y"] for n in nodes]
    span_x = (max(xs) - min(xs)) or 1.0
    span_y = (max(ys) - min(ys)) or 1.0

    def px(x):
        return margin + (x - min(xs)) / span_x * (width - 2 * margin)

    def py(y):
        return margin + (y - min(ys)) / span_y * (height - 2 * margin)

    pos = {n["id"]: (px(n["x"]), py(n["y"])) for n in nodes}
    path_edges = {
        frozenset(p) for p in zip(doc["active_path"], doc["active_path"][1:])
    }
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}">'
    ]
    for e in doc["edges"]:
        (x1, y1), (x2, y2) = pos[e["a"]], pos[e["b"]]
        on_path = frozenset((e["a"], e["b"])) in path_edges
        color = "#d62728" if on_path else "#bbbbbb"
        w = 3 if on_path else 1
        parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="{w}"/>'
        )
    for n in nodes:
        x, y = pos[n["id"]]
        special = n["id"] in ("source", "target")
        fill = "#1f77b4" if special else ("#ff7f0e" if n["outlier"] else "#2ca02c")
        parts.append(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{7 if special else 5}" '
            f'fill="{fill}"/>'
        )
        parts.append(
            f'<text x="{x + 8:.2f}" y="{y - 8:.2f}" font-size="10">{n["id"]}</text>'
        )
    parts.append("</svg>")

    lines = ["node\tx\ty\toutlier\ton_path"]
    path_nodes = set(doc["active_path"])
    for n in nodes:
        lines.append(
            f"{n['id']}\t{n['x']!r}\t{n['y']!r}\t"
            f"{str(n['outlier']).lower()}\t{str(n['id'] in path_nodes).lower()}"
        )
    return "\n".join(parts) + "\n", "\n".join(lines) + "\n"


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static-dir", default=None)
@click.pass_obj
def serve(artifact_dir, port, host, static_dir):
    """Serve the HTTP API over the built artifacts."""
    try:
        for name, stage in [("graph.txt", "build-graph"),
                            ("embeddings.txt", "embed"),
                            ("predictor.txt", "train-predictor"),
                            ("vocab.tsv", "ingest")]:
            _require(artifact_dir / name, stage)
        import uvicorn

        from .service import create_app
        app = create_app(artifact_dir=artifact_dir, static_dir=static_dir)
        uvicorn.run(app, host=host, port=port)
    except Exception as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
