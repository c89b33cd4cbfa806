"""HTTP façade over the pipeline for the interactive explorer.

Artifacts (graph, embeddings, predictor, vocabulary) are immutable
shared state. Every randomized stage takes an explicit seed from the
request body, so responses are referentially transparent and cached by
the full parameter tuple.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import graph as graphmod
from . import predictor as predmod
from . import topicquery
from .embed import load_embeddings
from .errors import LbdError, NodeNotFound, NoPath, TooFewPoints
from .graph import load_graph
from .ingest import load_vocabulary
from .predictor import load_model, rank_candidates


@dataclass
class Artifacts:
    graph: object
    table: object
    model: object
    vocab: object


def load_artifacts(artifact_dir):
    d = Path(artifact_dir)
    return Artifacts(
        graph=load_graph(d / "graph.txt"),
        table=load_embeddings(d / "embeddings.txt"),
        model=load_model(d / "predictor.txt"),
        vocab=load_vocabulary(d / "vocab.tsv"),
    )


class BiasBody(BaseModel):
    coded: int = Field(4, ge=1, le=5)
    lemma: int = Field(1, ge=1, le=5)
    entity: int = Field(3, ge=1, le=5)
    ngram: int = Field(1, ge=1, le=5)


class QueryBody(BaseModel):
    source_code: str
    target_code: str
    topics: int = Field(50, ge=1)
    knn_k: int = Field(5, ge=1)
    bias: BiasBody = Field(default_factory=BiasBody)
    alpha: Optional[float] = Field(None, gt=0)
    beta: float = Field(0.01, gt=0)
    gibbs_iterations: int = Field(500, ge=1)
    cap: int = Field(2000, ge=1)
    seed: int = 0


class ViaBody(QueryBody):
    via_node_id: str


class RankBody(BaseModel):
    pairs: Optional[list] = None        # list of [code_a, code_b]
    codes_a: Optional[list] = None      # cross product alternative
    codes_b: Optional[list] = None
    promising_threshold: float = 0.7
    secondary_threshold: float = 0.5


def _error(status, code, message):
    return JSONResponse(
        status_code=status, content={"error": code, "message": message}
    )


def _query_params(body):
    return topicquery.QueryParams(
        topics=body.topics,
        knn_k=body.knn_k,
        bias=topicquery.BiasWeights(
            body.bias.coded, body.bias.lemma, body.bias.entity, body.bias.ngram
        ),
        alpha=body.alpha,
        beta=body.beta,
        gibbs_iterations=body.gibbs_iterations,
        cap=body.cap,
        seed=body.seed,
    )


def create_app(artifacts=None, artifact_dir=None, static_dir=None):
    app = FastAPI(title="lbd service")
    app.state.artifacts = artifacts
    app.state.cache = {}

    if artifacts is None and artifact_dir is not None:
        app.state.artifacts = load_artifacts(artifact_dir)

    def _cache_key(body):
        return json.dumps(body.model_dump(exclude={"via_node_id"}),
                          sort_keys=True)

    def _run_cached_query(body):
        key = _cache_key(body)
        cached = app.state.cache.get(key)
        if cached is not None:
            return cached
        arts = app.state.artifacts
        result = topicquery.run_query(
            arts.graph, arts.table, body.source_code, body.target_code,
            _query_params(body),
        )
        entry = (result, topicquery.serialize_result(result))
        app.state.cache[key] = entry
        return entry

    def _loaded():
        return app.state.artifacts is not None

    @app.get("/health")
    def health():
        if not _loaded():
            return _error(503, "loading", "artifacts not loaded")
        return {"status": "ok"}

    @app.get("/meta")
    def meta():
        if not _loaded():
            return _error(503, "loading", "artifacts not loaded")
        arts = app.state.artifacts
        return {
            "nodes": len(arts.graph.adjacency),
            "edges": arts.graph.edge_count(),
            "coded_terms": len(arts.graph.coded_terms()),
            "embedding_dim": arts.table.dim,
            "embedding_seed": arts.table.seed,
        }

    @app.post("/query")
    def query(body: QueryBody):
        if not _loaded():
            return _error(503, "loading", "artifacts not loaded")
        try:
            _, doc = _run_cached_query(body)
        except NodeNotFound as exc:
            return _error(404, "unknown_code", str(exc))
        except NoPath as exc:
            return _error(409, "no_path", str(exc))
        except (TooFewPoints, ValueError) as exc:
            return _error(422, "invalid_params", str(exc))
        except LbdError as exc:
            return _error(409, "query_failed", str(exc))
        return Response(content=doc, media_type="application/json")

    @app.post("/via")
    def via(body: ViaBody):
        if not _loaded():
            return _error(503, "loading", "artifacts not loaded")
        if body.via_node_id in ("source", "target"):
            return _error(422, "invalid_via",
                          "via node must differ from source and target")
        try:
            result, _ = _run_cached_query(body)
            updated = topicquery.rerun_via(result, body.via_node_id)
        except NodeNotFound as exc:
            return _error(404, "unknown_node", str(exc))
        except NoPath as exc:
            return _error(409, "no_path", str(exc))
        except (TooFewPoints, ValueError) as exc:
            return _error(422, "invalid_params", str(exc))
        return Response(content=topicquery.serialize_result(updated),
                        media_type="application/json")

    @app.post("/rank")
    def rank(body: RankBody):
        if not _loaded():
            return _error(503, "loading", "artifacts not loaded")
        arts = app.state.artifacts
        if body.pairs is not None:
            pair_filter = [tuple(p) for p in body.pairs]
        elif body.codes_a is not None and body.codes_b is not None:
            pair_filter = [(a, b) for a in body.codes_a for b in body.codes_b]
        else:
            return _error(422, "invalid_params",
                          "provide pairs or codes_a + codes_b")
        try:
            table = rank_candidates(
                arts.model, arts.table, arts.vocab, pair_filter,
                body.promising_threshold, body.secondary_threshold,
            )
        except (NodeNotFound, predmod.MissingEmbedding) as exc:
            return _error(404, "unknown_code", str(exc))
        except LbdError as exc:
            return _error(422, "rank_failed", str(exc))
        return {
            "promising_threshold": table.promising_threshold,
            "secondary_threshold": table.secondary_threshold,
            "rows": [
                {
                    "code_a": r.code_a,
                    "code_b": r.code_b,
                    "score": r.score,
                    "label_a": r.label_a,
                    "label_b": r.label_b,
                    "promising": r.promising,
                    "secondary": r.secondary,
                }
                for r in table.rows
            ],
            "tsv": predmod.format_ranked_table(table),
        }

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="static")

    return app
