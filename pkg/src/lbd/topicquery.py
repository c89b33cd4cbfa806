"""Topic-network queries over the semantic graph.

A query extracts the sentence neighborhood of the corpus shortest path
between two coded terms, fits a type-biased LDA by collapsed Gibbs
sampling, places each topic in the embedding space as the probability-
weighted sum of its token vectors, links {topics, source, target} into
a KNN network with Euclidean edge weights, traces the lightest path
between the endpoints, and lays the network out in 2-D by PCA (power
iteration with deflation).
"""

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

from . import graph as graphmod
from .errors import (
    EmptyCorpus,
    MissingEmbedding,
    NodeNotFound,
    NoPath,
    TooFewPoints,
)
from .ingest import TokenSet, token_type_of

_LAYOUT_START_SEED = 1789  # fixed start vector for power iteration


@dataclass
class BiasWeights:
    coded: int = 4
    lemma: int = 1
    entity: int = 3
    ngram: int = 1

    def validate(self):
        for name in ("coded", "lemma", "entity", "ngram"):
            w = getattr(self, name)
            if not isinstance(w, int) or not (1 <= w <= 5):
                raise ValueError(f"bias weight {name}={w!r} outside [1, 5]")

    def weight_of(self, token_key):
        return getattr(self, token_type_of(token_key))


@dataclass
class LdaParams:
    topics: int = 50
    alpha: float = None  # defaults to 50 / topics
    beta: float = 0.01
    gibbs_iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.alpha is None:
            self.alpha = 50.0 / self.topics

    def validate(self):
        if self.topics < 1:
            raise ValueError("topics must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.gibbs_iterations < 1:
            raise ValueError("gibbs_iterations must be >= 1")


@dataclass
class TopicModel:
    theta: np.ndarray        # (K, V) topic-over-token distributions
    vocab: list              # token keys, column order of theta
    topic_counts: np.ndarray  # (K,) total assignments per topic
    k_too_large: bool = False
    centroids: np.ndarray = None  # (K, d), set by topic_centroids


def apply_bias(ts, weights):
    """Multiply each token count by its type weight."""
    weights.validate()
    out = TokenSet(ts.sent_id)
    for key, count in ts.counts.items():
        out.add(key, count * weights.weight_of(key))
    return out


def fit_lda(docs, params):
    """Collapsed Gibbs LDA over weighted token multisets.

    Documents are swept in sorted sent_id order with a seeded sampler,
    so identical inputs give identical models. theta uses the smoothed
    estimator (n_kt + beta) / (n_k + beta * V).
    """
    params.validate()
    docs = sorted((d for d in docs if d.counts), key=lambda d: d.sent_id)
    if not docs:
        raise EmptyCorpus("no non-empty documents for LDA")
    K = params.topics
    k_too_large = K > len(docs)

    vocab = sorted({key for d in docs for key in d.counts})
    vidx = {t: i for i, t in enumerate(vocab)}
    V = len(vocab)

    # expand weighted counts into token instances, deterministic order
    doc_tokens = []
    for d in docs:
        inst = []
        for key in sorted(d.counts):
            inst.extend([vidx[key]] * d.counts[key])
        doc_tokens.append(np.array(inst, dtype=np.int64))

    rng = np.random.default_rng(params.seed)
    n_dk = np.zeros((len(docs), K))
    n_kt = np.zeros((K, V))
    n_k = np.zeros(K)
    z = []
    for di, inst in enumerate(doc_tokens):
        zd = rng.integers(0, K, size=len(inst))
        z.append(zd)
        for t, k in zip(inst, zd):
            n_dk[di, k] += 1
            n_kt[k, t] += 1
            n_k[k] += 1

    alpha, beta = params.alpha, params.beta
    beta_v = beta * V
    for _ in range(params.gibbs_iterations):
        for di, inst in enumerate(doc_tokens):
            zd = z[di]
            for pos in range(len(inst)):
                t, k = inst[pos], zd[pos]
                n_dk[di, k] -= 1
                n_kt[k, t] -= 1
                n_k[k] -= 1
                probs = (n_dk[di] + alpha) * (n_kt[:, t] + beta) / (n_k + beta_v)
                cum = np.cumsum(probs)
                k = int(np.searchsorted(cum, rng.random() * cum[-1]))
                zd[pos] = k
                n_dk[di, k] += 1
                n_kt[k, t] += 1
                n_k[k] += 1

    theta = (n_kt + beta) / (n_k + beta_v)[:, None]
    return TopicModel(theta, vocab, n_k.copy(), k_too_large)


def topic_centroids(model, table):
    """Per-topic coordinate: probability-weighted sum of token vectors."""
    vectors = []
    for tok in model.vocab:
        if tok not in table:
            raise MissingEmbedding(tok)
        vectors.append(table.vector_of(tok))
    emb = np.array(vectors)
    model.centroids = model.theta @ emb
    return model.centroids


@dataclass
class TopicNetwork:
    vectors: dict               # node id -> d-vector
    knn_k: int
    edges: dict                 # frozenset({a, b}) -> weight
    adjacency: dict             # node -> sorted neighbor list
    layout: dict = field(default_factory=dict)       # node -> (x, y)
    outlier_flags: dict = field(default_factory=dict)
    degenerate: bool = False
    active_path: list = field(default_factory=list)


def build_knn(points, k):
    """Undirected union of each node's k nearest Euclidean neighbors."""
    names = sorted(points)
    if k < 1 or k >= len(names):
        raise TooFewPoints(f"need more than k={k} points, got {len(names)}")
    mat = np.array([points[n] for n in names])
    edges = {}
    for i, name in enumerate(names):
        dists = np.linalg.norm(mat - mat[i], axis=1)
        order = sorted(
            (j for j in range(len(names)) if j != i),
            key=lambda j: (dists[j], names[j]),
        )
        for j in order[:k]:
            edges[frozenset((name, names[j]))] = float(dists[j])
    adjacency = {n: set() for n in names}
    for edge in edges:
        a, b = sorted(edge)
        adjacency[a].add(b)
        adjacency[b].add(a)
    adjacency = {n: sorted(s) for n, s in adjacency.items()}
    return TopicNetwork({n: points[n] for n in names}, k, edges, adjacency)


def network_path(net, src, dst):
    """Minimum total edge-weight path; ties pick the lexicographically
    smallest predecessor, so the result is unique."""
    for node in (src, dst):
        if node not in net.vectors:
            raise NodeNotFound(node)
    if src == dst:
        return [src]
    dist = {src: 0.0}
    pred = {src: None}
    done = set()
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            break
        for v in net.adjacency[u]:
            w = net.edges[frozenset((u, v))]
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif (nd == dist[v] and v not in done
                  and pred[v] is not None and u < pred[v]):
                pred[v] = u
    if dst not in done:
        raise NoPath(src, dst)
    path = [dst]
    while pred[path[-1]] is not None:
        path.append(pred[path[-1]])
    return list(reversed(path))


def path_is_valid(path):
    """False when any undirected edge appears twice along the path."""
    seen = set()
    for a, b in zip(path, path[1:]):
        edge = frozenset((a, b))
        if edge in seen:
            return False
        seen.add(edge)
    return True


def via_path(net, src, via, dst):
    """Concatenate the src->via and via->dst shortest paths.

    Paths re-traversing an edge are returned with validity False rather
    than dropped, so callers can explain the rejection.
    """
    if via in (src, dst):
        raise ValueError("via node must differ from source and target")
    first = network_path(net, src, via)
    second = network_path(net, via, dst)
    path = first + second[1:]
    return path, path_is_valid(path)


def power_iteration_eigenpairs(matrix, n_components=2, tol=1e-10,
                               max_iterations=10000):
    """Top eigenpairs of a symmetric PSD matrix by power iteration with
    deflation. Sign convention: first nonzero component positive."""
    a = np.array(matrix, dtype=float)
    rng = np.random.default_rng(_LAYOUT_START_SEED)
    values, vectors = [], []
    for _ in range(n_components):
        v = rng.random(a.shape[0]) + 0.1
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iterations):
            av = a @ v
            norm = np.linalg.norm(av)
            if norm < tol:
                lam = 0.0
                break
            v_new = av / norm
            if np.linalg.norm(v_new - v) < tol:
                v = v_new
                lam = float(v @ a @ v)
                break
            v = v_new
            lam = norm
        else:
            lam = float(v @ a @ v)
        nz = np.nonzero(np.abs(v) > 1e-12)[0]
        if len(nz) and v[nz[0]] < 0:
            v = -v
        values.append(lam)
        vectors.append(v)
        a = a - lam * np.outer(v, v)
    return np.array(values), np.array(vectors)


def layout_2d(net, outlier_sigma=2.0):
    """Project node vectors onto the top-2 principal axes.

    Rank-deficient inputs pad the missing axis with zeros and set the
    degenerate flag. Outliers sit further from the layout centroid than
    mean + outlier_sigma * stddev of all centroid distances.
    """
    names = sorted(net.vectors)
    if len(names) < 2:
        raise TooFewPoints("layout needs at least 2 nodes")
    mat = np.array([net.vectors[n] for n in names], dtype=float)
    centered = mat - mat.mean(axis=0)
    cov = centered.T @ centered / max(len(names) - 1, 1)
    values, vectors = power_iteration_eigenpairs(cov, n_components=2)
    scale = max(float(values[0]), 1.0)
    degenerate = False
    coords = np.zeros((len(names), 2))
    for axis in range(2):
        if values[axis] <= 1e-12 * scale:
            degenerate = True
            continue
        coords[:, axis] = centered @ vectors[axis]
    layout = {n: (float(coords[i, 0]), float(coords[i, 1]))
              for i, n in enumerate(names)}
    center = coords.mean(axis=0)
    dists = np.linalg.norm(coords - center, axis=1)
    cut = dists.mean() + outlier_sigma * dists.std()
    flags = {n: bool(dists[i] > cut) for i, n in enumerate(names)}
    net.layout = layout
    net.outlier_flags = flags
    net.degenerate = degenerate
    return layout, flags


@dataclass
class QueryParams:
    topics: int = 50
    knn_k: int = 5
    bias: BiasWeights = field(default_factory=BiasWeights)
    alpha: float = None
    beta: float = 0.01
    gibbs_iterations: int = 500
    cap: int = 2000
    seed: int = 0

    def lda_params(self):
        return LdaParams(self.topics, self.alpha, self.beta,
                         self.gibbs_iterations, self.seed)

    def validate(self):
        self.bias.validate()
        self.lda_params().validate()
        if self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")


@dataclass
class QueryResult:
    source_code: str
    target_code: str
    params: QueryParams
    model: TopicModel
    network: TopicNetwork
    listings: list        # per topic: list of (token key, probability)
    path_valid: bool = True
    via_node: str = None


def topic_listings(model, top_n=10):
    listings = []
    for k in range(model.theta.shape[0]):
        row = model.theta[k]
        order = sorted(range(len(model.vocab)),
                       key=lambda t: (-row[t], model.vocab[t]))
        listings.append([(model.vocab[t], float(row[t]))
                         for t in order[:min(top_n, len(model.vocab))]])
    return listings


def run_query(g, table, source_code, target_code, qparams=None):
    """Full topic query between two coded terms."""
    qparams = qparams or QueryParams()
    qparams.validate()
    src = source_code if source_code.startswith("m:") else f"m:{source_code}"
    dst = target_code if target_code.startswith("m:") else f"m:{target_code}"
    corpus_path = graphmod.shortest_path(g, src, dst)
    sent_ids = graphmod.extract_neighborhood(g, corpus_path, qparams.cap)

    token_sets = [graphmod.first_order_tokens(g, s) for s in sorted(sent_ids)]
    biased = [apply_bias(ts, qparams.bias) for ts in token_sets]
    model = fit_lda(biased, qparams.lda_params())
    centroids = topic_centroids(model, table)

    points = {f"topic_{k}": centroids[k] for k in range(qparams.topics)}
    points["source"] = table.vector_of(src)
    if src != dst:
        points["target"] = table.vector_of(dst)
    net = build_knn(points, qparams.knn_k)
    if src == dst:
        net.active_path = ["source"]
    else:
        net.active_path = network_path(net, "source", "target")
    layout_2d(net)

    return QueryResult(
        source_code=src.removeprefix("m:"),
        target_code=dst.removeprefix("m:"),
        params=qparams,
        model=model,
        network=net,
        listings=topic_listings(model),
        path_valid=path_is_valid(net.active_path),
    )


def rerun_via(result, via_node):
    """Recompute only the active path through a chosen intermediate."""
    net = result.network
    if via_node not in net.vectors:
        raise NodeNotFound(via_node)
    dst = "target" if "target" in net.vectors else "source"
    path, valid = via_path(net, "source", via_node, dst)
    net.active_path = path
    return QueryResult(
        source_code=result.source_code,
        target_code=result.target_code,
        params=result.params,
        model=result.model,
        network=net,
        listings=result.listings,
        path_valid=valid,
        via_node=via_node,
    )


def serialize_result(result):
    """Canonical JSON document for a query result.

    Topic listings carry both the display form ``key: 0.###`` and the
    full-precision probability; serialization is byte-deterministic for
    identical inputs.
    """
    net = result.network
    edges = sorted((tuple(sorted(e)) + (w,)) for e, w in net.edges.items())
    doc = {
        "query": {
            "source": result.source_code,
            "target": result.target_code,
            "topics": result.params.topics,
            "knn_k": result.params.knn_k,
            "bias": {
                "coded": result.params.bias.coded,
                "lemma": result.params.bias.lemma,
                "entity": result.params.bias.entity,
                "ngram": result.params.bias.ngram,
            },
            "alpha": result.params.alpha if result.params.alpha is not None
                     else 50.0 / result.params.topics,
            "beta": result.params.beta,
            "gibbs_iterations": result.params.gibbs_iterations,
            "cap": result.params.cap,
            "seed": result.params.seed,
        },
        "k_too_large": result.model.k_too_large,
        "nodes": [
            {
                "id": n,
                "x": net.layout[n][0],
                "y": net.layout[n][1],
                "outlier": net.outlier_flags[n],
            }
            for n in sorted(net.vectors)
        ],
        "edges": [{"a": a, "b": b, "weight": w} for a, b, w in edges],
        "active_path": net.active_path,
        "path_valid": result.path_valid,
        "via_node": result.via_node,
        "degenerate_layout": net.degenerate,
        "topics": [
            {
                "topic": k,
                "terms": [
                    {
                        "display": f"{key}: {prob:.3f}",
                        "key": key,
                        "probability": prob,
                    }
                    for key, prob in listing
                ],
            }
            for k, listing in enumerate(result.listings)
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
