"""Unified semantic space: one d-dimensional vector per graph node.

Training runs uniform random walks from every node and fits a skip-gram
objective with negative sampling drawn proportionally to degree^0.75.
Everything is sequential and seed-deterministic: the same graph, params
and seed always produce bit-identical tables.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraph, IoFailure, NodeNotFound


@dataclass
class EmbedParams:
    dim: int = 64
    walk_length: int = 8
    walks_per_node: int = 10
    window: int = 3
    negatives_per_positive: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def validate(self):
        if not (2 <= self.dim <= 512):
            raise ValueError("dim must be in [2, 512]")
        for name in ("walk_length", "walks_per_node", "window",
                     "negatives_per_positive", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict  # node id -> np.ndarray of shape (dim,)
    seed: int
    epoch_losses: list = field(default_factory=list)

    def vector_of(self, node_id):
        if node_id not in self.vectors:
            raise NodeNotFound(node_id)
        return self.vectors[node_id]

    def __contains__(self, node_id):
        return node_id in self.vectors


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def _generate_walk(adjacency, start, length, rng):
    walk = [start]
    cur = start
    for _ in range(length - 1):
        nbrs = adjacency[cur]
        if not nbrs:
            break
        cur = nbrs[rng.integers(len(nbrs))]
        walk.append(cur)
    return walk


def train_embeddings(g, params=None):
    params = params or EmbedParams()
    params.validate()
    nodes = sorted(g.adjacency)
    if not nodes:
        raise EmptyGraph("cannot embed an empty graph")
    index = {n: i for i, n in enumerate(nodes)}
    n, dim = len(nodes), params.dim

    rng = np.random.default_rng(params.seed)
    w_in = (rng.random((n, dim)) - 0.5) / dim
    w_out = np.zeros((n, dim))

    degrees = np.array([len(g.adjacency[node]) for node in nodes], dtype=float)
    neg_probs = np.maximum(degrees, 1.0) ** 0.75
    neg_probs /= neg_probs.sum()
    neg_cdf = np.cumsum(neg_probs)

    k = params.negatives_per_positive
    total_epochs = params.epochs
    epoch_losses = []
    for epoch in range(total_epochs):
        lr = params.learning_rate * (1.0 - epoch / total_epochs)
        lr = max(lr, params.learning_rate * 1e-2)
        loss_sum = 0.0
        loss_n = 0
        for _ in range(params.walks_per_node):
            for start in nodes:
                walk = [index[x] for x in
                        _generate_walk(g.adjacency, start, params.walk_length, rng)]
                for i, center in enumerate(walk):
                    lo = max(0, i - params.window)
                    hi = min(len(walk), i + params.window + 1)
                    for j in range(lo, hi):
                        if j == i:
                            continue
                        context = walk[j]
                        negs = np.searchsorted(neg_cdf, rng.random(k))
                        targets = np.concatenate(([context], negs))
                        labels = np.zeros(k + 1)
                        labels[0] = 1.0
                        v = w_in[center]
                        u = w_out[targets]
                        scores = _sigmoid(u @ v)
                        loss_sum += -(
                            np.log(max(scores[0], 1e-12))
                            + np.log(np.maximum(1.0 - scores[1:], 1e-12)).sum()
                        )
                        loss_n += 1
                        grad = (scores - labels) * lr
                        w_in[center] = v - grad @ u
                        w_out[targets] = u - np.outer(grad, v)
        epoch_losses.append(loss_sum / max(loss_n, 1))

    vectors = {node: w_in[index[node]].copy() for node in nodes}
    return EmbeddingTable(dim, vectors, params.seed, epoch_losses)


def vector_of(table, node_id):
    return table.vector_of(node_id)


def save_embeddings(table, path):
    """Header (dim, seed, count), then one full-precision line per node."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{table.dim} {table.seed} {len(table.vectors)}\n")
            for node in sorted(table.vectors):
                comps = " ".join(repr(float(x)) for x in table.vectors[node])
                fh.write(f"{node} {comps}\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_embeddings(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    dim, seed, count = (int(x) for x in lines[0].split())
    vectors = {}
    for line in lines[1 : 1 + count]:
        parts = line.split(" ")
        node = parts[0]
        vectors[node] = np.array([float(x) for x in parts[1:]])
    return EmbeddingTable(dim, vectors, seed)
