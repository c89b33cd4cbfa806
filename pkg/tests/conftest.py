"""Shared fixtures and independent oracles used across the suite."""

import itertools

import numpy as np
import pytest

from lbd.graph import build_graph
from lbd.ingest import TokenSet


def make_token_set(sent_id, keys):
    """TokenSet from a key -> count mapping or iterable of keys."""
    ts = TokenSet(sent_id)
    if isinstance(keys, dict):
        for key, count in keys.items():
            ts.add(key, count)
    else:
        for key in keys:
            ts.add(key)
    return ts


def brute_force_shortest(adjacency, src, dst, weights=None):
    """Exhaustive enumeration of all simple paths; returns (cost, path)
    of the cheapest, ties broken by the path node sequence.

    Independent of the BFS/Dijkstra implementations: pure recursion on
    adjacency. Only viable on small instances.
    """
    best = None
    def visit(node, cost, path):
        nonlocal best
        if node == dst:
            cand = (cost, tuple(path))
            if best is None or cand < best:
                best = cand
            return
        for nbr in adjacency[node]:
            if nbr in path:
                continue
            w = 1 if weights is None else weights[frozenset((node, nbr))]
            visit(nbr, cost + w, path + [nbr])
    visit(src, 0, [src])
    return best


def brute_force_knn_edges(points, k):
    """All-pairs distance KNN edge set, built without the library code."""
    names = sorted(points)
    dist = {
        (a, b): float(np.linalg.norm(np.asarray(points[a]) - np.asarray(points[b])))
        for a, b in itertools.permutations(names, 2)
    }
    edges = set()
    for a in names:
        ranked = sorted((b for b in names if b != a),
                        key=lambda b: (dist[(a, b)], b))
        for b in ranked[:k]:
            edges.add(frozenset((a, b)))
    return edges


def dense_top2_eigenpairs(matrix):
    """Reference eigensolver: full dense symmetric decomposition, then
    take the top two, applying the first-nonzero-positive sign rule."""
    values, vectors = np.linalg.eigh(np.asarray(matrix, dtype=float))
    order = np.argsort(values)[::-1]
    out_vals, out_vecs = [], []
    for idx in order[:2]:
        v = vectors[:, idx]
        nz = np.nonzero(np.abs(v) > 1e-12)[0]
        if len(nz) and v[nz[0]] < 0:
            v = -v
        out_vals.append(float(values[idx]))
        out_vecs.append(v)
    return np.array(out_vals), np.array(out_vecs)


def random_bipartite_token_sets(rng, n_sentences=4, n_tokens=5):
    """Random sentence-token fixtures for property tests."""
    tokens = [f"l:noun:tok{i}" for i in range(n_tokens)]
    sets = []
    for s in range(n_sentences):
        ts = TokenSet(f"s:d:{s}")
        for tok in tokens:
            if rng.random() < 0.5:
                ts.add(tok, int(rng.integers(1, 4)))
        sets.append(ts)
    return sets


@pytest.fixture
def small_graph():
    """Two coded terms bridged by a shared sentence.

    s:d:0 holds {m:c1, l:noun:x}; s:d:1 holds {m:c1, m:c2};
    s:d:2 holds {m:c2, l:noun:y}.
    """
    return build_graph([
        make_token_set("s:d:0", ["m:c1", "l:noun:x"]),
        make_token_set("s:d:1", ["m:c1", "m:c2"]),
        make_token_set("s:d:2", ["m:c2", "l:noun:y"]),
    ])
