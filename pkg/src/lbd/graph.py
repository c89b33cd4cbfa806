"""Heterogeneous semantic graph: sentence nodes joined to token nodes.

The graph is bipartite by construction. Sentence nodes carry the ``s:``
prefix; all other nodes are token keys. Shortest paths use unweighted
breadth-first search with lexicographic neighbor expansion, so results
are deterministic.
"""

from collections import Counter, deque
from dataclasses import dataclass, field

from .errors import (
    DuplicateSentence,
    EmptyPath,
    IoFailure,
    NodeNotFound,
    NoPath,
)
from .ingest import TokenSet


def is_sentence_node(node_id):
    return node_id.startswith("s:")


@dataclass
class SemanticGraph:
    adjacency: dict = field(default_factory=dict)  # node -> sorted neighbor list
    multiplicity: dict = field(default_factory=dict)  # (sent, token) -> count

    @property
    def nodes(self):
        return self.adjacency.keys()

    def neighbors(self, node_id):
        if node_id not in self.adjacency:
            raise NodeNotFound(node_id)
        return self.adjacency[node_id]

    def coded_terms(self):
        return sorted(n for n in self.adjacency if n.startswith("m:"))

    def edge_count(self):
        return len(self.multiplicity)

    def co_occur(self, a, b):
        """True if two token nodes share at least one sentence."""
        na, nb = set(self.adjacency.get(a, ())), set(self.adjacency.get(b, ()))
        return bool(na & nb)


@dataclass(frozen=True)
class GraphPath:
    nodes: tuple

    @property
    def length(self):
        return len(self.nodes) - 1


def build_graph(token_sets):
    adjacency = {}
    multiplicity = {}
    seen = set()
    edges = {}  # node -> set of neighbors, sorted at the end
    for ts in token_sets:
        sid = ts.sent_id
        if sid in seen:
            raise DuplicateSentence(sid)
        seen.add(sid)
        edges.setdefault(sid, set())
        for key, count in ts.counts.items():
            edges[sid].add(key)
            edges.setdefault(key, set()).add(sid)
            multiplicity[(sid, key)] = count
    for node, nbrs in edges.items():
        adjacency[node] = sorted(nbrs)
    return SemanticGraph(adjacency, multiplicity)


def shortest_path(g, src, dst):
    """Minimum-hop path via BFS; ties resolved by lexicographic expansion."""
    for node in (src, dst):
        if node not in g.adjacency:
            raise NodeNotFound(node)
    if src == dst:
        return GraphPath((src,))
    pred = {src: None}
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for nbr in g.adjacency[cur]:
            if nbr in pred:
                continue
            pred[nbr] = cur
            if nbr == dst:
                path = [dst]
                while pred[path[-1]] is not None:
                    path.append(pred[path[-1]])
                return GraphPath(tuple(reversed(path)))
            queue.append(nbr)
    raise NoPath(src, dst)


def extract_neighborhood(g, path, cap=2000):
    """Sentence ids relevant to a path: path sentences plus 1-hop
    sentence neighbors of every token node on the path.

    When the set exceeds cap, the cap sentences incident to the most
    path tokens win; ties break lexicographically.
    """
    if not path.nodes:
        raise EmptyPath("cannot extract a neighborhood from an empty path")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    path_tokens = [n for n in path.nodes if not is_sentence_node(n)]
    sentences = {n for n in path.nodes if is_sentence_node(n)}
    incidence = Counter()
    for tok in path_tokens:
        for nbr in g.adjacency.get(tok, ()):
            sentences.add(nbr)
            incidence[nbr] += 1
    if len(sentences) <= cap:
        return set(sentences)
    ranked = sorted(sentences, key=lambda s: (-incidence[s], s))
    return set(ranked[:cap])


def first_order_tokens(g, sent_id):
    """TokenSet of a sentence node reconstructed from its adjacency."""
    if sent_id not in g.adjacency:
        raise NodeNotFound(sent_id)
    ts = TokenSet(sent_id)
    for tok in g.adjacency[sent_id]:
        ts.add(tok, g.multiplicity[(sent_id, tok)])
    return ts


def save_graph(g, path):
    """Text export: node list, then sorted edge triples; round-trips exactly."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"nodes {len(g.adjacency)}\n")
            for node in sorted(g.adjacency):
                fh.write(node + "\n")
            fh.write(f"edges {len(g.multiplicity)}\n")
            for (sid, tok), count in sorted(g.multiplicity.items()):
                fh.write(f"{sid}\t{tok}\t{count}\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_graph(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    n_nodes = int(lines[0].split()[1])
    nodes = lines[1 : 1 + n_nodes]
    edge_header = 1 + n_nodes
    adjacency = {node: set() for node in nodes}
    multiplicity = {}
    for line in lines[edge_header + 1 :]:
        sid, tok, count = line.split("\t")
        multiplicity[(sid, tok)] = int(count)
        adjacency[sid].add(tok)
        adjacency[tok].add(sid)
    return SemanticGraph(
        {node: sorted(nbrs) for node, nbrs in adjacency.items()}, multiplicity
    )
