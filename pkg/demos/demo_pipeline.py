"""Walk a tiny two-theme corpus through the full discovery pipeline.

Builds everything in memory: tokenize, assemble the sentence-token
graph, train embeddings, train the pair ranker, and print the ranked
candidate table. Run with:

    python3 demos/demo_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from lbd.embed import EmbedParams, train_embeddings
from lbd.graph import build_graph
from lbd.ingest import load_corpus, load_vocabulary, sentences_of, tokenize
from lbd.predictor import (
    format_ranked_table,
    make_training_pairs,
    rank_candidates,
    train_predictor,
)

DOCS = [
    ("d0", "Forest loss alters soil fungus patterns in cleared plots."),
    ("d1", "Soil fungus shifts follow forest clearing almost everywhere."),
    ("d2", "Deforestation drives measurable soil fungus changes."),
    ("d3", "Viral outbreaks strain clinical treatment capacity."),
    ("d4", "Clinical treatment of viral outbreaks improves with funding."),
    ("d5", "Aids treatment requires sustained clinical visits."),
    ("d6", "Soil fungus exposure precedes viral outbreaks in the region."),
    ("d7", "Forest clearing precedes viral outbreaks nearby."),
]

VOCAB_TSV = """\
c0079201\tDeforestation\tdeforestation
c0079201\tDeforestation\tforest loss
c0079201\tDeforestation\tforest clearing
c0001175\tAcquired Immunodeficiency Syndrome\taids
c0001175\tAcquired Immunodeficiency Syndrome\tviral outbreaks
"""


def main():
    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "corpus.jsonl"
        with open(corpus_path, "w") as fh:
            for doc_id, body in DOCS:
                fh.write(json.dumps(
                    {"doc_id": doc_id, "title": "", "body": body}) + "\n")
        vocab_path = Path(tmp) / "vocab.tsv"
        vocab_path.write_text(VOCAB_TSV)

        docs = load_corpus(corpus_path)
        vocab = load_vocabulary(vocab_path)

    token_sets = []
    for doc in docs:
        for sentence in sentences_of(doc):
            token_sets.append(tokenize(sentence, vocab))

    graph = build_graph(token_sets)
    print(f"graph: {len(graph.adjacency)} nodes, "
          f"{graph.edge_count()} edges, "
          f"coded terms {graph.coded_terms()}")

    table = train_embeddings(graph, EmbedParams(dim=16, epochs=3, seed=0))
    print(f"embeddings: {len(table.vectors)} vectors of dim {table.dim}, "
          f"final epoch loss {table.epoch_losses[-1]:.4f}")

    pairs = make_training_pairs(graph, seed=0)
    model = train_predictor(pairs, table, epochs=20, seed=0)

    candidates = [("c0001175", "c0079201")]
    ranked = rank_candidates(model, table, vocab, candidates)
    print()
    print(format_ranked_table(ranked))


if __name__ == "__main__":
    main()
