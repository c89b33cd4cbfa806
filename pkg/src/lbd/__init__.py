"""Literature-based discovery toolkit.

Pipeline stages: corpus ingestion and typed tokenization, sentence-token
semantic graph construction, random-walk node embeddings, term-pair
plausibility ranking, and interactive topic-network queries.
"""

__version__ = "0.1.0"
