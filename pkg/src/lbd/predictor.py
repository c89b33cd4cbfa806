"""Term-pair plausibility scoring.

A shallow ranker over symmetric embedding features stands in for a
large-scale connection predictor: features are the elementwise product
and absolute difference of the two term vectors, passed through one
rectified hidden layer and squashed to (0, 1). Training minimizes a
margin ranking loss placing co-occurring coded pairs above sampled
non-co-occurring negatives.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import (
    InsufficientCodedTerms,
    IoFailure,
    MissingEmbedding,
    NodeNotFound,
    SamePair,
)

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class PairExample:
    a: str
    b: str
    label: str

    @staticmethod
    def make(x, y, label):
        a, b = sorted((x, y))
        return PairExample(a, b, label)


@dataclass
class PredictorModel:
    w1: np.ndarray  # (hidden, 2 * dim)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    seed: int = 0
    epoch_losses: list = field(default_factory=list)

    @property
    def hidden(self):
        return self.w1.shape[0]

    @property
    def dim(self):
        return self.w1.shape[1] // 2


def init_model(dim, hidden=32, seed=0):
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(2 * dim)
    return PredictorModel(
        w1=rng.normal(0.0, scale, (hidden, 2 * dim)),
        b1=np.zeros(hidden),
        w2=rng.normal(0.0, 1.0 / np.sqrt(hidden), hidden),
        b2=0.0,
        seed=seed,
    )


def pair_features(u, v):
    """Symmetric feature map: [u*v ; |u - v|]."""
    return np.concatenate((u * v, np.abs(u - v)))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def _forward(model, phi):
    z1 = model.w1 @ phi + model.b1
    h = np.maximum(z1, 0.0)
    z2 = float(model.w2 @ h + model.b2)
    return float(_sigmoid(z2)), z1, h


def score_features(model, phi):
    return _forward(model, phi)[0]


def score_gradients(model, phi):
    """Score and its analytic gradients w.r.t. all parameters."""
    s, z1, h = _forward(model, phi)
    ds_dz2 = s * (1.0 - s)
    g_w2 = ds_dz2 * h
    g_b2 = ds_dz2
    dz1 = ds_dz2 * model.w2 * (z1 > 0.0)
    g_w1 = np.outer(dz1, phi)
    g_b1 = dz1
    return s, {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}


def make_training_pairs(g, neg_ratio=1, seed=0):
    """Positives: coded pairs sharing a sentence. Negatives: seeded
    uniform sample of coded pairs that never co-occur."""
    coded = g.coded_terms()
    if len(coded) < 2:
        raise InsufficientCodedTerms("need at least 2 coded-term nodes")
    positives = set()
    for node, nbrs in g.adjacency.items():
        if not node.startswith("s:"):
            continue
        codes = sorted(t for t in nbrs if t.startswith("m:"))
        positives.update(combinations(codes, 2))
    examples = [PairExample(a, b, POSITIVE) for a, b in sorted(positives)]
    if neg_ratio > 0 and positives:
        candidates = [
            p for p in combinations(coded, 2) if p not in positives
        ]
        rng = np.random.default_rng(seed)
        want = min(neg_ratio * len(positives), len(candidates))
        idx = rng.choice(len(candidates), size=want, replace=False)
        for i in sorted(idx):
            a, b = candidates[i]
            examples.append(PairExample(a, b, NEGATIVE))
    return examples


def _features_of(pairs, table):
    feats = {}
    for ex in pairs:
        for node in (ex.a, ex.b):
            if node not in table:
                raise MissingEmbedding(node)
        feats[(ex.a, ex.b)] = pair_features(
            table.vector_of(ex.a), table.vector_of(ex.b)
        )
    return feats


def train_predictor(pairs, table, epochs=20, learning_rate=0.05,
                    margin=0.2, hidden=32, seed=0):
    """Margin ranking loss over matched (positive, negative) samples."""
    model = init_model(table.dim, hidden=hidden, seed=seed)
    positives = [p for p in pairs if p.label == POSITIVE]
    negatives = [p for p in pairs if p.label == NEGATIVE]
    feats = _features_of(pairs, table)
    if not positives or not negatives or epochs == 0:
        return model
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        pos_order = rng.permutation(len(positives))
        neg_order = rng.permutation(len(negatives))
        count = max(len(positives), len(negatives))
        loss_sum = 0.0
        for i in range(count):
            p = positives[pos_order[i % len(positives)]]
            n = negatives[neg_order[i % len(negatives)]]
            phi_p = feats[(p.a, p.b)]
            phi_n = feats[(n.a, n.b)]
            s_p, g_p = score_gradients(model, phi_p)
            s_n, g_n = score_gradients(model, phi_n)
            loss = max(0.0, margin - s_p + s_n)
            loss_sum += loss
            if loss > 0.0:
                model.w1 += learning_rate * (g_p["w1"] - g_n["w1"])
                model.b1 += learning_rate * (g_p["b1"] - g_n["b1"])
                model.w2 += learning_rate * (g_p["w2"] - g_n["w2"])
                model.b2 += learning_rate * (g_p["b2"] - g_n["b2"])
        model.epoch_losses.append(loss_sum / count)
    return model


def score_pair(model, table, a, b):
    if a == b:
        raise SamePair(f"cannot score a pair of identical terms: {a!r}")
    for node in (a, b):
        if node not in table:
            raise NodeNotFound(node)
    phi = pair_features(table.vector_of(a), table.vector_of(b))
    return score_features(model, phi)


@dataclass(frozen=True)
class RankedRow:
    code_a: str
    code_b: str
    score: float
    label_a: str
    label_b: str
    promising: bool
    secondary: bool


@dataclass
class RankedTable:
    rows: list
    promising_threshold: float = 0.7
    secondary_threshold: float = 0.5


def rank_candidates(model, table, vocab, pair_filter,
                    promising_threshold=0.7, secondary_threshold=0.5):
    """Score the filtered code pairs and sort descending.

    Thresholds are strict: a score of exactly 0.7 is not promising.
    """
    rows = []
    for code_a, code_b in pair_filter:
        a, b = f"m:{code_a}", f"m:{code_b}"
        score = score_pair(model, table, a, b)
        rows.append(RankedRow(
            code_a, code_b, score,
            vocab.label_of(code_a), vocab.label_of(code_b),
            promising=score > promising_threshold,
            secondary=score > secondary_threshold,
        ))
    rows.sort(key=lambda r: (-r.score, r.code_a, r.code_b))
    return RankedTable(rows, promising_threshold, secondary_threshold)


RANK_HEADER = "code_a\tcode_b\tscore\tlabel_a\tlabel_b\tpromising"


def format_ranked_table(table):
    """Tab-separated table matching the ranked-pair report layout."""
    lines = [RANK_HEADER]
    for r in table.rows:
        lines.append("\t".join([
            r.code_a, r.code_b, repr(r.score), r.label_a, r.label_b,
            "true" if r.promising else "false",
        ]))
    return "\n".join(lines) + "\n"


def save_model(model, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{model.hidden} {model.dim} {model.seed}\n")
            for row in model.w1:
                fh.write(" ".join(repr(float(x)) for x in row) + "\n")
            fh.write(" ".join(repr(float(x)) for x in model.b1) + "\n")
            fh.write(" ".join(repr(float(x)) for x in model.w2) + "\n")
            fh.write(repr(float(model.b2)) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    hidden, dim, seed = (int(x) for x in lines[0].split())
    w1 = np.array([[float(x) for x in lines[1 + i].split()] for i in range(hidden)])
    b1 = np.array([float(x) for x in lines[1 + hidden].split()])
    w2 = np.array([float(x) for x in lines[2 + hidden].split()])
    b2 = float(lines[3 + hidden])
    return PredictorModel(w1, b1, w2, b2, seed=seed)
