"""End-to-end acceptance checks for the discovery pipeline.

Each test exercises one guarantee at its stated tolerance and prints a
single PASS line so the suite output doubles as a checklist.  Every
numeric claim is verified against an independent oracle: exhaustive
enumeration for paths, O(n^2) scans for KNN, a dense eigensolver for the
layout, closed forms for LDA, and finite differences for gradients.
"""

import json
import subprocess
import sys
import time

import numpy as np

from conftest import (
    brute_force_knn_edges,
    brute_force_shortest,
    dense_top2_eigenpairs,
    make_token_set,
)
from lbd.embed import EmbedParams, train_embeddings
from lbd.errors import NoPath
from lbd.graph import build_graph, shortest_path
from lbd.ingest import VocabEntry, Vocabulary
from lbd.predictor import (
    NEGATIVE,
    POSITIVE,
    PairExample,
    format_ranked_table,
    init_model,
    pair_features,
    rank_candidates,
    score_features,
    score_gradients,
    score_pair,
    train_predictor,
)
from lbd.topicquery import (
    BiasWeights,
    LdaParams,
    QueryParams,
    TopicNetwork,
    apply_bias,
    build_knn,
    fit_lda,
    network_path,
    power_iteration_eigenpairs,
    run_query,
    serialize_result,
    topic_listings,
    via_path,
)
from test_predictor import flatten_params, set_params, synthetic_table
from test_topicquery import (
    bridged_corpus_graph,
    planted_two_theme_corpus,
    query_fixture,
    theme_purity,
)


def report(name, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE PASS: {name}{suffix}")


def random_connected_graph(rng, n):
    """Random connected undirected graph on n string-named nodes."""
    names = [f"v{i}" for i in range(n)]
    adjacency = {v: set() for v in names}
    order = list(names)
    rng.shuffle(order)
    for i in range(1, n):
        j = rng.integers(0, i)
        adjacency[order[i]].add(order[j])
        adjacency[order[j]].add(order[i])
    extra = rng.integers(0, n)
    for _ in range(extra):
        a, b = rng.choice(names, size=2, replace=False)
        if a != b:
            adjacency[a].add(b)
            adjacency[b].add(a)
    return {v: sorted(nbrs) for v, nbrs in adjacency.items()}


class TestPathOracles:
    def test_shortest_paths_match_enumeration(self):
        started = time.monotonic()
        rng = np.random.default_rng(2024)
        checked = 0
        for trial in range(200):
            n = int(rng.integers(3, 13))
            adjacency = random_connected_graph(rng, n)
            names = sorted(adjacency)
            src, dst = rng.choice(names, size=2, replace=False)

            vectors = {v: rng.normal(size=3) for v in names}
            weights = {}
            for a in names:
                for b in adjacency[a]:
                    d = float(np.linalg.norm(vectors[a] - vectors[b]))
                    weights[frozenset((a, b))] = d
            net = TopicNetwork(vectors=vectors, knn_k=0,
                               edges=dict(weights),
                               adjacency=adjacency)
            got = network_path(net, src, dst)
            cost = sum(weights[frozenset(p)] for p in zip(got, got[1:]))
            best_cost, _ = brute_force_shortest(
                adjacency, src, dst, weights=weights)
            assert abs(cost - best_cost) < 1e-9, trial

            # Hop-count check: uniform weights on the same instance.
            hops, _ = brute_force_shortest(adjacency, src, dst)
            uniform = TopicNetwork(
                vectors=vectors, knn_k=0,
                edges={k: 1.0 for k in weights},
                adjacency=adjacency)
            upath = network_path(uniform, src, dst)
            assert len(upath) - 1 == hops, trial
            checked += 1
        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        report("shortest-path oracle",
               f"{checked} instances, {elapsed:.2f}s")

    def test_bipartite_bfs_matches_enumeration(self):
        rng = np.random.default_rng(11)
        token_sets = []
        tokens = [f"m:c{i}" for i in range(3)] + \
                 [f"l:noun:w{i}" for i in range(3)]
        for s in range(6):
            chosen = rng.choice(tokens, size=3, replace=False)
            token_sets.append(make_token_set(
                f"s:d:{s}", {t: 1 for t in chosen}))
        graph = build_graph(token_sets)
        coded = graph.coded_terms()
        pairs = 0
        for i, a in enumerate(coded):
            for b in coded[i + 1:]:
                oracle = brute_force_shortest(graph.adjacency, a, b)
                try:
                    path = shortest_path(graph, a, b)
                except NoPath:
                    assert oracle is None
                    continue
                assert path.length == oracle[0]
                pairs += 1
        report("bipartite BFS oracle", f"{pairs} pairs")


class TestKnnOracle:
    def test_edges_match_brute_force(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            n = int(rng.integers(5, 201))
            k = int(rng.integers(1, 11))
            d = int(rng.integers(2, 65))
            vectors = {f"p{i:03d}": rng.normal(size=d) for i in range(n)}
            net = build_knn(vectors, k)
            expected = brute_force_knn_edges(vectors, k)
            assert set(net.edges) == expected, trial
        report("KNN oracle", "50 point sets")


class TestLayoutOracle:
    def test_power_iteration_matches_dense_solver(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for trial in range(50):
            d = int(rng.integers(2, 21))
            a = rng.normal(size=(d, d))
            cov = a @ a.T / d
            vals, vecs = power_iteration_eigenpairs(cov, 2)
            ref_vals, ref_vecs = dense_top2_eigenpairs(cov)
            err = max(
                float(np.max(np.abs(np.asarray(vals) - ref_vals))),
                float(np.max(np.abs(np.asarray(vecs) - ref_vecs))),
            )
            worst = max(worst, err)
            assert err < 1e-6, trial
        report("PCA eigenpair oracle", f"worst error {worst:.2e}")


class TestLdaCorrectness:
    def test_single_topic_closed_form(self):
        docs = [
            make_token_set("s:d:0", {"l:noun:sun": 3, "l:noun:moon": 1}),
            make_token_set("s:d:1", {"l:noun:moon": 2, "l:noun:tide": 2}),
        ]
        beta = 0.01
        model = fit_lda(docs, LdaParams(topics=1, beta=beta, seed=0,
                                        gibbs_iterations=10))
        totals = {"l:noun:moon": 3, "l:noun:sun": 3, "l:noun:tide": 2}
        n = sum(totals.values())
        v = len(totals)
        for j, key in enumerate(model.vocab):
            expected = (totals[key] + beta) / (n + beta * v)
            assert abs(model.theta[0, j] - expected) < 1e-12
        report("LDA single-topic closed form", "1e-12")

    def test_planted_themes_recovered(self):
        started = time.monotonic()
        passing = 0
        for seed in range(10):
            docs = planted_two_theme_corpus(seed)
            model = fit_lda(docs, LdaParams(
                topics=2, alpha=0.1, beta=0.01,
                gibbs_iterations=200, seed=seed))
            if theme_purity(model) >= 0.9:
                passing += 1
        elapsed = time.monotonic() - started
        assert passing >= 9
        assert elapsed < 30.0
        report("LDA planted-theme recovery",
               f"{passing}/10 seeds, {elapsed:.2f}s")

    def test_topic_rows_normalized(self):
        rng = np.random.default_rng(5)
        vocab = [f"l:noun:w{i}" for i in range(30)]
        docs = []
        for s in range(40):
            chosen = rng.choice(vocab, size=6, replace=False)
            docs.append(make_token_set(
                f"s:d:{s}", {t: int(rng.integers(1, 4)) for t in chosen}))
        for k in (1, 3, 7):
            model = fit_lda(docs, LdaParams(
                topics=k, alpha=0.5, gibbs_iterations=50, seed=k))
            sums = model.theta.sum(axis=1)
            assert np.all(np.abs(sums - 1.0) < 1e-9)
        report("topic distribution normalization", "1e-9")


class TestPredictorAcceptance:
    def test_gradient_check_hundred_configs(self):
        rng = np.random.default_rng(17)
        eps = 1e-5
        worst = 0.0
        for trial in range(100):
            dim = int(rng.integers(2, 10))
            hidden = int(rng.integers(2, 12))
            model = init_model(dim, hidden=hidden, seed=trial)
            phi = rng.normal(size=2 * dim)
            _, grads = score_gradients(model, phi)
            flat_grad = np.concatenate([
                grads["w1"].ravel(), grads["b1"],
                grads["w2"], [grads["b2"]],
            ])
            theta = flatten_params(model)
            numeric = np.zeros_like(theta)
            for i in range(len(theta)):
                up, down = theta.copy(), theta.copy()
                up[i] += eps
                down[i] -= eps
                set_params(model, up)
                s_up = score_features(model, phi)
                set_params(model, down)
                s_down = score_features(model, phi)
                numeric[i] = (s_up - s_down) / (2 * eps)
            set_params(model, theta)
            scale = max(float(np.max(np.abs(numeric))), 1e-8)
            err = float(np.max(np.abs(flat_grad - numeric)) / scale)
            worst = max(worst, err)
            assert err < 1e-4, trial
        report("gradient finite-difference check",
               f"100 configs, worst {worst:.2e}")

    def test_held_out_ranking_accuracy(self):
        table, pairs = synthetic_table(n_pos=30, n_neg=30, seed=0)
        positives = [p for p in pairs if p.label == POSITIVE]
        negatives = [p for p in pairs if p.label == NEGATIVE]
        train = positives[:20] + negatives[:20]
        model = train_predictor(train, table, epochs=40, seed=0)
        held = list(zip(positives[20:], negatives[20:]))
        correct = 0
        for pos, neg in held:
            sp = score_pair(model, table, pos.a, pos.b)
            sn = score_pair(model, table, neg.a, neg.b)
            correct += sp > sn
        accuracy = correct / len(held)
        assert accuracy >= 0.9
        report("held-out ranking accuracy", f"{accuracy:.2f}")

    def test_symmetry_thousand_pairs(self):
        table, _ = synthetic_table(n_pos=30, n_neg=30, seed=1)
        model = init_model(table.dim, seed=3)
        names = sorted(table.vectors)
        rng = np.random.default_rng(9)
        for _ in range(1000):
            a, b = rng.choice(names, size=2, replace=False)
            fwd = score_features(
                model, pair_features(table.vector_of(a),
                                     table.vector_of(b)))
            rev = score_features(
                model, pair_features(table.vector_of(b),
                                     table.vector_of(a)))
            assert fwd == rev
        report("score symmetry", "1000 pairs bit-exact")


class TestBiasSemantics:
    def test_coded_weight_multiplies_exactly(self):
        docs = [
            make_token_set("s:d:0", {"m:c1": 2, "l:noun:x": 3,
                                     "e:tree frog": 1}),
            make_token_set("s:d:1", {"m:c1": 1, "m:c2": 4,
                                     "n:tree_frog": 2}),
        ]
        base = sum(c for d in docs
                   for t, c in d.counts.items() if t.startswith("m:"))
        for w in range(1, 6):
            weights = BiasWeights(coded=w, lemma=1, entity=1, ngram=1)
            biased = [apply_bias(d, weights) for d in docs]
            total = sum(c for d in biased
                        for t, c in d.counts.items() if t.startswith("m:"))
            assert total == w * base
            for before, after in zip(docs, biased):
                for t, c in before.counts.items():
                    if not t.startswith("m:"):
                        assert after.counts[t] == c
        report("bias semantics", "coded weight 1..5 exact")


class TestEndToEndDeterminism:
    def write_synthetic_corpus(self, tmp_path, n_docs=200):
        rng = np.random.default_rng(42)
        themes = {
            "alpha": ["rainfall", "flooding", "rivers", "erosion",
                      "watershed", "sediment"],
            "beta": ["antibody", "serum", "immunity", "vaccines",
                     "pathogen", "infection"],
        }
        anchors = {"alpha": "heavy rainfall", "beta": "immune serum"}
        corpus = tmp_path / "corpus.jsonl"
        with open(corpus, "w") as fh:
            for i in range(n_docs):
                theme = "alpha" if i % 2 == 0 else "beta"
                words = list(rng.choice(themes[theme], size=4,
                                        replace=False))
                words.append(anchors[theme])
                if i % 5 == 0:
                    words.append("bridging linkage")
                body = " ".join(words).capitalize() + "."
                fh.write(json.dumps(
                    {"doc_id": f"d{i:03d}", "title": "",
                     "body": body}) + "\n")
        vocab = tmp_path / "vocab.tsv"
        vocab.write_text(
            "c1000001\tHeavy Rainfall\theavy rainfall\n"
            "c2000002\tImmune Serum\timmune serum\n")
        return corpus, vocab

    def run_pipeline(self, art, corpus, vocab, out):
        stages = [
            ["ingest", str(corpus), str(vocab)],
            ["build-graph"],
            ["embed", "--dim", "16", "--epochs", "2",
             "--walks-per-node", "2", "--walk-length", "6",
             "--seed", "0"],
            ["train-predictor", "--epochs", "3", "--seed", "0"],
            ["query", "c1000001", "c2000002", "--topics", "4",
             "--knn-k", "3", "--alpha", "0.2",
             "--gibbs-iterations", "40", "--seed", "0",
             "--output", str(out)],
        ]
        for cmd in stages:
            proc = subprocess.run(
                [sys.executable, "-m", "lbd.cli",
                 "--artifact-dir", str(art)] + cmd,
                capture_output=True, text=True)
            assert proc.returncode == 0, (cmd, proc.stderr, proc.stdout)

    def test_pipeline_twice_is_byte_identical(self, tmp_path):
        started = time.monotonic()
        corpus, vocab = self.write_synthetic_corpus(tmp_path)
        art1, art2 = tmp_path / "run1", tmp_path / "run2"
        out1, out2 = tmp_path / "q1.json", tmp_path / "q2.json"
        self.run_pipeline(art1, corpus, vocab, out1)
        self.run_pipeline(art2, corpus, vocab, out2)
        for name in ("tokens.jsonl", "graph.txt", "embeddings.txt",
                     "predictor.txt"):
            assert (art1 / name).read_bytes() == \
                (art2 / name).read_bytes(), name
        assert out1.read_bytes() == out2.read_bytes()
        elapsed = time.monotonic() - started
        assert elapsed < 120.0
        report("end-to-end determinism",
               f"200-doc corpus, {elapsed:.1f}s")


class TestDiscoveryProperty:
    def test_connector_appears_on_active_path(self):
        connectors = {f"l:noun:conn{i}" for i in range(6)}
        hits = 0
        for seed in range(10):
            graph = bridged_corpus_graph()
            table = train_embeddings(graph, EmbedParams(
                dim=12, walk_length=8, walks_per_node=4,
                epochs=3, seed=seed))
            params = QueryParams(topics=6, knn_k=3, alpha=0.2,
                                 gibbs_iterations=80, seed=seed)
            try:
                result = run_query(graph, table, "csrc", "ctgt", params)
            except NoPath:
                continue
            found = False
            for node in result.network.active_path:
                if not node.startswith("topic_"):
                    continue
                k = int(node.split("_")[1])
                keys = {key for key, _ in result.listings[k]}
                if keys & connectors:
                    found = True
                    break
            hits += found
        assert hits >= 8
        report("discovery property", f"{hits}/10 seeds")


class TestFormatFidelity:
    def test_rank_table_golden(self):
        table, pairs = synthetic_table(n_pos=6, n_neg=6, seed=0)
        positives = [p for p in pairs if p.label == POSITIVE]
        negatives = [p for p in pairs if p.label == NEGATIVE]
        train = positives[:4] + negatives[:4]
        model = train_predictor(train, table, epochs=20, seed=0)
        codes = sorted(n[2:] for n in table.vectors)
        vocab = Vocabulary([
            VocabEntry(code, code.upper(), (code,)) for code in codes
        ])
        pair_filter = [(p.a[2:], p.b[2:])
                       for p in positives[4:] + negatives[4:]]
        ranked = rank_candidates(model, table, vocab, pair_filter)
        text = format_ranked_table(ranked)
        lines = text.strip().split("\n")
        assert lines[0] == \
            "code_a\tcode_b\tscore\tlabel_a\tlabel_b\tpromising"
        scores = []
        for line in lines[1:]:
            cols = line.split("\t")
            assert len(cols) == 6
            score = float(cols[2])
            scores.append(score)
            assert cols[3] == cols[0].upper()
            assert cols[4] == cols[1].upper()
            assert cols[5] == ("true" if score > 0.7 else "false")
        assert scores == sorted(scores, reverse=True)
        report("rank table format", f"{len(scores)} rows")

    def test_topic_listing_golden(self):
        graph, table = query_fixture(seed=0)
        params = QueryParams(topics=3, knn_k=2, alpha=0.2,
                             gibbs_iterations=40, seed=0)
        result = run_query(graph, table, "csrc", "ctgt", params)
        doc = json.loads(serialize_result(result))
        assert len(doc["topics"]) == 3
        for topic in doc["topics"]:
            terms = topic["terms"]
            assert len(terms) == 10
            probs = [t["probability"] for t in terms]
            assert probs == sorted(probs, reverse=True)
            for t in terms:
                assert t["display"] == f"{t['key']}: {t['probability']:.3f}"
                prefix = t["key"].split(":")[0]
                assert prefix in ("l", "n", "e", "m")
        report("topic listing format", "10 entries, type:key: prob")


class TestViaPathRule:
    def test_line_retraversal_flagged_invalid(self):
        vectors = {"a": np.array([0.0, 0.0]),
                   "b": np.array([1.0, 0.0]),
                   "c": np.array([2.0, 0.0])}
        net = build_knn(vectors, 1)
        path, valid = via_path(net, "a", "c", "b")
        assert path == ["a", "b", "c", "b"]
        assert valid is False
        report("via-path retraversal rule", "flagged invalid")
