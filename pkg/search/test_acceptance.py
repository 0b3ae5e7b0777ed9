"""
End-to-end checks at corpus scale.

The 36,735-item corpus mirrors a deduplicated question set: 2,449 tight
clusters of 15 points in 32 dimensions with oracle qrels.
"""
import math

import numpy as np
import pytest

from baselines.brute_force import brute_force_pairwise, brute_force_topn
from evalx.harness import evaluate
from evalx.models import QRels
from ingest.synthetic import synth_corpus, synth_text_corpus
from kmeans.models import KMeansConfig
from ktree.builder import build_tree, shared_depth
from scorers.lexical import LexicalScorer
from .beam import batch_search, beam_search_pairwise
from .models import SearchParams, SearchQuery

CORPUS_SIZE = 2449 * 15
SAMPLED_QUERIES = 200


@pytest.fixture(scope="module")
def corpus():
    return synth_corpus(2449, 15, 32, 1.0, seed=0)


@pytest.fixture(scope="module")
def sampled_queries(corpus):
    rng = np.random.default_rng(1)
    query_ids = np.sort(rng.choice(corpus.embeddings.count, size=SAMPLED_QUERIES, replace=False))
    return [
        SearchQuery(key=int(q), vector=corpus.embeddings.vector(int(q)), exclude_ids=frozenset({int(q)}))
        for q in query_ids
    ]


@pytest.fixture(scope="module")
def trees(corpus):
    """Trees of branching 5, 8 and 10 with the same number of levels."""
    depth = shared_depth(CORPUS_SIZE, 16, 5)
    return {
        branching: build_tree(
            corpus.embeddings,
            branching=branching,
            leaf_capacity=16,
            kmeans_config=KMeansConfig(k=branching, seed=0),
            max_depth=depth,
            threads=4,
        )
        for branching in (5, 8, 10)
    }


@pytest.mark.slow
class TestCorpusScale:
    """Evaluation counts and accuracy loss on 36,735 clustered vectors."""

    params = SearchParams(beam_width=20, top_n=20, metric="euclidean")

    def test_eval_count_decreases_with_branching(self, corpus, trees, sampled_queries):
        assert corpus.embeddings.count == CORPUS_SIZE
        means = {}
        for branching, tree in trees.items():
            batch = batch_search(tree, sampled_queries, self.params, threads=4)
            assert batch.ok
            means[branching] = batch.mean_eval_count
            assert batch.min_eval_count <= batch.mean_eval_count <= batch.max_eval_count
        assert means[10] < means[8] < means[5] < CORPUS_SIZE
        assert means[5] < 0.2 * CORPUS_SIZE

    def test_tree_map_within_ten_percent_of_compute_all(self, corpus, trees, sampled_queries):
        qrels = QRels({q.key: corpus.qrels.relevant(q.key) for q in sampled_queries})
        exact = {
            q.key: brute_force_topn(corpus.embeddings, q.vector, "euclidean", 20, exclude_ids=q.exclude_ids)
            for q in sampled_queries
        }
        tree_results = batch_search(trees[5], sampled_queries, self.params, threads=4).results
        exact_report = evaluate(exact, qrels)
        tree_report = evaluate(tree_results, qrels)
        assert exact_report.p_at_1 == 1.0
        assert tree_report.map_score >= 0.9 * exact_report.map_score
        assert exact_report.mean_eval_count == CORPUS_SIZE - 1

    @pytest.mark.parametrize("branching", [5, 8, 10])
    def test_unbounded_build_depth_within_log_bound(self, corpus, branching):
        """
        Given: The clustered corpus and no depth limit
        When: Building with leaf capacity 16
        Then: Depth stays within two levels of log_branching(n / 16) and leaves partition the items
        """
        tree = build_tree(
            corpus.embeddings,
            branching=branching,
            leaf_capacity=16,
            kmeans_config=KMeansConfig(k=branching, seed=0),
            threads=4,
        )
        assert tree.depth <= math.ceil(math.log(CORPUS_SIZE / 16, branching)) + 2
        assert tree.oversized_leaves == 0
        assert sum(leaf.size for leaf in tree.leaves()) == CORPUS_SIZE


class TestPairwiseSoundness:
    """Pairwise routing on a corpus whose texts encode the cluster structure."""

    def test_precision_close_to_exhaustive_scoring(self):
        """
        Given: 480 texts in 20 lexical clusters and a tree with three representatives per node
        When: Searching every item with the lexical scorer
        Then: Tree P@1 is at least 95% of exhaustive pairwise P@1
        """
        corpus = synth_text_corpus(20, 24, 16, 1.0, seed=0)
        tree = build_tree(
            corpus.embeddings, branching=5, leaf_capacity=16, kmeans_config=KMeansConfig(k=5, seed=0), rep_count=3
        )
        scorer = LexicalScorer()
        params = SearchParams(beam_width=20, top_n=20)
        tree_results, exact_results = {}, {}
        for query_id in corpus.qrels:
            text = corpus.items.text(query_id)
            tree_results[query_id] = beam_search_pairwise(
                tree, text, scorer, params.excluding({query_id}), corpus.items
            )
            exact_results[query_id] = brute_force_pairwise(
                corpus.items, text, scorer, 20, exclude_ids={query_id}
            )
        tree_report = evaluate(tree_results, corpus.qrels)
        exact_report = evaluate(exact_results, corpus.qrels)
        assert exact_report.p_at_1 == 1.0
        assert tree_report.p_at_1 >= 0.95 * exact_report.p_at_1
