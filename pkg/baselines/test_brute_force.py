import numpy as np
import pytest

from ktree_search.exceptions import ContractViolationError, InvalidInputError
from scorers.lexical import LexicalScorer
from vecstore.models import EmbeddingSet, ItemTable
from vecstore.ops import normalize
from .brute_force import brute_force_pairwise, brute_force_topn


def random_embeddings(count, dim, seed=0):
    return EmbeddingSet.from_array(np.random.default_rng(seed).normal(size=(count, dim)).astype(np.float32))


class TestBruteForceTopN:
    """Test cases for the compute-all vector baseline."""

    def setup_method(self):
        """Set up 200 random 6-d vectors."""
        self.embeddings = random_embeddings(200, 6)

    def test_self_match_at_distance_zero(self):
        result = brute_force_topn(self.embeddings, self.embeddings.vector(7), "euclidean", top_n=1)
        assert result.ranked == ((7, 0.0),)

    def test_eval_count_is_item_count_minus_exclusions(self):
        query = self.embeddings.vector(0)
        assert brute_force_topn(self.embeddings, query, "cosine", 5).eval_count == 200
        assert brute_force_topn(self.embeddings, query, "cosine", 5, exclude_ids={0, 1, 500}).eval_count == 198

    def test_excluded_ids_never_appear(self):
        result = brute_force_topn(self.embeddings, self.embeddings.vector(3), "euclidean", 10, exclude_ids={3})
        assert 3 not in result.ids
        assert len(result.ranked) == 10

    def test_cosine_and_euclidean_agree_on_normalized_vectors(self):
        """
        Given: Unit-norm vectors
        When: Ranking 100 random queries under both metrics
        Then: The ranked id sequences are identical
        """
        unit = normalize(self.embeddings)
        for query in normalize(random_embeddings(100, 6, seed=1)).vectors:
            cosine = brute_force_topn(unit, query, "cosine", 10)
            euclidean = brute_force_topn(unit, query, "euclidean", 10)
            assert cosine.ids == euclidean.ids

    def test_ties_go_to_lower_id(self):
        embeddings = EmbeddingSet.from_array(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]], dtype=np.float32))
        result = brute_force_topn(embeddings, np.array([1.0, 0.0]), "euclidean", 3)
        assert result.ids == [0, 2, 1]

    def test_result_independent_of_item_order(self):
        permutation = np.random.default_rng(2).permutation(200)
        shuffled = EmbeddingSet.from_array(self.embeddings.vectors[permutation])
        query = random_embeddings(1, 6, seed=3).vectors[0]
        original = brute_force_topn(self.embeddings, query, "euclidean", 10)
        reordered = brute_force_topn(shuffled, query, "euclidean", 10)
        assert [int(permutation[i]) for i in reordered.ids] == original.ids
        assert reordered.scores == original.scores

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            brute_force_topn(self.embeddings, np.ones(5), "cosine", 3)


class TestBruteForcePairwise:
    """Test cases for exhaustive pair scoring."""

    def test_ranks_by_scorer(self):
        items = ItemTable.from_texts(["red apple", "green apple", "blue car", "red car"])
        result = brute_force_pairwise(items, "red apple", LexicalScorer(), top_n=3, exclude_ids={0})
        assert result.ids == [1, 3, 2]
        assert result.eval_count == 3

    def test_contract_is_enforced(self):
        class Broken:
            name = "broken"
            batch_limit = 10

            def score_batch(self, pairs):
                return [2.0] * len(pairs)

        with pytest.raises(ContractViolationError):
            brute_force_pairwise(ItemTable.from_texts(["a", "b"]), "a", Broken(), top_n=1)
