"""
Synthetic corpora with a known answer.

Points are drawn from a Gaussian mixture whose means are pushed far apart
relative to the within-cluster spread. Each item's relevant item is its
nearest same-cluster neighbor by exact euclidean distance, so compute-all
search reaches P@1 = 1.0 on these qrels.
"""
import logging
from typing import NamedTuple

import numpy as np

from evalx.models import QRels
from ktree_search.exceptions import InvalidInputError
from vecstore.models import EmbeddingSet, ItemTable
from vecstore.ops import score_rows

logger = logging.getLogger(__name__)

MIN_SEPARATION = 10.0


class SyntheticCorpus(NamedTuple):
    items: ItemTable
    embeddings: EmbeddingSet
    qrels: QRels
    labels: np.ndarray


def _check_positive(**params) -> None:
    for name, value in params.items():
        if isinstance(value, bool) or value <= 0:
            raise InvalidInputError(f"{name} must be positive, got {value!r}")


def _min_pairwise_distance(means: np.ndarray) -> float:
    best = np.inf
    for i in range(means.shape[0] - 1):
        best = min(best, float(score_rows(means[i], means[i + 1:], "euclidean").min()))
    return best


def _spread_means(rng: np.random.Generator, num_clusters: int, dim: int, min_distance: float) -> np.ndarray:
    means = rng.standard_normal((num_clusters, dim))
    if num_clusters > 1:
        closest = _min_pairwise_distance(means)
        if closest <= 0.0:
            raise InvalidInputError("two cluster means coincide; pick another seed")
        means *= max(1.0, min_distance / closest)
    return means


def _nearest_in_cluster(vectors: np.ndarray, labels: np.ndarray) -> QRels:
    relevance = {}
    for cluster in np.unique(labels):
        members = np.flatnonzero(labels == cluster)
        for item_id in members:
            others = members[members != item_id]
            distances = score_rows(vectors[item_id], vectors[others], "euclidean")
            order = np.lexsort((others, distances))
            relevance[int(item_id)] = frozenset([int(others[order[0]])])
    return QRels(relevance)


def synth_corpus(
    num_clusters: int,
    points_per_cluster: int,
    dim: int,
    spread: float,
    seed: int,
    separation: float = 20.0,
) -> SyntheticCorpus:
    """
    Generate ``num_clusters * points_per_cluster`` labeled float32 vectors.

    Items are laid out cluster by cluster; item ``i`` belongs to cluster
    ``i // points_per_cluster``. Cluster means are at least
    ``separation * spread`` apart.
    """
    _check_positive(num_clusters=num_clusters, points_per_cluster=points_per_cluster, dim=dim, spread=spread)
    if isinstance(seed, bool) or seed < 0:
        raise InvalidInputError(f"seed must be a nonnegative integer, got {seed!r}")
    if points_per_cluster < 2:
        raise InvalidInputError("each cluster needs at least 2 points so every item has a relevant neighbor")
    if separation < MIN_SEPARATION:
        raise InvalidInputError(f"separation must be at least {MIN_SEPARATION}, got {separation}")

    rng = np.random.default_rng(seed)
    means = _spread_means(rng, num_clusters, dim, separation * spread)
    labels = np.repeat(np.arange(num_clusters, dtype=np.int64), points_per_cluster)
    noise = rng.standard_normal((labels.shape[0], dim)) * spread
    vectors = (means[labels] + noise).astype(np.float32)

    items = ItemTable.from_texts(
        [f"cluster {c} item {i}" for i, c in enumerate(labels.tolist())]
    )
    embeddings = EmbeddingSet(items=items, vectors=vectors)
    qrels = _nearest_in_cluster(embeddings.vectors, labels)
    labels.setflags(write=False)
    logger.info(
        "Synthesized %d clusters x %d points in %d dimensions (seed %d)",
        num_clusters, points_per_cluster, dim, seed,
    )
    return SyntheticCorpus(items, embeddings, qrels, labels)


def synth_text_corpus(
    num_clusters: int,
    points_per_cluster: int,
    dim: int,
    spread: float,
    seed: int,
    words_per_cluster: int = 4,
) -> SyntheticCorpus:
    """
    Gaussian corpus whose texts encode the cluster structure lexically.

    Consecutive items of a cluster form twins. An item's text holds its
    cluster's vocabulary, a token shared only with its twin and a token of
    its own, so the twin is its unique best lexical match and the qrels
    point there.
    """
    _check_positive(words_per_cluster=words_per_cluster)
    if points_per_cluster % 2:
        raise InvalidInputError(f"points_per_cluster must be even to pair twins, got {points_per_cluster}")
    base = synth_corpus(num_clusters, points_per_cluster, dim, spread, seed)

    texts, relevance = [], {}
    for item_id, cluster in enumerate(base.labels.tolist()):
        vocabulary = " ".join(f"c{cluster}w{j}" for j in range(words_per_cluster))
        texts.append(f"{vocabulary} twin{item_id // 2} item{item_id}")
        relevance[item_id] = frozenset([item_id ^ 1])

    items = ItemTable.from_texts(texts)
    return SyntheticCorpus(
        items=items,
        embeddings=EmbeddingSet(items=items, vectors=base.embeddings.vectors),
        qrels=QRels(relevance),
        labels=base.labels,
    )
