"""
Vector math primitives.

Vectors are stored as float32; every reduction here runs in float64. Row
scores are computed one row at a time along the contiguous axis, so a
(query, item) score does not depend on which other rows share the batch.
Brute force, the kd-tree and the k-means tree all score through
``score_rows`` and therefore agree bit for bit.
"""
import logging
from typing import Iterable, Literal, Sequence

import numpy as np

from ktree_search.exceptions import DomainError, InvalidInputError
from .models import EmbeddingSet, ItemTable, LabeledPair, TokenMatrix

logger = logging.getLogger(__name__)

Metric = Literal["cosine", "euclidean"]
METRICS = ("cosine", "euclidean")
POOLING_STRATEGIES = ("first", "mean", "max")

_CHUNK_ROWS = 4096


def check_metric(metric: str) -> str:
    """Validate a metric name."""
    if metric not in METRICS:
        raise InvalidInputError(f"unknown metric {metric!r}, expected one of {METRICS}")
    return metric


def higher_is_better(metric: str) -> bool:
    """Cosine is a similarity; euclidean is a distance."""
    return check_metric(metric) == "cosine"


def _as_vector(values, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    return vector


def _row_norms(rows: np.ndarray) -> np.ndarray:
    return np.sqrt(np.multiply(rows, rows).sum(axis=1))


def score_rows(query, rows, metric: str) -> np.ndarray:
    """
    Score ``query`` against every row of ``rows``.

    Returns float64 cosine similarities or euclidean distances.
    """
    check_metric(metric)
    q = _as_vector(query, "query")
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[1] != q.shape[0]:
        raise InvalidInputError(
            f"dimension mismatch: query has {q.shape[0]}, rows have shape {rows.shape}"
        )
    out = np.empty(rows.shape[0], dtype=np.float64)
    if metric == "cosine":
        q_norm = float(np.sqrt(np.multiply(q, q).sum()))
        if q_norm == 0.0:
            raise DomainError("cosine similarity of a zero-norm query is undefined")
    for start in range(0, rows.shape[0], _CHUNK_ROWS):
        block = rows[start:start + _CHUNK_ROWS].astype(np.float64)
        if metric == "euclidean":
            diff = block - q
            out[start:start + block.shape[0]] = np.sqrt(np.multiply(diff, diff).sum(axis=1))
        else:
            norms = _row_norms(block)
            if np.any(norms == 0.0):
                bad = start + int(np.flatnonzero(norms == 0.0)[0])
                raise DomainError(f"cosine similarity with zero-norm row {bad} is undefined")
            dots = np.multiply(block, q).sum(axis=1)
            out[start:start + block.shape[0]] = np.clip(dots / (norms * q_norm), -1.0, 1.0)
    return out


def score_centroids(query, centroids, metric: str) -> np.ndarray:
    """
    Routing scores for internal-node centroids.

    Same as ``score_rows`` except that under cosine a zero-norm centroid
    (the mean of opposing vectors) scores -1, the worst similarity.
    """
    centroids = np.asarray(centroids)
    if check_metric(metric) != "cosine" or centroids.ndim != 2:
        return score_rows(query, centroids, metric)
    live = _row_norms(centroids.astype(np.float64)) > 0.0
    if live.all():
        return score_rows(query, centroids, metric)
    out = np.full(centroids.shape[0], -1.0, dtype=np.float64)
    if live.any():
        out[live] = score_rows(query, centroids[live], metric)
    else:
        # Still reject a bad query.
        score_rows(query, centroids[:0], metric)
    return out


def cosine_similarity(u, v) -> float:
    """Return u·v / (‖u‖‖v‖)."""
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    if u.shape != v.shape:
        raise InvalidInputError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(score_rows(u, v[np.newaxis, :], "cosine")[0])


def euclidean_distance(u, v) -> float:
    """Return ‖u − v‖₂."""
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    if u.shape != v.shape:
        raise InvalidInputError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(score_rows(u, v[np.newaxis, :], "euclidean")[0])


def pool(tokens, strategy: str) -> np.ndarray:
    """Reduce a token matrix to one sentence vector."""
    if not isinstance(tokens, TokenMatrix):
        tokens = TokenMatrix(np.asarray(tokens))
    rows = tokens.rows
    if strategy == "first":
        return rows[0].copy()
    if strategy == "mean":
        return rows.astype(np.float64).mean(axis=0).astype(np.float32)
    if strategy == "max":
        return rows.max(axis=0)
    raise InvalidInputError(
        f"unknown pooling strategy {strategy!r}, expected one of {POOLING_STRATEGIES}"
    )


def pool_tokens(matrices: Sequence[TokenMatrix], strategy: str, items: ItemTable = None) -> EmbeddingSet:
    """Pool one token matrix per item into an embedding set."""
    if not matrices:
        raise InvalidInputError("no token matrices to pool")
    dims = {m.dim for m in matrices}
    if len(dims) != 1:
        raise InvalidInputError(f"token matrices disagree on dimension: {sorted(dims)}")
    vectors = np.stack([pool(m, strategy) for m in matrices])
    return EmbeddingSet.from_array(vectors, items=items)


def cosine_mse_loss(embeddings: EmbeddingSet, pairs: Iterable[LabeledPair]) -> float:
    """
    Mean over pairs of (cos(u, v) − y)².

    A diagnostic of how well imported embeddings agree with pair labels.
    """
    pairs = list(pairs)
    if not pairs:
        raise InvalidInputError("cosine MSE needs at least one labeled pair")
    total = 0.0
    for pair in pairs:
        for item_id in (pair.id_a, pair.id_b):
            if not 0 <= item_id < embeddings.count:
                raise InvalidInputError(f"pair references unknown item id {item_id}")
        cos = cosine_similarity(embeddings.vectors[pair.id_a], embeddings.vectors[pair.id_b])
        total += (cos - pair.label) ** 2
    return total / len(pairs)


def normalize(embeddings: EmbeddingSet) -> EmbeddingSet:
    """Scale every row to unit L2 norm."""
    vectors = embeddings.vectors.astype(np.float64)
    norms = _row_norms(vectors)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DomainError(f"item {int(zero[0])} has a zero-norm vector and cannot be normalized")
    unit = (vectors / norms[:, np.newaxis]).astype(np.float32)
    logger.debug("Normalized %d vectors of dimension %d", embeddings.count, embeddings.dim)
    return EmbeddingSet(items=embeddings.items, vectors=unit, normalized=True)
