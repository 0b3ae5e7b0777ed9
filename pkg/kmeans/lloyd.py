"""
Lloyd's algorithm with k-means++ or random initialization.

Everything runs in float64 on a single thread so that a fixed seed yields
bit-identical assignments and centroids. Ties between equidistant centroids
go to the lowest cluster index.
"""
import logging
from typing import Sequence

import numpy as np

from ktree_search.exceptions import InvalidInputError
from vecstore.ops import score_rows
from .models import Clustering, KMeansConfig

logger = logging.getLogger(__name__)

# Relative slack for the inertia monotonicity assertion (float64 summation order).
_INERTIA_SLACK = 1e-9


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise InvalidInputError("k-means needs a non-empty 2-D point matrix")
    if points.shape[1] == 0:
        raise InvalidInputError("points must have positive dimension")
    return points


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """n × k matrix of squared euclidean distances, computed from differences."""
    out = np.empty((points.shape[0], centroids.shape[0]), dtype=np.float64)
    for c in range(centroids.shape[0]):
        diff = points - centroids[c]
        out[:, c] = np.multiply(diff, diff).sum(axis=1)
    return out


def kmeanspp_init(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    Pick ``k`` seed rows by k-means++.

    The first row is uniform; each next row is drawn with probability
    proportional to its squared distance to the nearest row already picked.
    When every remaining distance is zero the pick is uniform over unpicked rows.
    """
    points = _as_points(points)
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _squared_distances(points, points[chosen[0]][np.newaxis, :])[:, 0]
    while len(chosen) < k:
        total = d2.sum()
        if total > 0.0:
            pick = int(rng.choice(n, p=d2 / total))
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            pick = int(rng.choice(remaining))
        chosen.append(pick)
        d2 = np.minimum(d2, _squared_distances(points, points[pick][np.newaxis, :])[:, 0])
    return np.asarray(chosen, dtype=np.int64)


def random_init(points, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick ``k`` distinct seed rows uniformly."""
    points = _as_points(points)
    return rng.choice(points.shape[0], size=k, replace=False).astype(np.int64)


def _repair_empty(labels: np.ndarray, d2: np.ndarray, k: int) -> None:
    """
    Move the farthest point into every empty cluster, ascending by cluster.

    Donors are clusters that keep at least one member. ``labels`` and ``d2``
    are updated in place.
    """
    counts = np.bincount(labels, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        candidates = np.where(counts[labels] >= 2, d2, -np.inf)
        moved = int(np.argmax(candidates))
        logger.debug("Cluster %d is empty; moving point %d into it", empty, moved)
        counts[labels[moved]] -= 1
        counts[empty] += 1
        labels[moved] = empty
        d2[moved] = 0.0


def _means(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    for c in range(k):
        centroids[c] = points[labels == c].mean(axis=0)
    return centroids


def _inertia(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    diff = points - centroids[labels]
    return float(np.multiply(diff, diff).sum())


def kmeans(points, config: KMeansConfig) -> Clustering:
    """
    Run Lloyd's algorithm.

    Stops when assignments stop changing, when the largest centroid movement
    drops below ``config.tol``, or after ``config.max_iter`` iterations. If
    there are fewer points than ``config.k`` the effective k is the point count.

    The returned assignments are always made against the returned centroids.
    After a ``tol`` or ``max_iter`` stop the centroids are the means of the
    previous assignment, so they sit within the last movement of the means of
    the returned one.
    """
    points = _as_points(points)
    n = points.shape[0]
    k = min(config.k, n)
    rng = np.random.default_rng(config.seed)
    init = kmeanspp_init if config.init == "kmeanspp" else random_init
    centroids = points[init(points, k, rng)].copy()

    labels = None
    inertia = np.inf
    converged = stable = False
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        d2 = _squared_distances(points, centroids)
        new_labels = np.argmin(d2, axis=1)
        new_d2 = d2[np.arange(n), new_labels]
        _repair_empty(new_labels, new_d2, k)
        if labels is not None and np.array_equal(new_labels, labels):
            converged = stable = True
            break
        new_centroids = _means(points, new_labels, k)
        shift = new_centroids - centroids
        movement = float(np.sqrt(np.multiply(shift, shift).sum(axis=1).max()))
        new_inertia = _inertia(points, new_labels, new_centroids)
        assert new_inertia <= inertia * (1 + _INERTIA_SLACK) + _INERTIA_SLACK, "inertia increased"
        labels, centroids, inertia = new_labels, new_centroids, new_inertia
        if movement < config.tol:
            converged = True
            break

    if not stable:
        # Labels above were assigned against the previous centroids.
        d2 = _squared_distances(points, centroids)
        labels = np.argmin(d2, axis=1)
        _repair_empty(labels, d2[np.arange(n), labels], k)
        inertia = _inertia(points, labels, centroids)

    logger.debug(
        "k-means: n=%d k=%d iterations=%d inertia=%.6g converged=%s",
        n, k, iterations, inertia, converged,
    )
    return Clustering(
        assignments=labels,
        centroids=centroids,
        inertia=float(inertia),
        iterations_run=iterations,
        converged=converged,
    )


def nearest_to_centroid(points, member_ids: Sequence[int], centroid, m: int) -> list:
    """
    Return up to ``m`` member ids closest to ``centroid``.

    Ordered by ascending euclidean distance, ties to the lower id.
    """
    member_ids = np.asarray(member_ids, dtype=np.int64)
    if member_ids.size == 0:
        raise InvalidInputError("nearest_to_centroid needs at least one member")
    if m < 1:
        raise InvalidInputError(f"m must be positive, got {m}")
    distances = score_rows(centroid, np.asarray(points)[member_ids], "euclidean")
    order = np.lexsort((member_ids, distances))
    return [int(i) for i in member_ids[order[:m]]]
