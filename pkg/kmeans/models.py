from dataclasses import dataclass
from typing import Literal

import numpy as np

from ktree_search.exceptions import InvalidInputError


INIT_METHODS = ("kmeanspp", "random")
MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class KMeansConfig:
    """
    Parameters of one flat k-means run.

    ``tol`` bounds the largest centroid movement (euclidean) between two
    iterations; below it the run stops early.
    """

    k: int
    max_iter: int = 50
    tol: float = 1e-4
    seed: int = 0
    init: Literal["kmeanspp", "random"] = "kmeanspp"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidInputError(f"k must be a positive integer, got {self.k!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidInputError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not self.tol >= 0:
            raise InvalidInputError(f"tol must be nonnegative, got {self.tol!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= MAX_SEED:
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.init not in INIT_METHODS:
            raise InvalidInputError(f"unknown init {self.init!r}, expected one of {INIT_METHODS}")

    def with_k(self, k: int) -> "KMeansConfig":
        return KMeansConfig(k=k, max_iter=self.max_iter, tol=self.tol, seed=self.seed, init=self.init)

    def with_seed(self, seed: int) -> "KMeansConfig":
        return KMeansConfig(k=self.k, max_iter=self.max_iter, tol=self.tol, seed=seed, init=self.init)


@dataclass(frozen=True, eq=False)
class Clustering:
    """Result of a k-means run: labels, float64 centroids and the final inertia."""

    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    converged: bool = False

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    def sizes(self) -> np.ndarray:
        """Member count per cluster."""
        return np.bincount(self.assignments, minlength=self.k)

    def members(self, cluster: int) -> np.ndarray:
        """Row indices assigned to ``cluster``, ascending."""
        return np.flatnonzero(self.assignments == cluster)
