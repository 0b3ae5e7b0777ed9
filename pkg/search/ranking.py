import numpy as np


class TopN:
    """
    Running best-``n`` selection over (item_id, score) batches.

    Order is best score first; equal scores go to the lower item id.
    """

    def __init__(self, n: int, higher_is_better: bool):
        self.n = n
        self.higher_is_better = higher_is_better
        self._ids = np.empty(0, dtype=np.int64)
        self._scores = np.empty(0, dtype=np.float64)

    def _order(self, ids: np.ndarray, scores: np.ndarray) -> np.ndarray:
        key = -scores if self.higher_is_better else scores
        return np.lexsort((ids, key))

    def push(self, ids, scores) -> None:
        ids = np.concatenate([self._ids, np.asarray(ids, dtype=np.int64)])
        scores = np.concatenate([self._scores, np.asarray(scores, dtype=np.float64)])
        keep = self._order(ids, scores)[: self.n]
        self._ids, self._scores = ids[keep], scores[keep]

    @property
    def full(self) -> bool:
        return self._ids.shape[0] >= self.n

    @property
    def worst(self) -> float:
        """Score of the current n-th entry (only meaningful when full)."""
        return float(self._scores[-1])

    def ranked(self) -> tuple:
        return tuple((int(i), float(s)) for i, s in zip(self._ids, self._scores))


def rank_nodes(scores: np.ndarray, higher_is_better: bool, width: int) -> np.ndarray:
    """Positions of the ``width`` best scores; ties keep candidate order."""
    key = -scores if higher_is_better else scores
    return np.argsort(key, kind="stable")[:width]
