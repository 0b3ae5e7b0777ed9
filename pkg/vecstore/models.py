"""
Corpus and embedding containers.

All containers are immutable after construction: arrays are copied and marked
read-only, so they can be shared freely between search threads.
"""
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ktree_search.exceptions import InvalidInputError, DomainError


NORM_TOLERANCE = 1e-4


def _frozen_array(values, dtype) -> np.ndarray:
    """Return a C-contiguous read-only copy of ``values``."""
    array = np.array(values, dtype=dtype, order="C", copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ItemTable:
    """
    Ordered corpus of item texts.

    Item ids are dense row indices: item ``i`` is ``texts[i]``.
    """

    texts: tuple

    def __post_init__(self):
        texts = tuple(self.texts)
        for item_id, text in enumerate(texts):
            if not isinstance(text, str) or not text.strip():
                raise InvalidInputError(f"item {item_id} has an empty text")
        object.__setattr__(self, "texts", texts)

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "ItemTable":
        """Build a table whose ids follow the order of ``texts``."""
        return cls(tuple(texts))

    @classmethod
    def placeholder(cls, count: int) -> "ItemTable":
        """Build a table of ``count`` generated labels (vector-only corpora)."""
        return cls(tuple(f"item-{i}" for i in range(count)))

    @property
    def count(self) -> int:
        return len(self.texts)

    def __len__(self) -> int:
        return len(self.texts)

    def __iter__(self) -> Iterator[tuple]:
        return iter(enumerate(self.texts))

    def text(self, item_id: int) -> str:
        """Return the text of ``item_id``."""
        if not 0 <= item_id < len(self.texts):
            raise InvalidInputError(f"unknown item id {item_id}")
        return self.texts[item_id]


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """Fixed-dimension float32 vectors, one row per item of ``items``."""

    items: ItemTable
    vectors: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        vectors = np.asarray(self.vectors)
        if vectors.ndim != 2:
            raise InvalidInputError(f"vectors must be a matrix, got {vectors.ndim} dimensions")
        if vectors.shape[1] < 1:
            raise InvalidInputError("embedding dimension must be positive")
        if vectors.shape[0] != self.items.count:
            raise InvalidInputError(
                f"{vectors.shape[0]} vectors for {self.items.count} items"
            )
        vectors = _frozen_array(vectors, np.float32)
        if not np.all(np.isfinite(vectors)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(vectors), axis=1))[0])
            raise DomainError(f"item {bad} has a non-finite vector entry")
        if self.normalized and vectors.shape[0]:
            norms = np.sqrt(np.square(vectors.astype(np.float64)).sum(axis=1))
            off = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOLERANCE)
            if off.size:
                raise DomainError(
                    f"item {int(off[0])} has norm {norms[off[0]]:.6f} in a normalized set"
                )
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def from_array(cls, vectors, items: ItemTable = None, normalized: bool = False) -> "EmbeddingSet":
        """Wrap a matrix, generating placeholder item texts when none are given."""
        vectors = np.asarray(vectors)
        if items is None:
            items = ItemTable.placeholder(vectors.shape[0] if vectors.ndim == 2 else 0)
        return cls(items=items, vectors=vectors, normalized=normalized)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def count(self) -> int:
        return int(self.vectors.shape[0])

    def __len__(self) -> int:
        return self.count

    def vector(self, item_id: int) -> np.ndarray:
        """Return the (read-only) row of ``item_id``."""
        if not 0 <= item_id < self.count:
            raise InvalidInputError(f"unknown item id {item_id}")
        return self.vectors[item_id]


@dataclass(frozen=True, eq=False)
class TokenMatrix:
    """Per-token output vectors of one encoded sentence (row 0 is the [CLS] position)."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise InvalidInputError("token matrix needs at least one row of positive dimension")
        rows = _frozen_array(rows, np.float32)
        if not np.all(np.isfinite(rows)):
            raise DomainError("token matrix has non-finite entries")
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    @property
    def token_count(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class LabeledPair:
    """Two item ids with a binary similarity label."""

    id_a: int
    id_b: int
    label: int = field(default=0)

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InvalidInputError(f"label must be 0 or 1, got {self.label!r}")
        if self.id_a == self.id_b:
            raise InvalidInputError(f"pair references item {self.id_a} twice")
