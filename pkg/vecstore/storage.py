"""
On-disk formats for corpora and embeddings.

Items file:      UTF-8 TSV, ``id<TAB>text`` per line, ids ascending from 0.
Pairs file:      TSV ``id_a<TAB>id_b<TAB>label``.
Embedding file:  b"EMB1", count (u32 LE), dim (u32 LE), then count × dim
                 float32 LE values in row-major order, no padding.
"""
import csv
import logging
import struct
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from ktree_search.exceptions import (
    ConsistencyError,
    FormatError,
    InvalidInputError,
    KTreeError,
)
from .models import EmbeddingSet, ItemTable, LabeledPair

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EMBEDDING_MAGIC = b"EMB1"
EMBEDDING_HEADER = struct.Struct("<4sII")
_FORBIDDEN_TEXT_CHARS = ("\t", "\r", "\n")


def read_tsv(path: PathLike, columns: List[str]) -> pd.DataFrame:
    """Read a header-less TSV of string columns, mapping parser failures to FormatError."""
    path = Path(path)
    try:
        frame = pd.read_csv(
            path,
            sep="\t",
            header=None,
            names=columns,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise FormatError(f"{path} is empty", offset=0)
    except pd.errors.ParserError as e:
        raise FormatError(f"{path} is not a {len(columns)}-column TSV: {e}")
    except UnicodeDecodeError as e:
        raise FormatError(f"{path} is not valid UTF-8", offset=e.start)
    if frame.empty:
        raise FormatError(f"{path} has no rows", offset=0)
    return frame


def int_column(frame: pd.DataFrame, column: str, path: Path) -> np.ndarray:
    """Parse a column of nonnegative integers, reporting the first bad line."""
    valid = frame[column].str.fullmatch(r"\d+").fillna(False).to_numpy(dtype=bool)
    bad = np.flatnonzero(~valid)
    if bad.size:
        raise FormatError(f"{path}: non-integer {column} on line {bad[0] + 1}", offset=int(bad[0]) + 1)
    return frame[column].astype(np.int64).to_numpy()


def load_items(path: PathLike) -> ItemTable:
    """Load an items TSV."""
    path = Path(path)
    frame = read_tsv(path, ["id", "text"])
    ids = int_column(frame, "id", path)
    expected = np.arange(len(frame), dtype=np.int64)
    mismatch = np.flatnonzero(ids != expected)
    if mismatch.size:
        line = int(mismatch[0]) + 1
        raise FormatError(f"{path}: expected id {line - 1} on line {line}, got {ids[line - 1]}", offset=line)
    try:
        items = ItemTable.from_texts(frame["text"].tolist())
    except InvalidInputError as e:
        raise FormatError(f"{path}: {e}")
    logger.info("Loaded %d items from %s", items.count, path)
    return items


def save_items(items: ItemTable, path: PathLike) -> None:
    """Write an items TSV with LF line endings."""
    lines = []
    for item_id, text in items:
        if any(ch in text for ch in _FORBIDDEN_TEXT_CHARS):
            raise InvalidInputError(f"item {item_id} text contains a tab or line break")
        lines.append(f"{item_id}\t{text}\n")
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")


def load_embeddings(path: PathLike, items: Optional[ItemTable] = None) -> EmbeddingSet:
    """
    Load an EMB1 embedding file.

    Format problems raise FormatError with the byte offset where the file
    stops matching; a row count that differs from ``items`` raises
    ConsistencyError.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < EMBEDDING_HEADER.size:
        raise FormatError(f"{path}: truncated header", offset=len(data))
    magic, count, dim = EMBEDDING_HEADER.unpack_from(data, 0)
    if magic != EMBEDDING_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}", offset=0)
    if dim == 0:
        raise FormatError(f"{path}: dimension must be positive", offset=8)
    expected = EMBEDDING_HEADER.size + count * dim * 4
    if len(data) < expected:
        raise FormatError(
            f"{path}: header declares {count}x{dim} floats ({expected} bytes), file has {len(data)} bytes",
            offset=len(data),
        )
    if len(data) > expected:
        raise FormatError(f"{path}: {len(data) - expected} trailing bytes", offset=expected)
    if items is not None and items.count != count:
        raise ConsistencyError(f"{path} holds {count} vectors but the corpus has {items.count} items")
    vectors = np.frombuffer(data, dtype="<f4", count=count * dim, offset=EMBEDDING_HEADER.size)
    embeddings = EmbeddingSet.from_array(vectors.reshape(count, dim), items=items)
    logger.info("Loaded %d x %d embeddings from %s", count, dim, path)
    return embeddings


def save_embeddings(embeddings: EmbeddingSet, path: PathLike) -> None:
    """Write an EMB1 embedding file."""
    header = EMBEDDING_HEADER.pack(EMBEDDING_MAGIC, embeddings.count, embeddings.dim)
    body = embeddings.vectors.astype("<f4", copy=False).tobytes(order="C")
    Path(path).write_bytes(header + body)


def load_pairs(path: PathLike, items: Optional[ItemTable] = None) -> List[LabeledPair]:
    """Load a labeled pairs TSV."""
    path = Path(path)
    frame = read_tsv(path, ["id_a", "id_b", "label"])
    columns = [int_column(frame, name, path) for name in ("id_a", "id_b", "label")]
    pairs = []
    for line, (id_a, id_b, label) in enumerate(zip(*columns), start=1):
        if items is not None and not (0 <= id_a < items.count and 0 <= id_b < items.count):
            raise ConsistencyError(f"{path}: line {line} references an item outside the corpus")
        try:
            pairs.append(LabeledPair(int(id_a), int(id_b), int(label)))
        except KTreeError as e:
            raise FormatError(f"{path}: line {line}: {e}", offset=line)
    return pairs


def save_pairs(pairs: Iterable[LabeledPair], path: PathLike) -> None:
    """Write a labeled pairs TSV."""
    body = "".join(f"{p.id_a}\t{p.id_b}\t{p.label}\n" for p in pairs)
    Path(path).write_text(body, encoding="utf-8", newline="\n")
