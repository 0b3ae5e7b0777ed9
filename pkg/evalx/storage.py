"""Qrels TSV: ``query_id<TAB>relevant_id`` per line."""
import logging
from pathlib import Path
from typing import Optional, Union

from ktree_search.exceptions import ConsistencyError, FormatError, InvalidInputError
from vecstore.models import ItemTable
from vecstore.storage import int_column, read_tsv
from .models import QRels

logger = logging.getLogger(__name__)


def load_qrels(path: Union[str, Path], items: Optional[ItemTable] = None) -> QRels:
    path = Path(path)
    frame = read_tsv(path, ["query_id", "relevant_id"])
    queries = int_column(frame, "query_id", path)
    relevant = int_column(frame, "relevant_id", path)
    try:
        qrels = QRels.from_pairs(zip(queries.tolist(), relevant.tolist()))
    except InvalidInputError as e:
        raise FormatError(f"{path}: {e}")
    if items is not None:
        try:
            qrels.check_corpus(items.count)
        except ConsistencyError as e:
            raise ConsistencyError(f"{path}: {e}")
    logger.info("Loaded %d qrels queries from %s", len(qrels), path)
    return qrels


def save_qrels(qrels: QRels, path: Union[str, Path]) -> None:
    body = "".join(f"{q}\t{r}\n" for q, r in qrels.pairs())
    Path(path).write_text(body, encoding="utf-8", newline="\n")
