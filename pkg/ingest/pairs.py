"""
Question-pair TSV parsing.

Accepted layouts, with or without a header row (detected by an
``is_duplicate`` last column):

    question1  question2  is_duplicate
    id  qid1  qid2  question1  question2  is_duplicate
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import pandas as pd

from ktree_search.exceptions import FormatError, InvalidInputError

logger = logging.getLogger(__name__)

# Column positions of (question1, question2, is_duplicate) per field count.
LAYOUTS = {3: (0, 1, 2), 6: (3, 4, 5)}
HEADER_MARKER = "is_duplicate"


@dataclass(frozen=True)
class RawPair:
    text_a: str
    text_b: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InvalidInputError(f"label must be 0 or 1, got {self.label!r}")
        if not self.text_a.strip() or not self.text_b.strip():
            raise InvalidInputError("pair texts must not be empty")


@dataclass(frozen=True)
class ParsedPairs:
    pairs: Tuple[RawPair, ...]
    dropped: int
    has_header: bool

    def __len__(self) -> int:
        return len(self.pairs)


def _clean(texts: pd.Series) -> pd.Series:
    return texts.str.replace(r"[\t\r\n]", " ", regex=True).str.strip()


def parse_pairs(path: Union[str, Path]) -> ParsedPairs:
    """
    Parse a question-pair TSV.

    Lines with the wrong field count, labels other than 0/1, or empty
    questions are dropped and counted.
    """
    path = Path(path)
    bad_lines = []

    def on_bad_line(fields):
        bad_lines.append(fields)
        return None

    try:
        frame = pd.read_csv(
            path,
            sep="\t",
            header=None,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            encoding="utf-8",
            engine="python",
            on_bad_lines=on_bad_line,
        )
    except pd.errors.EmptyDataError:
        raise FormatError(f"{path} is empty", offset=0)
    except UnicodeDecodeError as e:
        raise FormatError(f"{path} is not valid UTF-8", offset=e.start)

    layout = LAYOUTS.get(frame.shape[1])
    if layout is None:
        raise FormatError(f"{path}: expected 3 or 6 tab-separated columns, found {frame.shape[1]}")
    frame = frame.iloc[:, list(layout)]
    frame.columns = ["question1", "question2", "is_duplicate"]

    has_header = str(frame.iloc[0]["is_duplicate"]).strip().lower() == HEADER_MARKER
    if has_header:
        frame = frame.iloc[1:]

    incomplete = frame.isna().any(axis=1)
    frame = frame[~incomplete]
    text_a = _clean(frame["question1"])
    text_b = _clean(frame["question2"])
    labels = frame["is_duplicate"].str.strip()
    valid = labels.isin(["0", "1"]) & (text_a != "") & (text_b != "")

    pairs = tuple(
        RawPair(a, b, int(label))
        for a, b, label in zip(text_a[valid], text_b[valid], labels[valid])
    )
    dropped = len(bad_lines) + int(incomplete.sum()) + int((~valid).sum())
    if dropped:
        logger.warning("Dropped %d malformed lines from %s", dropped, path)
    if not pairs:
        raise FormatError(f"{path} contains no valid question pairs")
    logger.info("Parsed %d pairs from %s", len(pairs), path)
    return ParsedPairs(pairs=pairs, dropped=dropped, has_header=has_header)
