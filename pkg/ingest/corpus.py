import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from evalx.models import QRels
from evalx.storage import save_qrels
from ktree_search.exceptions import InvalidInputError
from vecstore.models import ItemTable, LabeledPair
from vecstore.storage import save_items, save_pairs
from .pairs import RawPair

logger = logging.getLogger(__name__)

ITEMS_FILE = "items.tsv"
QRELS_FILE = "qrels.tsv"
PAIRS_FILE = "pairs.tsv"


@dataclass(frozen=True)
class Corpus:
    """Deduplicated questions, label-1 relevance sets and the id-level pairs."""

    items: ItemTable
    qrels: QRels
    labeled_pairs: Tuple[LabeledPair, ...]
    self_pairs_excluded: int = 0


def build_corpus(pairs: Sequence[RawPair]) -> Corpus:
    """
    Deduplicate pair texts into a corpus.

    Ids follow first occurrence (text_a before text_b). Each label-1 pair adds
    id(text_b) to the relevant set of id(text_a). Pairs whose two texts are
    the same question are left out of qrels and labeled pairs and counted.
    """
    if not pairs:
        raise InvalidInputError("cannot build a corpus from zero pairs")
    ids: Dict[str, int] = {}
    texts: List[str] = []

    def item_id(text: str) -> int:
        text = text.strip()
        if text not in ids:
            ids[text] = len(texts)
            texts.append(text)
        return ids[text]

    relevance: List[Tuple[int, int]] = []
    labeled: List[LabeledPair] = []
    self_pairs = 0
    for pair in pairs:
        a = item_id(pair.text_a)
        b = item_id(pair.text_b)
        if a == b:
            self_pairs += 1
            continue
        labeled.append(LabeledPair(a, b, pair.label))
        if pair.label == 1:
            relevance.append((a, b))

    corpus = Corpus(
        items=ItemTable.from_texts(texts),
        qrels=QRels.from_pairs(relevance),
        labeled_pairs=tuple(labeled),
        self_pairs_excluded=self_pairs,
    )
    logger.info(
        "Corpus: %d unique questions from %d pairs, %d queries, %d self-pairs excluded",
        corpus.items.count, len(pairs), len(corpus.qrels), self_pairs,
    )
    return corpus


def save_corpus(corpus: Corpus, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write the items, qrels and pairs TSVs into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"items": out_dir / ITEMS_FILE, "qrels": out_dir / QRELS_FILE, "pairs": out_dir / PAIRS_FILE}
    save_items(corpus.items, paths["items"])
    save_qrels(corpus.qrels, paths["qrels"])
    save_pairs(corpus.labeled_pairs, paths["pairs"])
    return paths
