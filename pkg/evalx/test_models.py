import shutil
import tempfile
from pathlib import Path

import pytest

from ktree_search.exceptions import ConsistencyError, FormatError, InvalidInputError
from vecstore.models import ItemTable
from .models import QRels
from .storage import load_qrels, save_qrels


class TestQRels:
    """Test cases for query relevance sets."""

    def test_from_pairs_groups_by_query(self):
        qrels = QRels.from_pairs([(2, 1), (0, 3), (2, 4)])
        assert list(qrels) == [0, 2]
        assert qrels.relevant(2) == frozenset({1, 4})
        assert qrels.pairs() == [(0, 3), (2, 1), (2, 4)]
        assert len(qrels) == 2
        assert 0 in qrels

    def test_empty_relevant_set(self):
        with pytest.raises(InvalidInputError):
            QRels({0: set()})

    def test_self_reference(self):
        with pytest.raises(InvalidInputError):
            QRels({3: {3}})

    def test_check_corpus(self):
        qrels = QRels({0: {4}})
        qrels.check_corpus(5)
        with pytest.raises(ConsistencyError):
            qrels.check_corpus(4)


class TestQRelsStorage:
    """Test cases for the qrels TSV."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = Path(tempfile.mkdtemp())

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_round_trip(self):
        qrels = QRels({0: {1, 2}, 5: {0}})
        path = self.temp_dir / "qrels.tsv"
        save_qrels(qrels, path)
        assert path.read_text() == "0\t1\n0\t2\n5\t0\n"
        assert load_qrels(path) == qrels

    def test_ids_outside_corpus(self):
        path = self.temp_dir / "qrels.tsv"
        path.write_text("0\t7\n")
        with pytest.raises(ConsistencyError):
            load_qrels(path, ItemTable.from_texts(["a", "b"]))

    def test_self_reference_in_file(self):
        path = self.temp_dir / "qrels.tsv"
        path.write_text("1\t1\n")
        with pytest.raises(FormatError):
            load_qrels(path)
