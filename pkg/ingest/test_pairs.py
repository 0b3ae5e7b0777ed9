import shutil
import tempfile
from pathlib import Path

import pytest

from ktree_search.exceptions import FormatError, InvalidInputError
from .pairs import RawPair, parse_pairs


class TestParsePairs:
    """Test cases for question-pair TSV parsing."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = Path(tempfile.mkdtemp())

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _write(self, body: str) -> Path:
        path = self.temp_dir / "pairs.tsv"
        path.write_text(body, encoding="utf-8")
        return path

    def test_three_valid_rows(self):
        """
        Given: A headerless TSV with three valid rows
        When: Parsing it
        Then: Three pairs come back and nothing is dropped
        """
        path = self._write("how to cook rice\tbest way to cook rice\t1\nwhat is a cat\twhat is a dog\t0\nwho am i\twho are you\t0\n")
        parsed = parse_pairs(path)
        assert len(parsed) == 3
        assert parsed.dropped == 0
        assert not parsed.has_header
        assert parsed.pairs[0] == RawPair("how to cook rice", "best way to cook rice", 1)

    def test_bad_label_is_dropped_and_counted(self):
        path = self._write("a question\tanother question\t2\nfirst\tsecond\t1\n")
        parsed = parse_pairs(path)
        assert [p.label for p in parsed.pairs] == [1]
        assert parsed.dropped == 1

    def test_header_is_skipped(self):
        """A header row ending in is_duplicate is detected and skipped."""
        path = self._write("question1\tquestion2\tis_duplicate\nfirst\tsecond\t0\n")
        parsed = parse_pairs(path)
        assert parsed.has_header
        assert parsed.pairs == (RawPair("first", "second", 0),)

    def test_six_column_layout(self):
        """The id, qid1, qid2 columns of the full export are ignored."""
        path = self._write(
            "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\n"
            "0\t1\t2\tfirst question\tsecond question\t1\n"
        )
        parsed = parse_pairs(path)
        assert parsed.pairs == (RawPair("first question", "second question", 1),)

    def test_empty_question_is_dropped(self):
        path = self._write("   \tsecond\t1\nfirst\tsecond\t1\n")
        parsed = parse_pairs(path)
        assert len(parsed) == 1
        assert parsed.dropped == 1

    def test_texts_are_trimmed(self):
        path = self._write("  padded  \tsecond\t0\n")
        assert parse_pairs(path).pairs[0].text_a == "padded"

    def test_empty_file_is_format_error(self):
        with pytest.raises(FormatError):
            parse_pairs(self._write(""))

    def test_no_valid_rows_is_format_error(self):
        with pytest.raises(FormatError):
            parse_pairs(self._write("first\tsecond\tmaybe\n"))

    def test_missing_file_is_io_error(self):
        with pytest.raises(OSError):
            parse_pairs(self.temp_dir / "missing.tsv")


class TestRawPair:
    """Test cases for RawPair validation."""

    def test_label_must_be_binary(self):
        with pytest.raises(InvalidInputError):
            RawPair("a", "b", 2)

    def test_texts_must_not_be_blank(self):
        with pytest.raises(InvalidInputError):
            RawPair("a", "  ", 0)
