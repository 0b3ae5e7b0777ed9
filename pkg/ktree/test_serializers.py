import shutil
import struct
import tempfile
from pathlib import Path

import numpy as np
import pytest

from kmeans.models import KMeansConfig
from ktree_search.exceptions import FormatError
from .builder import build_tree
from .models import InternalNode, KTree, LeafNode
from .serializers import TREE_HEADER, deserialize_tree, serialize_tree, tree_from_bytes, tree_to_bytes
from .test_builder import gaussian_components


class TestTreeSerialization:
    """Test cases for the KTR1 tree file."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = Path(tempfile.mkdtemp())
        embeddings, _ = gaussian_components()
        self.tree = build_tree(
            embeddings, branching=4, leaf_capacity=16, kmeans_config=KMeansConfig(k=4, seed=5), rep_count=2
        )
        self.path = self.temp_dir / "index.ktr"

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_round_trip_is_structurally_equal(self):
        serialize_tree(self.tree, self.path)
        loaded = deserialize_tree(self.path)
        assert loaded == self.tree
        assert loaded.depth == self.tree.depth
        assert loaded.root.centroid.tobytes() == self.tree.root.centroid.tobytes()

    def test_header_fields(self):
        data = tree_to_bytes(self.tree)
        assert TREE_HEADER.unpack_from(data, 0) == (b"KTR1", 4, 16, 8, 200, 2)

    def test_minimal_leaf_tree_bytes(self):
        """A single-leaf tree is header, tag 0, count and ids."""
        tree = KTree(root=LeafNode([0, 1]), branching=2, leaf_capacity=4, dim=1, item_count=2)
        expected = TREE_HEADER.pack(b"KTR1", 2, 4, 1, 2, 0) + struct.pack("<BIII", 0, 2, 0, 1)
        assert tree_to_bytes(tree) == expected
        assert tree_from_bytes(expected) == tree

    def test_corrupted_header(self):
        data = bytearray(tree_to_bytes(self.tree))
        data[0:4] = b"KTR9"
        with pytest.raises(FormatError):
            tree_from_bytes(bytes(data))

    def test_truncated_file(self):
        data = tree_to_bytes(self.tree)
        with pytest.raises(FormatError) as excinfo:
            tree_from_bytes(data[:-3])
        assert excinfo.value.offset == len(data) - 3

    def test_trailing_bytes(self):
        with pytest.raises(FormatError):
            tree_from_bytes(tree_to_bytes(self.tree) + b"\x00")

    def test_unknown_tag(self):
        data = bytearray(tree_to_bytes(self.tree))
        data[TREE_HEADER.size] = 7
        with pytest.raises(FormatError):
            tree_from_bytes(bytes(data))

    def test_missing_item_is_rejected(self):
        """Leaves that do not cover every item id are a format error."""
        tree = KTree(root=LeafNode([0, 2]), branching=2, leaf_capacity=4, dim=1, item_count=3)
        with pytest.raises(FormatError):
            tree_from_bytes(tree_to_bytes(tree))

    def test_foreign_representative_is_rejected(self):
        inner = InternalNode(
            centroid=np.zeros(1, dtype=np.float32),
            children=(LeafNode([0]),),
            rep_ids=(1,),
        )
        root = InternalNode(centroid=np.zeros(1, dtype=np.float32), children=(inner, LeafNode([1])))
        tree = KTree(root=root, branching=2, leaf_capacity=1, dim=1, item_count=2, rep_count=1)
        with pytest.raises(FormatError):
            tree_from_bytes(tree_to_bytes(tree))

    def test_header_rep_count_out_of_range(self):
        data = bytearray(tree_to_bytes(self.tree))
        struct.pack_into("<I", data, TREE_HEADER.size - 4, 6)
        with pytest.raises(FormatError, match="rep_count"):
            tree_from_bytes(bytes(data))

    def test_node_with_more_representatives_than_header(self):
        """
        Given: A tree file whose header declares one representative per node
        When: An internal node carries two
        Then: Loading fails with a format error
        """
        root = InternalNode(
            centroid=np.zeros(1, dtype=np.float32),
            children=(LeafNode([0]), LeafNode([1])),
            rep_ids=(0, 1),
        )
        tree = KTree(root=root, branching=2, leaf_capacity=1, dim=1, item_count=2, rep_count=1)
        with pytest.raises(FormatError, match="representatives"):
            tree_from_bytes(tree_to_bytes(tree))
