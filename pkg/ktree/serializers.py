"""
KTR1 tree file format.

    magic      b"KTR1"
    header     branching, leaf_capacity, dim, item_count, rep_count (u32 LE each)
    nodes      pre-order records:
               tag u8 (0 = leaf, 1 = internal)
               leaf:     member count u32, member ids u32 × count
               internal: centroid f32 × dim, rep count u8, rep ids u32 × reps,
                         child count u8, then the children

The reader validates the whole file before returning; a corrupt file never
yields a partial tree.
"""
import logging
import struct
from pathlib import Path
from typing import List, Union

import numpy as np

from ktree_search.exceptions import FormatError
from .builder import MAX_REP_COUNT
from .models import InternalNode, KTree, LeafNode, TreeNode, node_depth

logger = logging.getLogger(__name__)

TREE_MAGIC = b"KTR1"
TREE_HEADER = struct.Struct("<4sIIIII")
LEAF_TAG = 0
INTERNAL_TAG = 1

_U8 = struct.Struct("<B")
_U32 = struct.Struct("<I")


def tree_to_bytes(tree: KTree) -> bytes:
    """Encode ``tree`` in the KTR1 format."""
    chunks: List[bytes] = [
        TREE_HEADER.pack(
            TREE_MAGIC, tree.branching, tree.leaf_capacity, tree.dim, tree.item_count, tree.rep_count
        )
    ]
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            chunks.append(_U8.pack(LEAF_TAG))
            chunks.append(_U32.pack(node.size))
            chunks.append(node.member_ids.astype("<u4").tobytes())
        else:
            chunks.append(_U8.pack(INTERNAL_TAG))
            chunks.append(node.centroid.astype("<f4").tobytes())
            chunks.append(_U8.pack(len(node.rep_ids)))
            chunks.append(np.asarray(node.rep_ids, dtype="<u4").tobytes())
            chunks.append(_U8.pack(len(node.children)))
            stack.extend(reversed(node.children))
    return b"".join(chunks)


def serialize_tree(tree: KTree, path: Union[str, Path]) -> None:
    """Write ``tree`` to ``path``."""
    data = tree_to_bytes(tree)
    Path(path).write_bytes(data)
    logger.info("Wrote tree (%d bytes) to %s", len(data), path)


class _Reader:
    def __init__(self, data: bytes, branching: int, dim: int, item_count: int, rep_count: int):
        self.data = data
        self.offset = TREE_HEADER.size
        self.branching = branching
        self.rep_count = rep_count
        self.dim = dim
        self.item_count = item_count

    def take(self, size: int, what: str) -> int:
        start = self.offset
        if start + size > len(self.data):
            raise FormatError(f"truncated tree file while reading {what}", offset=len(self.data))
        self.offset += size
        return start

    def u8(self, what: str) -> int:
        return _U8.unpack_from(self.data, self.take(_U8.size, what))[0]

    def u32(self, what: str) -> int:
        return _U32.unpack_from(self.data, self.take(_U32.size, what))[0]

    def ids(self, count: int, what: str) -> np.ndarray:
        start = self.take(count * 4, what)
        ids = np.frombuffer(self.data, dtype="<u4", count=count, offset=start).astype(np.int64)
        if ids.size and ids.max() >= self.item_count:
            raise FormatError(f"{what} references item {int(ids.max())} >= {self.item_count}", offset=start)
        return ids

    def node(self) -> TreeNode:
        tag_offset = self.offset
        tag = self.u8("node tag")
        if tag == LEAF_TAG:
            count = self.u32("leaf size")
            if count == 0:
                raise FormatError("empty leaf", offset=tag_offset)
            return LeafNode(self.ids(count, "leaf members"))
        if tag != INTERNAL_TAG:
            raise FormatError(f"unknown node tag {tag}", offset=tag_offset)
        start = self.take(self.dim * 4, "centroid")
        centroid = np.frombuffer(self.data, dtype="<f4", count=self.dim, offset=start)
        reps = self.u8("rep count")
        if reps > self.rep_count:
            raise FormatError(
                f"internal node has {reps} representatives, header allows {self.rep_count}",
                offset=self.offset - 1,
            )
        rep_ids = self.ids(reps, "representatives")
        child_count = self.u8("child count")
        if not 1 <= child_count <= self.branching:
            raise FormatError(
                f"internal node has {child_count} children, branching is {self.branching}",
                offset=self.offset - 1,
            )
        children = tuple(self.node() for _ in range(child_count))
        return InternalNode(centroid=centroid, children=children, rep_ids=tuple(rep_ids.tolist()))


def _check_structure(root: TreeNode, item_count: int) -> None:
    """Leaves must partition 0..item_count-1 and representatives must be descendants."""
    def members(node: TreeNode) -> np.ndarray:
        if node.is_leaf:
            return node.member_ids
        below = np.concatenate([members(child) for child in node.children])
        if node.rep_ids and not np.isin(node.rep_ids, below).all():
            raise FormatError("representative is not a member of its node")
        return below

    all_members = np.sort(members(root))
    if not np.array_equal(all_members, np.arange(item_count)):
        raise FormatError("leaves do not partition the item ids")


def tree_from_bytes(data: bytes) -> KTree:
    """Decode a KTR1 buffer."""
    if len(data) < TREE_HEADER.size:
        raise FormatError("truncated tree header", offset=len(data))
    magic, branching, leaf_capacity, dim, item_count, rep_count = TREE_HEADER.unpack_from(data, 0)
    if magic != TREE_MAGIC:
        raise FormatError(f"bad tree magic {magic!r}", offset=0)
    if branching < 2 or leaf_capacity < 1 or dim < 1 or item_count < 1:
        raise FormatError("tree header has out-of-range parameters", offset=4)
    if rep_count > MAX_REP_COUNT:
        raise FormatError(
            f"tree header rep_count {rep_count} exceeds {MAX_REP_COUNT}", offset=TREE_HEADER.size - 4
        )
    reader = _Reader(data, branching, dim, item_count, rep_count)
    root = reader.node()
    if reader.offset != len(data):
        raise FormatError(f"{len(data) - reader.offset} trailing bytes after tree", offset=reader.offset)
    _check_structure(root, item_count)
    return KTree(
        root=root,
        branching=branching,
        leaf_capacity=leaf_capacity,
        dim=dim,
        item_count=item_count,
        rep_count=rep_count,
        depth=node_depth(root),
    )


def deserialize_tree(path: Union[str, Path]) -> KTree:
    """Read a tree written by ``serialize_tree``."""
    tree = tree_from_bytes(Path(path).read_bytes())
    logger.info("Loaded tree over %d items (depth %d) from %s", tree.item_count, tree.depth, path)
    return tree
