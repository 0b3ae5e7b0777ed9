"""Hierarchical k-means tree: construction, KTR1 files and shape statistics."""
