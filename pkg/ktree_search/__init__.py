"""Hierarchical k-means tree retrieval engine."""

__version__ = "0.1.0"
