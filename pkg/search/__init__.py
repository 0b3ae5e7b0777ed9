"""Beam search over k-means trees, in vector and pairwise mode."""
