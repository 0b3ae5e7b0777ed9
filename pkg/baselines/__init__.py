"""Exact reference indexes: compute-all brute force and a k-d tree."""
