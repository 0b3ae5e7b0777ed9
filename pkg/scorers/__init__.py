"""Pairwise text scorers: the local lexical scorer and the HTTP client."""
