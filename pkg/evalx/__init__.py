"""Ranking metrics and the evaluation harness."""
