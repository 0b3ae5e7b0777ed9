"""Corpus construction from question-pair files, plus synthetic corpora."""
