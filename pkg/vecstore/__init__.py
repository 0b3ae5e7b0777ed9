"""Embedding/text corpus storage and vector math."""
