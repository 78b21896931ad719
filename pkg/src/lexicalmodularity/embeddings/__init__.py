"""Embedding and bilingual lexicon files."""
