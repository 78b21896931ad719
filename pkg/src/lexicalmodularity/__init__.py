"""Language-level modularity of cross-lingual word embeddings."""

__version__ = "0.1.0"
