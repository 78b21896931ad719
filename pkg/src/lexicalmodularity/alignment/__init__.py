"""Linear cross-lingual mappings, CSLS retrieval and refinement."""
