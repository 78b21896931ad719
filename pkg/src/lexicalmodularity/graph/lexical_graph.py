"""The language-labelled kNN lexical graph.

Every word is a node; each node selects its k nearest neighbours (itself
excluded) and an edge i-j carries the weight max(0, cos(v_i, v_j)). The
directed selections are symmetrized by union (default) or by mutual selection,
zero-weight edges are dropped and there are no self-loops.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy import sparse

from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, norms_within
from lexicalmodularity.graph.ann_index import (
    RpForest,
    build_forest,
    exact_neighbors,
    forest_neighbors,
)
from lexicalmodularity.utils.constants import (
    DEFAULT_K,
    DEFAULT_LEAF_CAPACITY,
    DEFAULT_SEED,
    UNIT_NORM_TOLERANCE,
    Symmetrization,
)
from lexicalmodularity.utils.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NotNormalizedError,
)
from lexicalmodularity.utils.formatting_helpers import format_real
from lexicalmodularity.utils.helpers import write_tsv

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LexicalGraph:
    """Symmetric, non-negatively weighted sparse graph over language-labelled words."""

    labels: Tuple[str, ...]
    words: Tuple[str, ...]
    adjacency: sparse.csr_matrix
    k: int
    symmetrization: Symmetrization = Symmetrization.UNION

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def degree(self) -> np.ndarray:
        """Weighted degree d_i = sum_j A_ij."""
        return np.asarray(self.adjacency.sum(axis=1), dtype=np.float64).ravel()

    @cached_property
    def total_weight(self) -> float:
        """2m = sum_ij A_ij."""
        return float(np.sum(self.degree))

    @property
    def n_edges(self) -> int:
        """Undirected edge count."""
        return self.adjacency.nnz // 2

    @cached_property
    def language_codes(self) -> Tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def edges(self):
        """Undirected edges as (i, j, weight) with i < j, in row-major order."""
        upper = sparse.triu(self.adjacency, k=1, format="coo")
        order = np.lexsort((upper.col, upper.row))
        for i, j, w in zip(upper.row[order], upper.col[order], upper.data[order]):
            yield int(i), int(j), float(w)


def _pair_weights(vectors: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Clamped cosine of each (lo, hi) pair, computed once per unordered pair."""
    dots = np.einsum("ij,ij->i", vectors[lo], vectors[hi])
    norms = np.linalg.norm(vectors[lo], axis=1) * np.linalg.norm(vectors[hi], axis=1)
    return np.maximum(0.0, dots / norms)


def graph_from_neighbors(
    space: EmbeddingSpace,
    neighbor_ids: np.ndarray,
    k: int,
    symmetrization: Symmetrization = Symmetrization.UNION,
) -> LexicalGraph:
    """
    Symmetrize per-node neighbour selections (an (n, k) id array padded with -1)
    into a LexicalGraph.
    """
    n = len(space)
    sources = np.repeat(np.arange(n, dtype=np.int64), neighbor_ids.shape[1])
    targets = neighbor_ids.ravel()
    valid = (targets >= 0) & (targets != sources)
    sources, targets = sources[valid], targets[valid]

    lo = np.minimum(sources, targets)
    hi = np.maximum(sources, targets)
    keys = lo * n + hi
    unique_keys, counts = np.unique(keys, return_counts=True)
    if Symmetrization(symmetrization) is Symmetrization.MUTUAL:
        unique_keys = unique_keys[counts == 2]
    lo, hi = unique_keys // n, unique_keys % n

    weights = _pair_weights(space.vectors, lo, hi)
    positive = weights > 0
    lo, hi, weights = lo[positive], hi[positive], weights[positive]

    adjacency = sparse.csr_matrix(
        (np.concatenate([weights, weights]), (np.concatenate([lo, hi]), np.concatenate([hi, lo]))),
        shape=(n, n),
        dtype=np.float64,
    )
    adjacency.sort_indices()
    logger.debug(f"Lexical graph: {n} nodes, {len(weights)} edges (k={k}, {Symmetrization(symmetrization).value})")
    return LexicalGraph(
        labels=space.languages,
        words=space.words,
        adjacency=adjacency,
        k=k,
        symmetrization=Symmetrization(symmetrization),
    )


def build_graph(
    space: EmbeddingSpace,
    k: int = DEFAULT_K,
    forest: Optional[RpForest] = None,
    symmetrization: Symmetrization = Symmetrization.UNION,
    threads: int = 1,
) -> LexicalGraph:
    """
    Build the kNN lexical graph of a unit-normalized space.

    Args:
        space: Nodes with language labels; vectors must have unit norm.
        k: Neighbours selected per node.
        forest: Random projection forest over `space.vectors`; None means exact search.
        symmetrization: `union` keeps an edge selected from either side, `mutual` from both.
        threads: Worker threads for the neighbour queries.

    Raises:
        InvalidParameterError: k < 1, k >= n, or fewer than 2 nodes.
        NotNormalizedError: Some vector norm is not within 1e-6 of 1.
    """
    n = len(space)
    if n < 2:
        raise InvalidParameterError(f"A lexical graph needs at least 2 nodes, got {n}")
    if k < 1 or k >= n:
        raise InvalidParameterError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    if not norms_within(space, UNIT_NORM_TOLERANCE):
        raise NotNormalizedError("Lexical graphs need unit-normalized vectors; apply the 'unit' preprocessing step")

    if forest is None:
        neighbor_ids, _ = exact_neighbors(space.vectors, k, threads=threads)
    else:
        if len(forest) != n or forest.dim != space.dim:
            raise DimensionMismatchError("The forest does not index this space")
        neighbor_ids, _ = forest_neighbors(forest, k, threads=threads)
    return graph_from_neighbors(space, neighbor_ids, k, symmetrization)


def top_frequent_subgraph(
    space: EmbeddingSpace,
    per_language_limit: int,
    k: int = DEFAULT_K,
    trees: Optional[int] = None,
    seed: int = DEFAULT_SEED,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    symmetrization: Symmetrization = Symmetrization.UNION,
    threads: int = 1,
) -> LexicalGraph:
    """
    The lexical graph over the `per_language_limit` most frequent words of each
    language. With `trees`, neighbours come from a forest built over the
    restricted space; otherwise the search is exact.
    """
    restricted = space.top_frequent(per_language_limit)
    forest = None
    if trees:
        forest = build_forest(restricted, trees=trees, leaf_capacity=leaf_capacity, seed=seed, threads=threads)
    return build_graph(restricted, k=k, forest=forest, symmetrization=symmetrization, threads=threads)


def export_edges(graph: LexicalGraph, path: Union[str, Path]) -> Path:
    """TSV edge list: word_i, lang_i, word_j, lang_j, weight (6 decimals), one line per edge, i < j."""
    rows = (
        (graph.words[i], graph.labels[i], graph.words[j], graph.labels[j], format_real(w))
        for i, j, w in graph.edges()
    )
    return write_tsv(path, ("word_i", "lang_i", "word_j", "lang_j", "weight"), rows)
