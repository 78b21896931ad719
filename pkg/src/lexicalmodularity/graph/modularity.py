"""Weighted modularity of a lexical graph with respect to its language labels.

    a_l    = (1/2m) * sum_i d_i [g_i = l]                  expected share of language l
    e_ll   = (1/2m) * sum_ij A_ij [g_i = l][g_j = l]       observed within-language share
    Q      = sum_l (e_ll - a_l^2)
    Q_max  = 1 - sum_l a_l^2
    Q_norm = Q / Q_max

Sums use `math.fsum`, which is exactly rounded and therefore independent of
summation order (node numbering, language naming).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy import sparse

from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace
from lexicalmodularity.graph.ann_index import build_forest
from lexicalmodularity.graph.lexical_graph import LexicalGraph, build_graph, top_frequent_subgraph
from lexicalmodularity.utils.constants import DEFAULT_K, DEFAULT_LEAF_CAPACITY, DEFAULT_SEED, DEFAULT_TREES, Symmetrization
from lexicalmodularity.utils.errors import EmptyGraphError, SingleLanguageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LanguageShare:
    e_ll: float
    a_l: float


@dataclass(frozen=True)
class ModularityReport:
    q: float
    q_max: float
    q_norm: float
    k: int
    n_nodes: int
    n_edges: int
    per_language: Dict[str, LanguageShare] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        """Flat JSON-ready record; reals keep full precision."""
        return {
            "q": self.q,
            "q_max": self.q_max,
            "q_norm": self.q_norm,
            "k": self.k,
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "per_language": {
                language: {"e_ll": share.e_ll, "a_l": share.a_l}
                for language, share in sorted(self.per_language.items())
            },
        }


def _require_weight(graph: LexicalGraph) -> float:
    total = math.fsum(graph.adjacency.data)
    if total <= 0:
        raise EmptyGraphError(f"Graph over {graph.n} nodes has no edges; modularity is undefined")
    return total


def _mask(graph: LexicalGraph, language: str) -> np.ndarray:
    return np.array([label == language for label in graph.labels], dtype=bool)


def expected_fraction(graph: LexicalGraph, language: str) -> float:
    """a_l: share of the total weighted degree held by nodes of `language`."""
    total = _require_weight(graph)
    coo = sparse.coo_matrix(graph.adjacency)
    return math.fsum(coo.data[_mask(graph, language)[coo.row]]) / total


def intra_fraction(graph: LexicalGraph, language: str) -> float:
    """e_ll: share of the ordered-pair edge weight with both endpoints in `language`."""
    total = _require_weight(graph)
    mask = _mask(graph, language)
    coo = sparse.coo_matrix(graph.adjacency)
    inside = mask[coo.row] & mask[coo.col]
    return math.fsum(coo.data[inside]) / total


def modularity(graph: LexicalGraph) -> ModularityReport:
    """
    Modularity report of `graph` over its language labels. Languages present
    only as isolated nodes are reported with a_l = e_ll = 0.

    Raises:
        EmptyGraphError: The graph has no edge weight.
        SingleLanguageError: Fewer than two languages among the nodes, or all
            edge weight sits in one language (Q_max = 0).
    """
    languages = graph.language_codes
    if len(languages) < 2:
        raise SingleLanguageError(
            f"Modularity needs at least two languages, found {', '.join(languages) or 'none'}"
        )
    total = _require_weight(graph)

    coo = sparse.coo_matrix(graph.adjacency)
    labels = np.array(graph.labels, dtype=object)
    same = labels[coo.row] == labels[coo.col]
    per_language: Dict[str, LanguageShare] = {}
    for language in languages:
        mask = labels == language
        # same summands as total, so one language holding all weight gives a_l == 1 exactly
        a_l = math.fsum(coo.data[mask[coo.row]]) / total
        e_ll = math.fsum(coo.data[same & mask[coo.row]]) / total
        per_language[language] = LanguageShare(e_ll=e_ll, a_l=a_l)

    q = math.fsum(share.e_ll - share.a_l ** 2 for share in per_language.values())
    q_max = 1.0 - math.fsum(share.a_l ** 2 for share in per_language.values())
    if q_max <= 0:
        raise SingleLanguageError("All edge weight lies within one language (Q_max = 0); Q_norm is undefined")

    report = ModularityReport(
        q=q,
        q_max=q_max,
        q_norm=q / q_max,
        k=graph.k,
        n_nodes=graph.n,
        n_edges=graph.n_edges,
        per_language=per_language,
    )
    logger.debug(f"Modularity Q={report.q:.6f} Q_max={report.q_max:.6f} Q_norm={report.q_norm:.6f}")
    return report


def modularity_from_space(
    space: EmbeddingSpace,
    k: int = DEFAULT_K,
    trees: Optional[int] = DEFAULT_TREES,
    seed: int = DEFAULT_SEED,
    limit: Optional[int] = None,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    symmetrization: Symmetrization = Symmetrization.UNION,
    threads: int = 1,
) -> ModularityReport:
    """
    Build the lexical graph of a unit-normalized multilingual space and compute
    its modularity. `trees=None` uses exact kNN; `limit` restricts every
    language to its most frequent words first.
    """
    if len(space.language_codes) < 2:
        raise SingleLanguageError(
            f"Modularity needs at least two languages, found {', '.join(space.language_codes)}"
        )
    if limit is not None:
        graph = top_frequent_subgraph(
            space,
            limit,
            k=k,
            trees=trees,
            seed=seed,
            leaf_capacity=leaf_capacity,
            symmetrization=symmetrization,
            threads=threads,
        )
    else:
        forest = None
        if trees:
            forest = build_forest(space, trees=trees, leaf_capacity=leaf_capacity, seed=seed, threads=threads)
        graph = build_graph(space, k=k, forest=forest, symmetrization=symmetrization, threads=threads)
    return modularity(graph)
