"""Approximate k-nearest-neighbour search with a forest of random projection trees.

Each internal node splits its points by the hyperplane through the midpoint of
two randomly sampled points (Annoy-style). A query descends to one leaf per
tree; the union of those leaves is rescored exactly by cosine similarity.
Ties everywhere are broken by (higher similarity, then lower node id).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple, Union

import numpy as np

from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace
from lexicalmodularity.utils.constants import DEFAULT_LEAF_CAPACITY, DEFAULT_SEED, DEFAULT_TREES
from lexicalmodularity.utils.errors import DimensionMismatchError, EmptyInputError, InvalidParameterError

logger = logging.getLogger(__name__)

SPLIT_ATTEMPTS = 3
QUERY_CHUNK = 512

Points = Union[EmbeddingSpace, np.ndarray]


@dataclass(frozen=True, eq=False)
class RpTree:
    """
    One tree in flat arrays. A child reference `c >= 0` is an internal node id;
    `c < 0` is the leaf `-c - 1`.
    """

    root: int
    normals: np.ndarray
    offsets: np.ndarray
    children: np.ndarray
    leaves: Tuple[np.ndarray, ...]
    point_leaf: np.ndarray

    def route(self, queries: np.ndarray) -> np.ndarray:
        """Leaf id reached by each query row."""
        refs = np.full(queries.shape[0], self.root, dtype=np.int64)
        active = np.flatnonzero(refs >= 0)
        while len(active):
            nodes = refs[active]
            right = np.einsum("ij,ij->i", queries[active], self.normals[nodes]) > self.offsets[nodes]
            refs[active] = self.children[nodes, right.astype(np.int64)]
            active = active[refs[active] >= 0]
        return -refs - 1

    def structure(self) -> Tuple:
        """Hashable summary used to compare trees for equality."""
        return (
            self.root,
            self.normals.tobytes(),
            self.offsets.tobytes(),
            self.children.tobytes(),
            tuple(leaf.tobytes() for leaf in self.leaves),
        )


@dataclass(frozen=True, eq=False)
class RpForest:
    trees: Tuple[RpTree, ...]
    leaf_capacity: int
    seed: int
    points: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @cached_property
    def norms(self) -> np.ndarray:
        return _safe_norms(self.points)

    def candidates_of_node(self, node: int) -> np.ndarray:
        """Union of the leaves holding indexed point `node`, across all trees."""
        return np.unique(np.concatenate([tree.leaves[tree.point_leaf[node]] for tree in self.trees]))

    def candidates_of_queries(self, queries: np.ndarray) -> List[np.ndarray]:
        """Union of the leaves each query row descends to, across all trees."""
        leaf_ids = np.stack([tree.route(queries) for tree in self.trees])
        return [
            np.unique(np.concatenate([tree.leaves[leaf] for tree, leaf in zip(self.trees, leaf_ids[:, q])]))
            for q in range(queries.shape[0])
        ]


def _as_points(points: Points) -> np.ndarray:
    if isinstance(points, EmbeddingSpace):
        return points.vectors
    return np.asarray(points, dtype=np.float64)


def _safe_norms(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    return np.where(norms == 0, 1.0, norms)


def top_k(ids: np.ndarray, sims: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """The `k` best (id, similarity) pairs by descending similarity, lower id first on ties."""
    if len(ids) > k:
        kth = np.partition(sims, len(sims) - k)[len(sims) - k]
        keep = sims >= kth
        ids, sims = ids[keep], sims[keep]
    order = np.lexsort((ids, -sims))[:k]
    return ids[order], sims[order]


def _split(points: np.ndarray, rng: np.random.Generator):
    """Hyperplane (normal, offset) and the boolean right-side mask, or None if no split separates the points."""
    n = points.shape[0]
    for _ in range(SPLIT_ATTEMPTS):
        i, j = rng.choice(n, size=2, replace=False)
        normal = points[i] - points[j]
        if not np.any(normal):
            continue
        offset = float(normal @ (points[i] + points[j])) / 2.0
        right = points @ normal > offset
        if 0 < np.count_nonzero(right) < n:
            return normal, offset, right
    # Near-duplicate points: fall back to a random direction cut at the median.
    normal = rng.standard_normal(points.shape[1])
    projections = points @ normal
    offset = float(np.median(projections))
    right = projections > offset
    if 0 < np.count_nonzero(right) < n:
        return normal, offset, right
    return None


def _build_tree(points: np.ndarray, leaf_capacity: int, rng: np.random.Generator) -> RpTree:
    n, d = points.shape
    normals: List[np.ndarray] = []
    offsets: List[float] = []
    children: List[List[int]] = []
    leaves: List[np.ndarray] = []
    point_leaf = np.empty(n, dtype=np.int64)
    root = 0

    stack = [(np.arange(n, dtype=np.int64), -1, 0)]
    while stack:
        members, parent, side = stack.pop()
        split = _split(points[members], rng) if len(members) > leaf_capacity else None
        if split is None:
            point_leaf[members] = len(leaves)
            leaves.append(np.sort(members))
            ref = -len(leaves)
        else:
            normal, offset, right = split
            ref = len(normals)
            normals.append(normal)
            offsets.append(offset)
            children.append([0, 0])
            stack.append((members[right], ref, 1))
            stack.append((members[~right], ref, 0))
        if parent < 0:
            root = ref
        else:
            children[parent][side] = ref

    return RpTree(
        root=root,
        normals=np.array(normals, dtype=np.float64).reshape(len(normals), d),
        offsets=np.array(offsets, dtype=np.float64),
        children=np.array(children, dtype=np.int64).reshape(len(children), 2),
        leaves=tuple(leaves),
        point_leaf=point_leaf,
    )


def build_forest(
    points: Points,
    trees: int = DEFAULT_TREES,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> RpForest:
    """
    Index `points` (an EmbeddingSpace or an (n, d) array) with `trees` random
    projection trees. Every tree draws from its own generator spawned from
    `seed`, so the forest is identical for any thread count.

    Raises:
        EmptyInputError: No points.
        InvalidParameterError: trees < 1 or leaf_capacity < 1.
    """
    vectors = _as_points(points)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise EmptyInputError("Cannot index an empty set of vectors")
    if trees < 1:
        raise InvalidParameterError(f"trees must be >= 1, got {trees}")
    if leaf_capacity < 1:
        raise InvalidParameterError(f"leaf_capacity must be >= 1, got {leaf_capacity}")

    generators = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(trees)]
    logger.debug(f"Building {trees} trees over {vectors.shape[0]} points (leaf capacity {leaf_capacity})")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        built = list(executor.map(lambda rng: _build_tree(vectors, leaf_capacity, rng), generators))
    return RpForest(trees=tuple(built), leaf_capacity=leaf_capacity, seed=seed, points=vectors)


def _check_query(query: np.ndarray, dim: int) -> np.ndarray:
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != dim:
        raise DimensionMismatchError(f"Query of shape {query.shape} does not match index dimension {dim}")
    return query


def _score(points: np.ndarray, norms: np.ndarray, candidates: np.ndarray, query: np.ndarray) -> np.ndarray:
    query_norm = np.linalg.norm(query) or 1.0
    return (points[candidates] @ query) / (norms[candidates] * query_norm)


def knn(
    forest: RpForest,
    query: np.ndarray,
    k: int,
    exclude_self: Optional[int] = None,
) -> List[Tuple[int, float]]:
    """
    Up to `k` (node id, cosine) pairs from the union of the leaves `query`
    reaches, best first. Fewer than `k` are returned when the leaves hold fewer
    candidates.
    """
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    query = _check_query(query, forest.dim)
    candidates = forest.candidates_of_queries(query[np.newaxis, :])[0]
    if exclude_self is not None:
        candidates = candidates[candidates != exclude_self]
    ids, sims = top_k(candidates, _score(forest.points, forest.norms, candidates, query), k)
    return [(int(i), float(s)) for i, s in zip(ids, sims)]


def exact_knn(
    points: Points,
    query: np.ndarray,
    k: int,
    exclude_self: Optional[int] = None,
) -> List[Tuple[int, float]]:
    """Exhaustive version of `knn`: the exact top-k by cosine."""
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    vectors = _as_points(points)
    query = _check_query(query, vectors.shape[1])
    candidates = np.arange(vectors.shape[0], dtype=np.int64)
    if exclude_self is not None:
        candidates = candidates[candidates != exclude_self]
    ids, sims = top_k(candidates, _score(vectors, _safe_norms(vectors), candidates, query), k)
    return [(int(i), float(s)) for i, s in zip(ids, sims)]


def _pad(rows: List[Tuple[np.ndarray, np.ndarray]], k: int) -> Tuple[np.ndarray, np.ndarray]:
    ids = np.full((len(rows), k), -1, dtype=np.int64)
    sims = np.full((len(rows), k), -np.inf)
    for i, (row_ids, row_sims) in enumerate(rows):
        ids[i, : len(row_ids)] = row_ids
        sims[i, : len(row_sims)] = row_sims
    return ids, sims


def exact_neighbors(points: Points, k: int, threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact self-excluded top-k of every indexed point.
    Returns:
        (ids, sims): (n, k) arrays; rows are padded with -1 / -inf when n - 1 < k.
    """
    vectors = _as_points(points)
    n = vectors.shape[0]
    norms = _safe_norms(vectors)
    all_ids = np.arange(n, dtype=np.int64)

    def run(start: int) -> List[Tuple[np.ndarray, np.ndarray]]:
        stop = min(start + QUERY_CHUNK, n)
        block = (vectors[start:stop] @ vectors.T) / (norms[start:stop, np.newaxis] * norms[np.newaxis, :])
        rows = []
        for offset, node in enumerate(range(start, stop)):
            keep = all_ids != node
            rows.append(top_k(all_ids[keep], block[offset][keep], k))
        return rows

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        chunks = list(executor.map(run, range(0, n, QUERY_CHUNK)))
    return _pad([row for chunk in chunks for row in chunk], k)


def forest_neighbors(forest: RpForest, k: int, threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Approximate self-excluded top-k of every indexed point, from the leaves that hold it."""
    n = len(forest)

    def run(start: int) -> List[Tuple[np.ndarray, np.ndarray]]:
        rows = []
        for node in range(start, min(start + QUERY_CHUNK, n)):
            candidates = forest.candidates_of_node(node)
            candidates = candidates[candidates != node]
            sims = _score(forest.points, forest.norms, candidates, forest.points[node])
            rows.append(top_k(candidates, sims, k))
        return rows

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        chunks = list(executor.map(run, range(0, n, QUERY_CHUNK)))
    return _pad([row for chunk in chunks for row in chunk], k)


def recall_at_k(approximate: List[List[int]], exact: List[List[int]]) -> float:
    """Mean fraction of each exact neighbour list recovered by the approximate one."""
    fractions = [
        len(set(a) & set(e)) / len(e) for a, e in zip(approximate, exact) if e
    ]
    return float(np.mean(fractions)) if fractions else 0.0
