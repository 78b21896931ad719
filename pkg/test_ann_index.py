# test_ann_index.py
import time

import numpy as np
import pytest

from lexicalmodularity.embeddings.embedding_io import unit_rows
from lexicalmodularity.graph.ann_index import (
    build_forest,
    exact_knn,
    exact_neighbors,
    forest_neighbors,
    knn,
    recall_at_k,
    top_k,
)
from lexicalmodularity.utils.errors import DimensionMismatchError, EmptyInputError, InvalidParameterError
from lexicalmodularity.utils.synthetic import make_space

THREE_POINTS = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])


def random_unit(n, d, seed):
    return unit_rows(np.random.default_rng(seed).standard_normal((n, d)))


def test_single_leaf_when_capacity_exceeds_n():
    forest = build_forest(random_unit(10, 4, 0), trees=1, leaf_capacity=16)
    (tree,) = forest.trees
    assert len(tree.leaves) == 1
    assert list(tree.leaves[0]) == list(range(10))


def test_every_point_in_exactly_one_leaf_per_tree():
    forest = build_forest(random_unit(300, 8, 1), trees=5, leaf_capacity=8, seed=2)
    for tree in forest.trees:
        members = np.concatenate(tree.leaves)
        assert sorted(members) == list(range(300))
        assert all(len(leaf) <= 8 for leaf in tree.leaves)
        for leaf_id, leaf in enumerate(tree.leaves):
            assert np.all(tree.point_leaf[leaf] == leaf_id)


def test_build_is_deterministic_across_runs_and_threads():
    points = random_unit(500, 10, 4)
    first = build_forest(points, trees=6, leaf_capacity=16, seed=7, threads=1)
    second = build_forest(points, trees=6, leaf_capacity=16, seed=7, threads=4)
    assert [t.structure() for t in first.trees] == [t.structure() for t in second.trees]
    other = build_forest(points, trees=6, leaf_capacity=16, seed=8)
    assert [t.structure() for t in first.trees] != [t.structure() for t in other.trees]


def test_build_accepts_embedding_space():
    space = make_space(random_unit(20, 3, 5), "en")
    assert len(build_forest(space, trees=2)) == 20


def test_build_errors():
    with pytest.raises(InvalidParameterError):
        build_forest(random_unit(5, 2, 0), trees=0)
    with pytest.raises(InvalidParameterError):
        build_forest(random_unit(5, 2, 0), trees=1, leaf_capacity=0)
    with pytest.raises(EmptyInputError):
        build_forest(np.empty((0, 3)), trees=1)


def test_duplicate_points_still_build():
    points = np.vstack([np.tile([1.0, 0.0], (50, 1)), np.tile([0.0, 1.0], (50, 1))])
    forest = build_forest(points, trees=3, leaf_capacity=4)
    for tree in forest.trees:
        assert sorted(np.concatenate(tree.leaves)) == list(range(100))


def test_knn_excluding_self():
    forest = build_forest(THREE_POINTS, trees=3)
    assert knn(forest, np.array([1.0, 0.0]), k=1, exclude_self=0) == [(1, 0.0)]


def test_knn_finds_query_point():
    forest = build_forest(THREE_POINTS, trees=3)
    assert knn(forest, np.array([0.0, 1.0]), k=1) == [(1, 1.0)]


def test_knn_short_list_when_k_exceeds_candidates():
    forest = build_forest(THREE_POINTS, trees=3)
    result = knn(forest, np.array([1.0, 0.0]), k=10, exclude_self=0)
    assert [i for i, _ in result] == [1, 2]


def test_knn_dimension_mismatch():
    forest = build_forest(THREE_POINTS, trees=1)
    with pytest.raises(DimensionMismatchError):
        knn(forest, np.array([1.0, 0.0, 0.0]), k=1)
    with pytest.raises(DimensionMismatchError):
        exact_knn(THREE_POINTS, np.array([1.0]), k=1)


def test_exact_knn_matches_brute_force():
    points = random_unit(30, 5, 9)
    query = random_unit(1, 5, 10)[0]
    expected = sorted(range(30), key=lambda i: (-float(points[i] @ query), i))[:4]
    assert [i for i, _ in exact_knn(points, query, k=4)] == expected


def test_exact_knn_all_others_sorted():
    result = exact_knn(THREE_POINTS, THREE_POINTS[0], k=2, exclude_self=0)
    assert result == [(1, 0.0), (2, -1.0)]


def test_exact_knn_tie_goes_to_lower_id():
    points = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    result = exact_knn(points, np.array([0.0, 1.0]), k=2)
    assert [i for i, _ in result] == [0, 2]


def test_top_k_order():
    ids, sims = top_k(np.array([5, 3, 9, 1]), np.array([0.5, 0.9, 0.5, 0.1]), 3)
    assert list(ids) == [3, 5, 9]
    assert list(sims) == [0.9, 0.5, 0.5]


def test_knn_never_returns_excluded_and_rescores_exactly():
    points = random_unit(400, 12, 11)
    forest = build_forest(points, trees=10, leaf_capacity=16, seed=3)
    for node in range(0, 400, 37):
        result = knn(forest, points[node], k=5, exclude_self=node)
        assert node not in [i for i, _ in result]
        for i, sim in result:
            assert abs(sim - float(points[i] @ points[node])) <= 1e-12


def test_neighbor_tables_are_padded():
    ids, sims = exact_neighbors(THREE_POINTS, k=4)
    assert ids.shape == (3, 4)
    assert list(ids[0]) == [1, 2, -1, -1]
    assert np.isneginf(sims[0, 3])


def test_forest_neighbors_match_exact_on_small_input():
    # Leaves larger than the input make the forest exhaustive.
    points = random_unit(25, 4, 12)
    exact_ids, _ = exact_neighbors(points, k=3)
    forest_ids, _ = forest_neighbors(build_forest(points, trees=2, leaf_capacity=32), k=3)
    np.testing.assert_array_equal(exact_ids, forest_ids)


def test_exact_neighbors_thread_independent():
    points = random_unit(1200, 6, 13)
    one = exact_neighbors(points, k=3, threads=1)
    four = exact_neighbors(points, k=3, threads=4)
    np.testing.assert_array_equal(one[0], four[0])
    np.testing.assert_array_equal(one[1], four[1])


def test_recall_at_k():
    assert recall_at_k([[1, 2, 3]], [[1, 2, 4]]) == pytest.approx(2 / 3)
    assert recall_at_k([], []) == 0.0


def test_forest_recall_on_random_unit_vectors():
    points = random_unit(10000, 100, 21)
    queries = random_unit(1000, 100, 22)
    started = time.monotonic()
    forest = build_forest(points, trees=450, leaf_capacity=32, seed=0, threads=4)
    approximate = [[i for i, _ in knn(forest, q, k=3)] for q in queries]
    exact = [[i for i, _ in exact_knn(points, q, k=3)] for q in queries]
    assert recall_at_k(approximate, exact) >= 0.90
    assert time.monotonic() - started < 120.0
