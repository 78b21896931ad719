# test_stats.py
import logging
import time

import numpy as np
import pytest

from lexicalmodularity.analysis.stats import (
    FeatureTable,
    ablation_regression,
    load_feature_table,
    pearson,
    spearman,
    standardize,
    sweep,
)
from lexicalmodularity.embeddings.embedding_io import merge_spaces
from lexicalmodularity.utils.errors import (
    ConstantInputError,
    FeatureTableError,
    InputError,
    SingleLanguageError,
    SweepCellError,
)
from lexicalmodularity.utils.synthetic import separation_family, twin_spaces


def average_ranks(values):
    """1-based ranks with ties sharing the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for position in range(i, j + 1):
            ranks[order[position]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def textbook_pearson(x, y):
    mx, my = sum(x) / len(x), sum(y) / len(y)
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / (sxx * syy) ** 0.5


def textbook_ols(columns, y):
    """z-score the columns, then solve the normal equations by Gauss-Jordan elimination."""
    n = len(y)
    rows = [[1.0] for _ in range(n)]
    for column in columns:
        mean = sum(column) / n
        sd = (sum((v - mean) ** 2 for v in column) / n) ** 0.5
        for row, v in zip(rows, column):
            row.append((v - mean) / sd)
    size = len(rows[0])
    augmented = [
        [sum(row[a] * row[b] for row in rows) for b in range(size)] + [sum(row[a] * t for row, t in zip(rows, y))]
        for a in range(size)
    ]
    for col in range(size):
        pivot = max(range(col, size), key=lambda r: abs(augmented[r][col]))
        augmented[col], augmented[pivot] = augmented[pivot], augmented[col]
        for r in range(size):
            if r != col:
                factor = augmented[r][col] / augmented[col][col]
                augmented[r] = [a - factor * b for a, b in zip(augmented[r], augmented[col])]
    beta = [augmented[r][size] / augmented[r][r] for r in range(size)]
    mean_y = sum(y) / n
    fitted = [sum(b * v for b, v in zip(beta, row)) for row in rows]
    ss_res = sum((t - f) ** 2 for t, f in zip(y, fitted))
    ss_tot = sum((t - mean_y) ** 2 for t in y)
    return beta[0], beta[1:], 1 - ss_res / ss_tot


def test_spearman_examples():
    assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
    assert spearman([1, 2, 3, 4], [40, 30, 20, 10]) == pytest.approx(-1.0)
    assert spearman([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(0.9486833, abs=1e-7)


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_correlation_errors():
    with pytest.raises(ConstantInputError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ConstantInputError):
        spearman([1, 2, 3], [5, 5, 5])
    with pytest.raises(InputError):
        pearson([1, 2], [1, 2])
    with pytest.raises(InputError):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(InputError):
        pearson([1, 2, float("nan")], [1, 2, 3])


def test_correlation_invariances():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(30), rng.standard_normal(30)
    assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-12)
    assert pearson(3.0 * x + 7.0, y) == pytest.approx(pearson(x, y), abs=1e-12)
    assert spearman(np.exp(x), y) == pytest.approx(spearman(x, y), abs=1e-12)
    assert spearman(x, y) == pytest.approx(spearman(y, x), abs=1e-12)


def test_correlations_match_independent_implementation():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(3, 40))
        # rounding produces ties
        x = np.round(rng.standard_normal(n), 1)
        y = np.round(rng.standard_normal(n), 1)
        if len(set(x)) == 1 or len(set(y)) == 1:
            continue
        assert abs(pearson(x, y) - textbook_pearson(list(x), list(y))) <= 1e-10
        expected = textbook_pearson(average_ranks(list(x)), average_ranks(list(y)))
        assert abs(spearman(x, y) - expected) <= 1e-10


def test_standardize():
    z = standardize(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(z, [-np.sqrt(1.5), 0.0, np.sqrt(1.5)])
    with pytest.raises(ConstantInputError):
        standardize(np.array([4.0, 4.0, 4.0]), "flat")


def test_perfect_linear_fit():
    a = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    b = np.array([2.0, 1.0, 4.0, 3.0, 6.0])
    table = FeatureTable({"a": a, "b": b}, "score", 2 * a - b + 3)
    result = ablation_regression(table)
    assert result.r_squared == pytest.approx(1.0, abs=1e-12)
    assert result.coefficients["a"] == pytest.approx(2 * np.std(a))
    assert result.coefficients["b"] == pytest.approx(-np.std(b))
    assert result.intercept == pytest.approx(np.mean(2 * a - b + 3))
    assert result.ablated is None


def test_noise_feature_explains_little():
    rng = np.random.default_rng(2)
    table = FeatureTable({"noise": rng.standard_normal(200)}, "score", rng.standard_normal(200))
    assert 0.0 <= ablation_regression(table).r_squared < 0.2


def test_duplicated_feature_keeps_r_squared(caplog):
    rng = np.random.default_rng(3)
    x = rng.standard_normal(30)
    y = 0.5 * x + rng.standard_normal(30)
    single = ablation_regression(FeatureTable({"x": x}, "y", y))
    with caplog.at_level(logging.WARNING):
        double = ablation_regression(FeatureTable({"x": x, "x_copy": x.copy()}, "y", y))
    assert double.r_squared == pytest.approx(single.r_squared, abs=1e-10)
    assert "rank" in caplog.text


def test_ablation_is_monotone():
    rng = np.random.default_rng(4)
    features = {name: rng.standard_normal(25) for name in ("mod", "size", "typology")}
    target = features["mod"] - 0.5 * features["size"] + 0.3 * rng.standard_normal(25)
    table = FeatureTable(features, "bli", target)
    full = ablation_regression(table)
    for name in features:
        ablated = ablation_regression(table, ablate=name)
        assert ablated.r_squared <= full.r_squared + 1e-12
        assert ablated.ablated == name
        assert name not in ablated.coefficients
    assert full.r_squared - ablation_regression(table, "mod").r_squared > 0.1


def test_ablation_errors():
    table = FeatureTable({"a": [1.0, 2.0, 3.0]}, "y", [1.0, 3.0, 2.0])
    with pytest.raises(FeatureTableError):
        ablation_regression(table, ablate="missing")
    with pytest.raises(FeatureTableError):
        ablation_regression(table, ablate="a")
    with pytest.raises(FeatureTableError):
        ablation_regression(FeatureTable({"a": [1.0, 2.0, 3.0], "b": [3.0, 1.0, 2.0], "c": [2.0, 2.0, 1.0]}, "y", [1.0, 2.0, 3.0]))
    with pytest.raises(ConstantInputError):
        ablation_regression(FeatureTable({"a": [1.0, 2.0, 3.0]}, "y", [2.0, 2.0, 2.0]))


def test_feature_table_validation():
    with pytest.raises(FeatureTableError):
        FeatureTable({"a": [1.0, 2.0, 3.0]}, "y", [1.0, 2.0])
    with pytest.raises(FeatureTableError):
        FeatureTable({"a": [1.0, 2.0]}, "y", [1.0, 2.0])
    with pytest.raises(FeatureTableError):
        FeatureTable({"a": [1.0, float("inf"), 3.0]}, "y", [1.0, 2.0, 3.0])


def test_load_feature_table(tmp_path):
    path = tmp_path / "features.tsv"
    path.write_text(
        "language\tmodularity\tsize\tbli\nja\t0.60\t1000\t0.30\nde\t0.20\t5000\t0.55\nfr\t0.10\t8000\t0.70\n",
        encoding="utf-8",
    )
    table = load_feature_table(path, "bli")
    assert list(table.features) == ["modularity", "size"]
    np.testing.assert_array_equal(table.target, [0.30, 0.55, 0.70])
    assert list(load_feature_table(path, "bli", ["size"]).features) == ["size"]
    with pytest.raises(FeatureTableError):
        load_feature_table(path, "missing")
    with pytest.raises(FeatureTableError):
        load_feature_table(path, "bli", ["language"])
    with pytest.raises(FeatureTableError):
        load_feature_table(path, "language")


def test_sweep_single_cell():
    spaces, scores = separation_family(count=5, n=10)
    (cell,) = sweep(spaces, [3], [5], scores)
    assert (cell.k, cell.trees) == (3, 5)
    assert len(cell.modularity) == 5
    assert cell.spearman == pytest.approx(-1.0)
    assert cell.pearson < 0


def test_sweep_grid_order_and_constant_cell(caplog):
    spaces, scores = separation_family(count=6, n=12)
    with caplog.at_level(logging.WARNING):
        cells = sweep(spaces, [1, 3], [5, 10], scores, threads=2)
    assert [(c.k, c.trees) for c in cells] == [(1, 5), (1, 10), (3, 5), (3, 10)]
    # with k = 1 every word links only to its translation
    assert all(value == -1.0 for value in cells[0].modularity)
    assert cells[0].pearson is None and cells[0].spearman is None
    assert cells[2].spearman == pytest.approx(-1.0)
    assert cells[3].spearman == pytest.approx(-1.0)
    assert "missing" in caplog.text


def test_sweep_errors():
    spaces, scores = separation_family(count=3, n=6)
    with pytest.raises(InputError):
        sweep(spaces, [3], [5], scores[:2])
    en, _ = twin_spaces(n=10, dim=4)
    with pytest.raises(SweepCellError) as excinfo:
        sweep([en, en, en], [2], [5], [1.0, 2.0, 3.0])
    assert (excinfo.value.k, excinfo.value.trees) == (2, 5)
    assert isinstance(excinfo.value.cause, SingleLanguageError)


def test_sweep_is_thread_independent():
    en, de = twin_spaces(n=30, dim=8, seed=5)
    spaces = [merge_spaces([en, de])] + separation_family(count=3, n=10)[0]
    scores = [0.9, 0.5, 0.4, 0.1]
    assert sweep(spaces, [2, 3], [4], scores, leaf_capacity=8, threads=1) == sweep(
        spaces, [2, 3], [4], scores, leaf_capacity=8, threads=4
    )


def test_worked_examples():
    assert spearman([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)
    assert pearson([0, 1, 2], [0, 1, 4]) == pytest.approx(0.9607689228, abs=1e-10)
    table = FeatureTable({"same": [1.0, 4.0, 2.0, 8.0]}, "y", [1.0, 4.0, 2.0, 8.0])
    assert ablation_regression(table).r_squared == pytest.approx(1.0, abs=1e-12)


def test_ablation_matches_independent_implementation():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n_features = int(rng.integers(1, 5))
        n = int(rng.integers(n_features + 12, 50))
        names = [f"f{i}" for i in range(n_features + 1)]
        features = {name: rng.standard_normal(n) for name in names}
        target = rng.standard_normal(n) + features["f0"]
        ablate = names[int(rng.integers(len(names)))] if rng.random() < 0.5 else None
        kept = [name for name in names if name != ablate]

        result = ablation_regression(FeatureTable(features, "y", target), ablate=ablate)
        intercept, coefficients, r_squared = textbook_ols([list(features[name]) for name in kept], list(target))
        assert abs(result.intercept - intercept) <= 1e-10
        for name, expected in zip(kept, coefficients):
            assert abs(result.coefficients[name] - expected) <= 1e-10
        assert abs(result.r_squared - r_squared) <= 1e-10


def test_eight_pair_separation_family_ranks_inversely():
    spaces, scores = separation_family(count=8)
    started = time.monotonic()
    (cell,) = sweep(spaces, [3], [450], scores)
    assert cell.spearman == pytest.approx(-1.0, abs=1e-12)
    assert time.monotonic() - started < 60.0
