"""Correlations, the standardized-feature regression ablation and the (k, t) grid sweep."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, stats

from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace
from lexicalmodularity.graph.modularity import modularity_from_space
from lexicalmodularity.utils.constants import DEFAULT_LEAF_CAPACITY, DEFAULT_SEED
from lexicalmodularity.utils.errors import (
    ConstantInputError,
    FeatureTableError,
    InputError,
    LexicalModularityError,
    SweepCellError,
    UndefinedMetricError,
)
from lexicalmodularity.utils.helpers import read_tsv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureTable:
    """Named real-valued feature columns plus one target column, all of equal length >= 3."""

    features: Dict[str, np.ndarray]
    target_name: str
    target: np.ndarray

    def __post_init__(self):
        columns = dict(self.features)
        columns[self.target_name] = self.target
        lengths = {len(values) for values in columns.values()}
        if len(lengths) != 1:
            raise FeatureTableError(f"Columns differ in length: {sorted(lengths)}")
        if lengths.pop() < 3:
            raise FeatureTableError("A feature table needs at least 3 rows")
        for name, values in columns.items():
            if not np.all(np.isfinite(np.asarray(values, dtype=np.float64))):
                raise FeatureTableError(f"Column {name!r} has non-finite entries")
        object.__setattr__(
            self, "features", {name: np.asarray(values, dtype=np.float64) for name, values in self.features.items()}
        )
        object.__setattr__(self, "target", np.asarray(self.target, dtype=np.float64))

    @property
    def n_rows(self) -> int:
        return len(self.target)


@dataclass(frozen=True)
class RegressionResult:
    coefficients: Dict[str, float]
    intercept: float
    r_squared: float
    ablated: Optional[str] = None


@dataclass(frozen=True)
class SweepCell:
    k: int
    trees: int
    pearson: Optional[float]
    spearman: Optional[float]
    modularity: Tuple[float, ...]


def _check_pair(x, y) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError(f"Length mismatch: {x.shape} vs {y.shape}")
    if len(x) < 3:
        raise InputError(f"Correlation needs at least 3 observations, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InputError("Correlation inputs must be finite")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ConstantInputError("Correlation is undefined for a constant vector")
    return x, y


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson's r."""
    x, y = _check_pair(x, y)
    return float(stats.pearsonr(x, y)[0])


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho: Pearson's r of the rank vectors, ties receiving average ranks."""
    x, y = _check_pair(x, y)
    return float(stats.spearmanr(x, y)[0])


def standardize(values: np.ndarray, name: str = "feature") -> np.ndarray:
    """z-scores with the population (divide-by-n) standard deviation."""
    sd = np.std(values)
    if sd == 0:
        raise ConstantInputError(f"Column {name!r} has zero variance and cannot be standardized")
    return (values - np.mean(values)) / sd


def ablation_regression(table: FeatureTable, ablate: Optional[str] = None) -> RegressionResult:
    """
    Ordinary least squares with intercept of the raw target on the z-scored
    features, optionally without the `ablate` column. Collinear features give
    a minimum-norm solution (R^2 is unaffected) and a warning.

    Raises:
        FeatureTableError: Unknown ablation column, no feature left, or fewer
            rows than features + 1.
        ConstantInputError: A feature or the target has zero variance.
    """
    if ablate is not None and ablate not in table.features:
        raise FeatureTableError(f"Unknown feature {ablate!r} (have {', '.join(table.features)})")
    names = [name for name in table.features if name != ablate]
    if not names:
        raise FeatureTableError("No feature column left after ablation")
    if table.n_rows < len(names) + 1:
        raise FeatureTableError(f"{table.n_rows} rows cannot fit {len(names)} features plus an intercept")

    design = np.column_stack([np.ones(table.n_rows)] + [standardize(table.features[name], name) for name in names])
    solution, _, rank, _ = linalg.lstsq(design, table.target)
    if rank < design.shape[1]:
        logger.warning(f"Design matrix has rank {rank} < {design.shape[1]}; coefficients are not unique")

    residual = table.target - design @ solution
    centered = table.target - np.mean(table.target)
    total = float(centered @ centered)
    if total == 0:
        raise ConstantInputError(f"Target {table.target_name!r} is constant; R^2 is undefined")
    r_squared = 1.0 - float(residual @ residual) / total
    return RegressionResult(
        coefficients={name: float(value) for name, value in zip(names, solution[1:])},
        intercept=float(solution[0]),
        r_squared=r_squared,
        ablated=ablate,
    )


def load_feature_table(path: Union[str, Path], target: str, features: Optional[Sequence[str]] = None) -> FeatureTable:
    """
    Read a TSV with a header row. Every numeric column other than `target` is a
    feature unless `features` names them; non-numeric columns (labels) are
    ignored when features are inferred.
    """
    rows = read_tsv(path)
    if not rows:
        raise FeatureTableError(f"{path}: no data rows")
    header = list(rows[0].keys())
    if target not in header:
        raise FeatureTableError(f"{path}: target column {target!r} not found (have {', '.join(header)})")

    def column(name: str) -> Optional[np.ndarray]:
        try:
            return np.array([float(row[name]) for row in rows], dtype=np.float64)
        except (TypeError, ValueError):
            return None

    target_values = column(target)
    if target_values is None:
        raise FeatureTableError(f"{path}: target column {target!r} is not numeric")
    columns: Dict[str, np.ndarray] = {}
    for name in features or [name for name in header if name != target]:
        if name not in header:
            raise FeatureTableError(f"{path}: feature column {name!r} not found")
        values = column(name)
        if values is None:
            if features:
                raise FeatureTableError(f"{path}: feature column {name!r} is not numeric")
            logger.debug(f"{path}: ignoring non-numeric column {name!r}")
            continue
        columns[name] = values
    if not columns:
        raise FeatureTableError(f"{path}: no numeric feature columns")
    return FeatureTable(features=columns, target_name=target, target=target_values)


def sweep(
    spaces: Sequence[EmbeddingSpace],
    k_values: Sequence[int],
    t_values: Sequence[int],
    target_scores: Sequence[float],
    seed: int = DEFAULT_SEED,
    limit: Optional[int] = None,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    threads: int = 1,
) -> List[SweepCell]:
    """
    For every (k, t) cell, the normalized modularity of each multilingual space
    and its Pearson and Spearman correlation with `target_scores`. A cell whose
    modularity values are constant records missing correlations; any other
    failure is raised with the cell's (k, t) attached.
    """
    if len(spaces) != len(target_scores):
        raise InputError(f"{len(spaces)} embeddings but {len(target_scores)} target scores")
    grid = list(product(k_values, t_values))

    def run(cell: Tuple[int, int]) -> SweepCell:
        k, trees = cell
        try:
            values = tuple(
                modularity_from_space(space, k=k, trees=trees, seed=seed, limit=limit, leaf_capacity=leaf_capacity).q_norm
                for space in spaces
            )
        except LexicalModularityError as e:
            raise SweepCellError(k, trees, e) from e
        try:
            r, rho = pearson(values, target_scores), spearman(values, target_scores)
        except UndefinedMetricError as e:
            logger.warning(f"Sweep cell k={k}, t={trees}: {e}; correlation recorded as missing")
            r = rho = None
        logger.info(f"Sweep cell k={k}, t={trees} done")
        return SweepCell(k=k, trees=trees, pearson=r, spearman=rho, modularity=values)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        return list(executor.map(run, grid))
