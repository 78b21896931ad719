import logging
from pathlib import Path
from typing import List, Tuple

from lexicalmodularity.analysis.stats import ablation_regression, load_feature_table, pearson, spearman, sweep
from lexicalmodularity.config.settings import RunConfig
from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, merge_spaces
from lexicalmodularity.operations.inputs import load_space, log_config, print_table, require_out, write_config_beside
from lexicalmodularity.utils.errors import ConstantInputError, FeatureTableError, InvalidParameterError
from lexicalmodularity.utils.formatting_helpers import format_real
from lexicalmodularity.utils.helpers import read_tsv, write_tsv

logger = logging.getLogger(__name__)

MANIFEST_NAME = "name"


def _table_and_target(config: RunConfig) -> Tuple[str, str]:
    if not config.table:
        raise InvalidParameterError(f"'{config.subcommand}' needs --table")
    if not config.target_column:
        raise InvalidParameterError(f"'{config.subcommand}' needs --target")
    return config.table, config.target_column


def cmd_correlate(config: RunConfig) -> Path:
    """Pearson and Spearman correlation of every feature column with the target column."""
    out = require_out(config)
    log_config(config)
    table = load_feature_table(*_table_and_target(config))

    rows = []
    for name, values in table.features.items():
        try:
            r, rho = pearson(values, table.target), spearman(values, table.target)
        except ConstantInputError as e:
            logger.warning(f"Column {name!r}: {e}; correlation recorded as missing")
            r = rho = None
        rows.append((name, table.n_rows, r, rho))

    path = write_tsv(
        out,
        ("feature", "n", "pearson", "spearman"),
        ((name, n, format_real(r), format_real(rho)) for name, n, r, rho in rows),
    )
    write_config_beside(config, out)
    print_table(rows, ["Feature", "n", "Pearson", "Spearman"])
    return path


def cmd_ablate(config: RunConfig) -> Path:
    """
    Standardized-feature regression on all features, then once without each
    feature in turn. One row per fit: the ablated feature ("none" for the full
    model), R^2, its drop from the full model and the coefficients.
    """
    out = require_out(config)
    log_config(config)
    table = load_feature_table(*_table_and_target(config))
    names = list(table.features)

    full = ablation_regression(table)
    fits = [full]
    if len(names) > 1:
        fits.extend(ablation_regression(table, ablate=name) for name in names)

    rows = []
    for fit in fits:
        coefficients = [format_real(fit.coefficients[name]) if name in fit.coefficients else "" for name in names]
        rows.append(
            [fit.ablated or "none", format_real(fit.r_squared), format_real(full.r_squared - fit.r_squared), format_real(fit.intercept)]
            + coefficients
        )
    path = write_tsv(out, ["ablated", "r_squared", "r_squared_drop", "intercept"] + names, rows)
    write_config_beside(config, out)
    print_table([(fit.ablated or "none", fit.r_squared) for fit in fits], ["Ablated", "R^2"])
    return path


def _load_manifest(config: RunConfig) -> Tuple[List[str], List[EmbeddingSpace], List[float]]:
    """
    The sweep manifest: a TSV with a `name` column, the target score column and
    one column per language code holding that language's embedding path.
    """
    path, target = _table_and_target(config)
    rows = read_tsv(path)
    if not rows:
        raise FeatureTableError(f"{path}: empty manifest")
    header = list(rows[0].keys())
    if MANIFEST_NAME not in header or target not in header:
        raise FeatureTableError(f"{path}: manifest needs '{MANIFEST_NAME}' and '{target}' columns")
    languages = [column for column in header if column not in (MANIFEST_NAME, target)]
    if len(languages) < 2:
        raise FeatureTableError(f"{path}: manifest needs a path column for each of at least two languages")

    names, spaces, scores = [], [], []
    for row in rows:
        try:
            scores.append(float(row[target]))
        except (TypeError, ValueError):
            raise FeatureTableError(f"{path}: non-numeric score {row[target]!r} for {row[MANIFEST_NAME]!r}") from None
        names.append(row[MANIFEST_NAME])
        spaces.append(merge_spaces([load_space(config, language, row[language]) for language in languages]))
    return names, spaces, scores


def cmd_sweep(config: RunConfig) -> Path:
    """
    Grid search over (k, t): per cell, the normalized modularity of every
    manifest embedding and its correlation with the manifest scores.
    """
    out = require_out(config)
    log_config(config)
    names, spaces, scores = _load_manifest(config)
    k_values = config.k_values or [config.k]
    t_values = config.trees_values or [config.trees]
    logger.info(f"Sweeping {len(k_values)} x {len(t_values)} cells over {len(spaces)} embeddings")

    cells = sweep(
        spaces,
        k_values,
        t_values,
        scores,
        seed=config.seed,
        limit=config.limit,
        leaf_capacity=config.leaf_capacity,
        threads=config.threads,
    )
    rows = (
        [cell.k, cell.trees, format_real(cell.pearson), format_real(cell.spearman)]
        + [format_real(value) for value in cell.modularity]
        for cell in cells
    )
    path = write_tsv(out, ["k", "trees", "pearson", "spearman"] + [f"q_norm:{name}" for name in names], rows)
    write_config_beside(config, out)
    print_table([(cell.k, cell.trees, cell.pearson, cell.spearman) for cell in cells], ["k", "t", "Pearson", "Spearman"])
    return path
