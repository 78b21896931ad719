import logging
from pathlib import Path

from lexicalmodularity.alignment.mapping import (
    ValidationSettings,
    fit_mse,
    fit_procrustes,
    parse_metric,
    refine,
    save_trace,
    select_mapping,
)
from lexicalmodularity.alignment.matrix import load_mapping, orthogonality_error, save_mapping
from lexicalmodularity.config.settings import RunConfig
from lexicalmodularity.operations.inputs import (
    load_initial_mapping,
    load_pair,
    load_pair_lexicon,
    log_config,
    print_table,
    require_out,
    write_config_beside,
)
from lexicalmodularity.utils.constants import MappingMethod
from lexicalmodularity.utils.errors import DictionaryCollapseError, InvalidParameterError
from lexicalmodularity.utils.formatting_helpers import format_real
from lexicalmodularity.utils.helpers import sibling_path, write_tsv

logger = logging.getLogger(__name__)


def _settings(config: RunConfig) -> ValidationSettings:
    return ValidationSettings(
        limit=config.limit,
        kappa=config.kappa,
        k=config.k,
        trees=config.trees if config.use_forest else None,
        seed=config.seed,
        threads=config.threads,
    )


def _metric(config: RunConfig):
    if config.metric is None:
        raise InvalidParameterError(f"'{config.subcommand}' needs --metric")
    return parse_metric(config.metric)


def cmd_fit(config: RunConfig) -> Path:
    """Fit a supervised mapping on the --lexicon seed pairs and write it as a mapping file."""
    out = require_out(config)
    log_config(config)
    try:
        method = MappingMethod(config.method)
    except ValueError:
        valid = ", ".join(m.value for m in MappingMethod)
        raise InvalidParameterError(f"Unknown mapping method {config.method!r} (valid: {valid})") from None
    source, target = load_pair(config)
    lexicon = load_pair_lexicon(config, config.lexicon)
    fit = fit_procrustes if method is MappingMethod.PROCRUSTES else fit_mse
    mapping = fit(source, target, lexicon)
    path = save_mapping(mapping, out)
    write_config_beside(config, out)
    print_table([(method.value, mapping.dim, orthogonality_error(mapping.w))], ["Method", "Dimension", "max |W^T W - I|"])
    return path


def cmd_refine(config: RunConfig) -> Path:
    """
    Procrustes refinement from --mapping (or a Procrustes fit on --lexicon, or
    the identity), keeping the best mapping by --metric. The trace is written
    as `<out>.trace.tsv`, also when an epoch collapses.
    """
    out = require_out(config)
    log_config(config)
    metric = _metric(config)
    source, target = load_pair(config)
    if config.mapping is None and config.lexicon is not None:
        logger.info("Initial mapping: Procrustes on the seed lexicon")
        w0 = fit_procrustes(source, target, load_pair_lexicon(config, config.lexicon))
    else:
        w0 = load_initial_mapping(config, source.dim)

    trace_path = sibling_path(out, ".trace.tsv")
    try:
        best, trace = refine(
            source,
            target,
            w0,
            config.epochs,
            metric,
            settings=_settings(config),
            dictionary_size=config.dictionary_size,
            mutual=config.mutual,
        )
    except DictionaryCollapseError as e:
        if e.trace is not None:
            save_trace(e.trace, trace_path)
            logger.info(f"Partial trace written to {trace_path}")
        raise

    save_trace(trace, trace_path)
    path = save_mapping(best, out)
    write_config_beside(config, out)
    print_table(
        [(entry.epoch, entry.score, entry.dictionary_size) for entry in trace.epochs],
        ["Epoch", metric.value, "Dictionary size"],
    )
    logger.info(f"Best epoch: {trace.best_epoch}")
    return path


def cmd_select(config: RunConfig) -> Path:
    """Score every --candidate mapping file by --metric and report the winner."""
    out = require_out(config)
    log_config(config)
    if not config.mappings:
        raise InvalidParameterError("'select' needs at least one --candidate mapping file")
    metric = _metric(config)
    source, target = load_pair(config)
    candidates = [load_mapping(path) for path in config.mappings]
    best, scores = select_mapping(candidates, source, target, metric, _settings(config))

    rows = [
        (index, candidate_path, format_real(score), int(index == best))
        for index, (candidate_path, score) in enumerate(zip(config.mappings, scores))
    ]
    path = write_tsv(out, ("index", "mapping", "score", "selected"), rows)
    write_config_beside(config, out)
    print_table([(row[0], row[1], scores[row[0]], "*" if row[3] else "") for row in rows], ["#", "Mapping", metric.value, "Selected"])
    return path
