import logging
from pathlib import Path
from typing import List

from lexicalmodularity.alignment.csls import bli_p_at_1, build_csls_context, expand_lexicon
from lexicalmodularity.config.settings import RunConfig
from lexicalmodularity.embeddings.lexicon import filter_lexicon
from lexicalmodularity.operations.inputs import (
    load_initial_mapping,
    load_pair,
    load_pair_lexicon,
    log_config,
    print_table,
    require_out,
    write_config_beside,
)
from lexicalmodularity.utils.constants import DISASTER_SEED_WORDS, Retrieval
from lexicalmodularity.utils.errors import NoEvaluablePairsError
from lexicalmodularity.utils.formatting_helpers import format_real, truncate
from lexicalmodularity.utils.helpers import sibling_path, write_json, write_tsv

logger = logging.getLogger(__name__)


def _context(config: RunConfig):
    source, target = load_pair(config)
    mapping = load_initial_mapping(config, source.dim)
    return build_csls_context(
        source, target, mapping, kappa=config.kappa, trees=config.trees, seed=config.seed, threads=config.threads
    )


def cmd_bli(config: RunConfig) -> Path:
    """
    Precision@1 of bilingual lexicon induction on the --lexicon test pairs,
    minus any pair listed in --exclude. Writes the per-word TSV, the summary
    JSON and the config.
    """
    out = require_out(config)
    log_config(config)
    test = load_pair_lexicon(config, config.lexicon)
    if config.exclude:
        excluded = load_pair_lexicon(config, config.exclude, "--exclude")
        test = filter_lexicon(test, excluded)
        logger.info(f"{len(test)} test pair(s) left after excluding the seed lexicon")
        if not test.pairs:
            raise NoEvaluablePairsError("Every test pair is also in the excluded lexicon")

    ctx = _context(config)
    result = bli_p_at_1(ctx, test, Retrieval(config.retrieval))
    rows = (
        (row.source, "|".join(row.gold), row.predicted, int(row.correct), format_real(row.score))
        for row in result.rows
    )
    path = write_tsv(out, ("source", "gold", "predicted", "correct", f"{config.retrieval}_score"), rows)
    write_json(sibling_path(out, ".summary.json"), result.to_record())
    write_config_beside(config, out)

    print_table([(result.p_at_1, result.evaluated, result.skipped_oov)], ["P@1", "Evaluated", "Skipped (OOV)"])
    return path


def _read_seeds(path: str) -> List[str]:
    with open(path, "r", encoding="utf-8") as file:
        return [line.strip() for line in file if line.strip()]


def cmd_expand(config: RunConfig) -> Path:
    """
    The `--neighbors` nearest target words of every seed word, one row per
    (seed, rank). Seeds come from --seeds (one word per line) or default to the
    disaster-domain list.
    """
    out = require_out(config)
    log_config(config)
    seeds = _read_seeds(config.seeds) if config.seeds else list(DISASTER_SEED_WORDS)
    if config.lowercase:
        seeds = [seed.lower() for seed in seeds]
    ctx = _context(config)
    expansions = expand_lexicon(ctx, seeds, config.neighbors, Retrieval(config.retrieval))

    rows = [
        (seed, rank, word, format_real(score))
        for seed, neighbours in expansions
        for rank, (word, score) in enumerate(neighbours, start=1)
    ]
    path = write_tsv(out, ("seed", "rank", "target", "score"), rows)
    write_config_beside(config, out)

    print_table(
        [(seed, truncate(", ".join(word for word, _ in neighbours), 60)) for seed, neighbours in expansions],
        ["Seed", "Nearest targets"],
    )
    return path
