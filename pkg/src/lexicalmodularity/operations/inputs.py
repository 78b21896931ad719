import logging
from typing import List, Optional, Tuple

from tabulate import tabulate

from lexicalmodularity.alignment.matrix import MappingMatrix, load_mapping
from lexicalmodularity.config.settings import RunConfig
from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, load_embeddings, preprocess
from lexicalmodularity.embeddings.lexicon import Lexicon, load_lexicon
from lexicalmodularity.utils.errors import InvalidParameterError
from lexicalmodularity.utils.helpers import sibling_path, write_json

logger = logging.getLogger(__name__)


def load_space(config: RunConfig, language: str, path: str) -> EmbeddingSpace:
    """Load one embedding file and run the configured preprocessing chain on it."""
    space = load_embeddings(path, language, max_vocab=config.max_vocab, lowercase=config.lowercase)
    return preprocess(space, config.preprocess)


def load_pair(config: RunConfig) -> Tuple[EmbeddingSpace, EmbeddingSpace]:
    """The --src and --tgt spaces."""
    if config.source is None or config.target is None:
        raise InvalidParameterError(f"'{config.subcommand}' needs both --src LANG=PATH and --tgt LANG=PATH")
    return load_space(config, *config.source), load_space(config, *config.target)


def load_initial_mapping(config: RunConfig, dim: int) -> MappingMatrix:
    """The --mapping file, or the identity when none was given."""
    if config.mapping is None:
        logger.info("No --mapping given; using the identity")
        return MappingMatrix.identity(dim)
    return load_mapping(config.mapping)


def load_pair_lexicon(config: RunConfig, path: Optional[str], flag: str = "--lexicon") -> Lexicon:
    if path is None:
        raise InvalidParameterError(f"'{config.subcommand}' needs {flag}")
    return load_lexicon(path, config.source[0], config.target[0], lowercase=config.lowercase)


def require_out(config: RunConfig) -> str:
    if not config.out:
        raise InvalidParameterError(f"'{config.subcommand}' needs --out")
    return config.out


def write_config_beside(config: RunConfig, out: str) -> None:
    """Record the resolved run configuration as `<out>.config.json`."""
    write_json(sibling_path(out, ".config.json"), config.to_record())


def log_config(config: RunConfig) -> None:
    logger.info(f"Running '{config.subcommand}' with config: {config.to_record()}")
    logger.debug(f"Worker threads: {config.threads}")


def print_table(rows: List[Tuple], headers: List[str]) -> None:
    """Console summary; artifacts are written to files, never to stdout."""
    print(tabulate(rows, headers=headers, tablefmt="grid", floatfmt=".6f"))
