import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from dotenv import find_dotenv, load_dotenv

from lexicalmodularity.utils.constants import (
    DEFAULT_DICTIONARY_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_K,
    DEFAULT_KAPPA,
    DEFAULT_LEAF_CAPACITY,
    DEFAULT_LIMIT,
    DEFAULT_PREPROCESS,
    DEFAULT_SEED,
    DEFAULT_TREES,
    KnnBackend,
    PreprocessStep,
    Retrieval,
    Symmetrization,
)
from lexicalmodularity.utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)


def load_environment() -> None:
    """Load optional defaults (LEXMOD_THREADS, LEXMOD_LOG_LEVEL, LEXMOD_LOG_DIR) from a .env file."""
    if load_dotenv(find_dotenv(usecwd=True)):
        logger.debug("Loaded environment from .env")


def default_threads() -> int:
    """Thread count from LEXMOD_THREADS, else the machine's CPU count."""
    value = os.environ.get("LEXMOD_THREADS", "").strip()
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise InvalidParameterError(f"LEXMOD_THREADS must be an integer, got {value!r}")
        if threads < 1:
            raise InvalidParameterError(f"LEXMOD_THREADS must be >= 1, got {threads}")
        return threads
    return os.cpu_count() or 1


def parse_language_path(value: str) -> Tuple[str, str]:
    """Split a `lang=path` command-line value."""
    language, sep, path = value.partition("=")
    language, path = language.strip(), path.strip()
    if not sep or not language or not path:
        raise InvalidParameterError(f"Expected LANG=PATH, got {value!r}")
    return language, path


def parse_preprocess(value: str) -> Tuple[PreprocessStep, ...]:
    """Parse a comma-separated preprocessing chain such as `unit,center,unit`; `none` is empty."""
    value = value.strip()
    if value in ("", "none"):
        return ()
    steps = []
    for token in value.split(","):
        try:
            steps.append(PreprocessStep(token.strip()))
        except ValueError:
            valid = ", ".join(step.value for step in PreprocessStep)
            raise InvalidParameterError(f"Unknown preprocessing step {token!r} (valid: {valid})")
    return tuple(steps)


@dataclass
class RunConfig:
    """Fully resolved settings of one command-line run."""

    subcommand: str
    embeddings: List[Tuple[str, str]] = field(default_factory=list)
    source: Optional[Tuple[str, str]] = None
    target: Optional[Tuple[str, str]] = None
    lexicon: Optional[str] = None
    exclude: Optional[str] = None
    mapping: Optional[str] = None
    mappings: List[str] = field(default_factory=list)
    table: Optional[str] = None
    target_column: Optional[str] = None
    seeds: Optional[str] = None
    metric: Optional[str] = None
    method: Optional[str] = None
    retrieval: str = Retrieval.CSLS.value
    k: int = DEFAULT_K
    k_values: List[int] = field(default_factory=list)
    trees: int = DEFAULT_TREES
    trees_values: List[int] = field(default_factory=list)
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY
    knn: str = KnnBackend.FOREST.value
    symmetrize: str = Symmetrization.UNION.value
    kappa: int = DEFAULT_KAPPA
    limit: Optional[int] = DEFAULT_LIMIT
    epochs: int = DEFAULT_EPOCHS
    dictionary_size: int = DEFAULT_DICTIONARY_SIZE
    mutual: bool = True
    neighbors: int = 10
    seed: int = DEFAULT_SEED
    threads: int = 1
    preprocess: Tuple[PreprocessStep, ...] = DEFAULT_PREPROCESS
    lowercase: bool = False
    max_vocab: Optional[int] = None
    out: Optional[str] = None
    edges: Optional[str] = None

    def validate(self) -> "RunConfig":
        """Check ranges that argparse cannot express."""
        positive = {
            "k": self.k,
            "trees": self.trees,
            "leaf_capacity": self.leaf_capacity,
            "kappa": self.kappa,
            "epochs": self.epochs,
            "dictionary_size": self.dictionary_size,
            "neighbors": self.neighbors,
            "threads": self.threads,
        }
        for name, value in positive.items():
            if value < 1:
                raise InvalidParameterError(f"--{name.replace('_', '-')} must be >= 1, got {value}")
        if self.limit is not None and self.limit < 1:
            raise InvalidParameterError(f"--limit must be >= 1, got {self.limit}")
        if any(value < 1 for value in self.k_values + self.trees_values):
            raise InvalidParameterError("Grid values must be >= 1")
        return self

    @property
    def use_forest(self) -> bool:
        return self.knn == KnnBackend.FOREST.value

    def to_record(self) -> Dict[str, Any]:
        """
        The config as embedded in output files. The thread count is left out
        because it must not change output bytes.
        """
        record = asdict(self)
        record.pop("threads")
        record["preprocess"] = [step.value for step in self.preprocess]
        record["embeddings"] = [f"{language}={path}" for language, path in self.embeddings]
        for key in ("source", "target"):
            if record[key] is not None:
                record[key] = "=".join(record[key])
        return record
