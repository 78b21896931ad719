# constants.py
from enum import Enum


class ExitCode(Enum):
    SUCCESS = 0
    UNEXPECTED = 1
    INPUT_ERROR = 2
    UNDEFINED_METRIC = 3
    INTERRUPTED = 130


class PreprocessStep(Enum):
    UNIT = "unit"
    CENTER = "center"


class KnnBackend(Enum):
    EXACT = "exact"
    FOREST = "forest"


class Symmetrization(Enum):
    UNION = "union"
    MUTUAL = "mutual"


class ValidationMetric(Enum):
    CSLS_10K = "csls10k"
    MOD_10K = "mod10k"


class Retrieval(Enum):
    CSLS = "csls"
    NN = "nn"


class MappingMethod(Enum):
    MSE = "mse"
    PROCRUSTES = "procrustes"


class Message(Enum):
    INPUT_ERROR = "Input error: {}"
    UNDEFINED_METRIC = "Metric undefined: {}"
    UNEXPECTED = "An unexpected error occurred: {}"
    INTERRUPTED = "Process interrupted by user. Exiting..."
    WROTE = "Wrote {}"


DEFAULT_K = 3
DEFAULT_TREES = 450
DEFAULT_LEAF_CAPACITY = 32
DEFAULT_KAPPA = 10
DEFAULT_LIMIT = 10000
DEFAULT_SEED = 0
DEFAULT_EPOCHS = 5
DEFAULT_DICTIONARY_SIZE = 10000
DEFAULT_PREPROCESS = (PreprocessStep.UNIT, PreprocessStep.CENTER, PreprocessStep.UNIT)

# Vocabularies up to this size get exact r caches; larger ones use the forest.
EXACT_CSLS_MAX_VOCAB = 20000

UNIT_NORM_TOLERANCE = 1e-6
ORTHOGONALITY_TOLERANCE = 1e-8

# Disaster-domain English seed words for lexicon expansion.
DISASTER_SEED_WORDS = (
    "criminality",
    "terrorism",
    "war",
    "fire",
    "avalanche",
    "earthquake",
    "lahar",
    "landslide",
    "sinkholes",
    "blizzard",
    "drought",
    "hailstorm",
    "tornado",
    "flood",
    "wildfire",
    "disease",
)
