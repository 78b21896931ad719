"""Exception hierarchy shared by the library and the command line.

Input problems (bad files, bad parameters, unknown words) derive from
`InputError`; results that exist but are mathematically undefined derive from
`UndefinedMetricError`. The CLI maps the two families to distinct exit codes.
"""


class LexicalModularityError(Exception):
    """Base class for every error raised by this package."""


class InputError(LexicalModularityError, ValueError):
    """The caller supplied something unusable."""


class EmbeddingFormatError(InputError):
    def __init__(self, path, line_number, reason):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{self.path}:{line_number}: {reason}")


class LexiconFormatError(InputError):
    def __init__(self, path, line_number, reason):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{self.path}:{line_number}: {reason}")


class DimensionMismatchError(InputError):
    pass


class DuplicateLanguageError(InputError):
    pass


class ZeroNormError(InputError):
    def __init__(self, language, word):
        self.language = language
        self.word = word
        super().__init__(f"Zero-norm vector for ({language}, {word!r}) cannot be unit-normalized")


class NotNormalizedError(InputError):
    pass


class OutOfVocabularyError(InputError):
    def __init__(self, word, language):
        self.word = word
        self.language = language
        super().__init__(f"Word {word!r} is not in the {language} vocabulary")


class InvalidParameterError(InputError):
    pass


class EmptyInputError(InputError):
    pass


class FeatureTableError(InputError):
    pass


class UndefinedMetricError(LexicalModularityError):
    """The requested quantity is undefined for the given input."""


class EmptyGraphError(UndefinedMetricError):
    pass


class SingleLanguageError(UndefinedMetricError):
    pass


class NoEvaluablePairsError(UndefinedMetricError):
    pass


class ConstantInputError(UndefinedMetricError):
    pass


class DegenerateMappingError(UndefinedMetricError):
    pass


class DictionaryCollapseError(UndefinedMetricError):
    def __init__(self, message, trace=None):
        self.trace = trace
        super().__init__(message)


class SweepCellError(LexicalModularityError):
    """Wraps the error of one grid cell; exit codes follow `cause`."""

    def __init__(self, k, trees, cause):
        self.k = k
        self.trees = trees
        self.cause = cause
        super().__init__(f"Sweep cell (k={k}, t={trees}) failed: {cause}")
