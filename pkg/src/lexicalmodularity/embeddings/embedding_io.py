"""Reading, writing, preprocessing and merging monolingual embedding files.

A node is identified by the pair (language, word), so identical surface strings
from different languages stay distinct after `merge_spaces`.
"""

from __future__ import annotations

import logging
from contextlib import closing
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from lexicalmodularity.utils.constants import DEFAULT_PREPROCESS, PreprocessStep
from lexicalmodularity.utils.errors import (
    DimensionMismatchError,
    DuplicateLanguageError,
    EmbeddingFormatError,
    EmptyInputError,
    InvalidParameterError,
    OutOfVocabularyError,
    ZeroNormError,
)
from lexicalmodularity.utils.helpers import iter_utf8_lines, write_text_atomic

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """
    Words, their language codes, 64-bit vectors and per-language frequency ranks.

    Instances are immutable: the vector and rank arrays are marked read-only.
    """

    words: Tuple[str, ...]
    languages: Tuple[str, ...]
    vectors: np.ndarray
    ranks: np.ndarray

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64)
        ranks = np.array(self.ranks, dtype=np.int64)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise DimensionMismatchError(f"Vectors must form an (n, d) array with d >= 1, got shape {vectors.shape}")
        n = vectors.shape[0]
        if not (len(self.words) == len(self.languages) == ranks.shape[0] == n):
            raise DimensionMismatchError(
                f"Inconsistent space: {len(self.words)} words, {len(self.languages)} labels, "
                f"{ranks.shape[0]} ranks, {n} vectors"
            )
        vectors.setflags(write=False)
        ranks.setflags(write=False)
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "languages", tuple(self.languages))
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "ranks", ranks)
        if len(self.node_index) != n:
            raise InvalidParameterError("Duplicate (language, word) pair in embedding space")

    def __len__(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def node_index(self) -> Dict[Tuple[str, str], int]:
        return {(language, word): i for i, (language, word) in enumerate(zip(self.languages, self.words))}

    @cached_property
    def language_codes(self) -> Tuple[str, ...]:
        """Language codes in order of first appearance."""
        return tuple(dict.fromkeys(self.languages))

    def index_of(self, language: str, word: str) -> int:
        try:
            return self.node_index[(language, word)]
        except KeyError:
            raise OutOfVocabularyError(word, language) from None

    def get(self, language: str, word: str) -> Optional[int]:
        return self.node_index.get((language, word))

    def select(self, indices: Sequence[int]) -> "EmbeddingSpace":
        """Sub-space over the given node ids, in the given order."""
        indices = np.asarray(indices, dtype=np.int64)
        return EmbeddingSpace(
            words=tuple(self.words[i] for i in indices),
            languages=tuple(self.languages[i] for i in indices),
            vectors=self.vectors[indices],
            ranks=self.ranks[indices],
        )

    def restrict_language(self, language: str) -> "EmbeddingSpace":
        indices = [i for i, code in enumerate(self.languages) if code == language]
        if not indices:
            raise InvalidParameterError(f"Language {language!r} not present (have {', '.join(self.language_codes)})")
        return self.select(indices)

    def top_frequent(self, per_language_limit: int) -> "EmbeddingSpace":
        """Keep the `per_language_limit` lowest-rank words of every language."""
        if per_language_limit < 1:
            raise InvalidParameterError(f"per_language_limit must be >= 1, got {per_language_limit}")
        indices = np.flatnonzero(self.ranks < per_language_limit)
        if len(indices) == len(self):
            return self
        return self.select(indices)

    def with_vectors(self, vectors: np.ndarray) -> "EmbeddingSpace":
        return EmbeddingSpace(words=self.words, languages=self.languages, vectors=vectors, ranks=self.ranks)


def load_embeddings(
    path: Union[str, Path],
    language: str,
    max_vocab: Optional[int] = None,
    lowercase: bool = False,
) -> EmbeddingSpace:
    """
    Parse a word2vec/fastText text file: a "vocab_count dim" header followed by
    one `word v1 ... v_dim` line per word.

    Duplicate words keep their first occurrence and are tallied in a warning.
    Ranks number the kept words in file order. With `max_vocab`, only the first
    `max_vocab` data lines are read.

    Raises:
        EmbeddingFormatError: Malformed header, wrong arity, unparsable or
            non-finite values, invalid UTF-8, or a line count that disagrees
            with the header.
        EmptyInputError: The file declares or contains no words.
    """
    path = Path(path)
    words: List[str] = []
    rows: List[np.ndarray] = []
    seen = set()
    duplicates = 0
    with closing(iter_utf8_lines(path, EmbeddingFormatError)) as lines:
        header = next(lines, (1, ""))[1].split()
        if len(header) != 2:
            raise EmbeddingFormatError(path, 1, f"expected header 'vocab_count dim', got {' '.join(header)!r}")
        try:
            vocab_count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingFormatError(path, 1, f"header values must be integers, got {' '.join(header)!r}") from None
        if vocab_count < 0 or dim < 1:
            raise EmbeddingFormatError(path, 1, f"invalid header counts {vocab_count} {dim}")
        if vocab_count == 0:
            raise EmptyInputError(f"{path}: empty vocabulary")

        data_lines = 0
        for line_number, line in lines:
            if max_vocab is not None and data_lines >= max_vocab:
                break
            parts = line.rstrip("\r\n").split()
            if not parts:
                continue
            data_lines += 1
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    path, line_number, f"expected a word and {dim} values, found {len(parts) - 1} values"
                )
            try:
                vector = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError(path, line_number, "unparsable vector value") from None
            if not np.all(np.isfinite(vector)):
                raise EmbeddingFormatError(path, line_number, "non-finite vector value")
            word = parts[0].lower() if lowercase else parts[0]
            if word in seen:
                duplicates += 1
                logger.debug(f"{path}:{line_number}: duplicate word {word!r} ignored")
                continue
            seen.add(word)
            words.append(word)
            rows.append(vector)

    expected = vocab_count if max_vocab is None else min(vocab_count, max_vocab)
    if data_lines != expected:
        raise EmbeddingFormatError(path, 1, f"header declares {vocab_count} words but {data_lines} were read")
    if not words:
        raise EmptyInputError(f"{path}: empty vocabulary")
    if duplicates:
        logger.warning(f"{path}: {duplicates} duplicate word(s) ignored (first occurrence kept)")

    logger.info(f"Loaded {len(words)} {language} vectors of dimension {dim} from {path}")
    return EmbeddingSpace(
        words=tuple(words),
        languages=(language,) * len(words),
        vectors=np.vstack(rows),
        ranks=np.arange(len(words)),
    )


def save_embeddings(space: EmbeddingSpace, path: Union[str, Path], language: Optional[str] = None) -> Path:
    """
    Write one language of `space` in the text format read by `load_embeddings`,
    ordered by rank, values fixed-point with 6 decimals.
    """
    if language is None:
        if len(space.language_codes) != 1:
            raise InvalidParameterError("Space holds several languages; pass the one to save")
        language = space.language_codes[0]
    sub = space.restrict_language(language)
    order = np.argsort(sub.ranks, kind="stable")
    lines = [f"{len(sub)} {sub.dim}"]
    for i in order:
        values = " ".join(f"{value:.6f}" for value in sub.vectors[i])
        lines.append(f"{sub.words[i]} {values}")
    return write_text_atomic(path, "\n".join(lines) + "\n")


def preprocess(space: EmbeddingSpace, steps: Iterable[PreprocessStep] = DEFAULT_PREPROCESS) -> EmbeddingSpace:
    """
    Apply normalization steps in order. `unit` divides every vector by its
    Euclidean norm; `center` subtracts the per-dimension mean of the space.

    Raises:
        ZeroNormError: A vector has zero norm at a `unit` step.
        EmptyInputError: The space is empty.
    """
    if len(space) == 0:
        raise EmptyInputError("Cannot preprocess an empty space")
    vectors = np.array(space.vectors, dtype=np.float64)
    for step in steps:
        step = PreprocessStep(step)
        if step is PreprocessStep.UNIT:
            norms = np.linalg.norm(vectors, axis=1)
            zero = np.flatnonzero(norms == 0)
            if len(zero):
                i = int(zero[0])
                raise ZeroNormError(space.languages[i], space.words[i])
            vectors = vectors / norms[:, np.newaxis]
        elif step is PreprocessStep.CENTER:
            vectors = vectors - vectors.mean(axis=0)
    return space.with_vectors(vectors)


def merge_spaces(spaces: Sequence[EmbeddingSpace]) -> EmbeddingSpace:
    """
    Disjoint union of spaces with pairwise distinct languages. Spaces are
    concatenated in order of their language codes, so the node numbering (and
    everything computed from it) does not depend on the order of `spaces`.

    Raises:
        DimensionMismatchError: The spaces differ in dimension.
        DuplicateLanguageError: A language code occurs in more than one space.
    """
    if not spaces:
        raise EmptyInputError("No embedding spaces to merge")
    dims = {space.dim for space in spaces}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Cannot merge spaces of dimensions {sorted(dims)}")
    owner: Dict[str, int] = {}
    for position, space in enumerate(spaces):
        for code in space.language_codes:
            if code in owner:
                raise DuplicateLanguageError(f"Language {code!r} appears in more than one space")
            owner[code] = position
    ordered = sorted(spaces, key=lambda space: min(space.language_codes))
    return EmbeddingSpace(
        words=tuple(word for space in ordered for word in space.words),
        languages=tuple(code for space in ordered for code in space.languages),
        vectors=np.vstack([space.vectors for space in ordered]),
        ranks=np.concatenate([space.ranks for space in ordered]),
    )


def norms_within(space: EmbeddingSpace, tolerance: float) -> bool:
    """True if every vector has Euclidean norm within `tolerance` of 1."""
    norms = np.linalg.norm(space.vectors, axis=1)
    return bool(np.all(np.abs(norms - 1.0) <= tolerance))


def unit_rows(vectors: np.ndarray) -> np.ndarray:
    """Row-normalized copy; zero rows stay zero."""
    norms = np.linalg.norm(vectors, axis=1)
    norms = np.where(norms == 0, 1.0, norms)
    return vectors / norms[:, np.newaxis]

