from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, preprocess
from lexicalmodularity.utils.constants import ORTHOGONALITY_TOLERANCE, PreprocessStep
from lexicalmodularity.utils.errors import DimensionMismatchError, InvalidParameterError
from lexicalmodularity.utils.formatting_helpers import format_full
from lexicalmodularity.utils.helpers import write_text_atomic

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MappingMatrix:
    """
    A d x d linear map applied to row vectors (x -> x @ w). The `orthogonal`
    flag is a checked claim: max |w^T w - I| must not exceed 1e-8.
    """

    w: np.ndarray
    orthogonal: bool = False

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"A mapping must be a square matrix, got shape {w.shape}")
        if self.orthogonal and orthogonality_error(w) > ORTHOGONALITY_TOLERANCE:
            raise InvalidParameterError(
                f"Matrix flagged orthogonal deviates from orthogonality by {orthogonality_error(w):.3g}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "MappingMatrix":
        return cls(np.eye(dim), orthogonal=True)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.shape[-1] != self.dim:
            raise DimensionMismatchError(f"Vectors of dimension {vectors.shape[-1]} cannot be mapped by a {self.dim}x{self.dim} matrix")
        return vectors @ self.w


def orthogonality_error(w: np.ndarray) -> float:
    """max |w^T w - I|."""
    return float(np.max(np.abs(w.T @ w - np.eye(w.shape[0]))))


def map_space(space: EmbeddingSpace, mapping: MappingMatrix, normalize: bool = True) -> EmbeddingSpace:
    """Apply `mapping` to every vector of `space`, unit-normalizing the result when `normalize`."""
    mapped = space.with_vectors(mapping.apply(space.vectors))
    if normalize:
        mapped = preprocess(mapped, [PreprocessStep.UNIT])
    return mapped


def save_mapping(mapping: MappingMatrix, path: Union[str, Path]) -> Path:
    """Header "d d", then one row per line with 17 significant digits."""
    lines = [f"{mapping.dim} {mapping.dim}"]
    lines.extend(" ".join(format_full(value) for value in row) for row in mapping.w)
    return write_text_atomic(path, "\n".join(lines) + "\n")


def load_mapping(path: Union[str, Path]) -> MappingMatrix:
    """
    Read a mapping file written by `save_mapping`. The orthogonal flag is set
    when the matrix passes the orthogonality check.
    """
    with open(path, "r", encoding="utf-8") as file:
        header = file.readline().split()
        if len(header) != 2 or header[0] != header[1] or not header[0].isdigit():
            raise InvalidParameterError(f"{path}: expected header 'd d', got {' '.join(header)!r}")
        dim = int(header[0])
        rows = [line.split() for line in file if line.strip()]
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise InvalidParameterError(f"{path}: expected {dim} rows of {dim} values")
    try:
        w = np.array(rows, dtype=np.float64)
    except ValueError:
        raise InvalidParameterError(f"{path}: unparsable matrix value") from None
    if not np.all(np.isfinite(w)):
        raise InvalidParameterError(f"{path}: non-finite matrix value")
    orthogonal = orthogonality_error(w) <= ORTHOGONALITY_TOLERANCE
    logger.info(f"Loaded {dim}x{dim} mapping from {path} (orthogonal={orthogonal})")
    return MappingMatrix(w, orthogonal=orthogonal)
