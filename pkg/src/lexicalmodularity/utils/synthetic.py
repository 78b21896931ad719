"""Constructed embedding spaces whose lexical graphs have known structure.

Used by the test-suite and handy for sanity checks of a local install. All
generators are seeded and return unit-normalized spaces.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from lexicalmodularity.alignment.matrix import MappingMatrix
from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, merge_spaces, unit_rows
from lexicalmodularity.embeddings.lexicon import Lexicon


def make_space(vectors: np.ndarray, language: str, words: Optional[Sequence[str]] = None) -> EmbeddingSpace:
    """Monolingual space over `vectors`, ranked in row order, with words w0, w1, ..."""
    vectors = np.asarray(vectors, dtype=np.float64)
    words = list(words) if words is not None else [f"w{i}" for i in range(vectors.shape[0])]
    return EmbeddingSpace(
        words=tuple(words),
        languages=(language,) * len(words),
        vectors=vectors,
        ranks=np.arange(len(words)),
    )


def identity_lexicon(space: EmbeddingSpace, source_language: str, target_language: str) -> Lexicon:
    return Lexicon(tuple((word, word) for word in space.words), source_language, target_language)


def twin_spaces(
    n: int = 50,
    dim: int = 20,
    seed: int = 0,
    languages: Tuple[str, str] = ("en", "de"),
) -> Tuple[EmbeddingSpace, EmbeddingSpace]:
    """Two languages with identical random unit vectors for identically named words."""
    rng = np.random.default_rng(seed)
    vectors = unit_rows(rng.standard_normal((n, dim)))
    return make_space(vectors, languages[0]), make_space(vectors.copy(), languages[1])


def orthogonal_language_spaces(
    n: int = 20,
    dim: int = 16,
    seed: int = 0,
    languages: Tuple[str, str] = ("en", "ja"),
) -> EmbeddingSpace:
    """
    Two languages in disjoint coordinate blocks with non-negative coordinates:
    every cross-lingual cosine is exactly 0, every intra-lingual one positive,
    so all kNN edges stay within a language.
    """
    rng = np.random.default_rng(seed)
    half = dim // 2
    first = np.zeros((n, dim))
    second = np.zeros((n, dim))
    first[:, :half] = np.abs(rng.standard_normal((n, half))) + 0.1
    second[:, half:] = np.abs(rng.standard_normal((n, dim - half))) + 0.1
    return merge_spaces([make_space(unit_rows(first), languages[0]), make_space(unit_rows(second), languages[1])])


def separated_pair(
    n: int,
    angle: float,
    languages: Tuple[str, str] = ("en", "ja"),
) -> EmbeddingSpace:
    """
    Word i of either language is cos(angle) e_i + sin(angle) u_lang, where the
    e_i and both u_lang are distinct coordinate axes. Translations have cosine
    cos^2(angle), same-language words sin^2(angle), other cross-lingual pairs 0.
    For 0 < angle < pi/4 and k = 3 the graph structure is fixed (ties between
    same-language words are exact and go to the lower id) and the normalized
    modularity grows strictly with the angle.
    """
    if not 0 < angle < np.pi / 4:
        raise ValueError(f"angle must lie in (0, pi/4), got {angle}")
    dim = n + 2
    spaces = []
    for offset, language in enumerate(languages):
        vectors = np.zeros((n, dim))
        vectors[np.arange(n), np.arange(n)] = np.cos(angle)
        vectors[:, n + offset] = np.sin(angle)
        spaces.append(make_space(vectors, language))
    return merge_spaces(spaces)


def separation_family(
    count: int = 8,
    n: int = 12,
    languages: Tuple[str, str] = ("en", "ja"),
) -> Tuple[List[EmbeddingSpace], List[float]]:
    """
    `count` bilingual spaces of increasing language separation, each paired
    with a downstream score that decreases with separation.
    """
    angles = np.linspace(np.pi / 36, np.pi * 2 / 9, count)
    spaces = [separated_pair(n, float(angle), languages) for angle in angles]
    scores = [1.0 - index / count for index in range(count)]
    return spaces, scores


def mixing_and_clustering(
    n: int = 60,
    dim: int = 16,
    seed: int = 0,
    languages: Tuple[str, str] = ("en", "de"),
) -> Tuple[EmbeddingSpace, EmbeddingSpace, MappingMatrix, MappingMatrix]:
    """
    A twin pair living in the first half of the coordinates plus two orthogonal
    candidate mappings: the identity, which lays every word onto its
    translation, and a block swap, which moves the source into the second half
    where it shares no direction with the target.
    """
    rng = np.random.default_rng(seed)
    half = dim // 2
    vectors = np.zeros((n, dim))
    vectors[:, :half] = np.abs(rng.standard_normal((n, half))) + 0.1
    vectors = unit_rows(vectors)
    source, target = make_space(vectors, languages[0]), make_space(vectors.copy(), languages[1])
    swap = np.zeros((dim, dim))
    swap[np.arange(half), np.arange(half) + half] = 1.0
    swap[np.arange(half) + half, np.arange(half)] = 1.0
    return source, target, MappingMatrix.identity(dim), MappingMatrix(swap, orthogonal=True)


def random_rotation(dim: int, seed: int = 0) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))
