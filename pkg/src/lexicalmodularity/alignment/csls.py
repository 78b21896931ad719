"""Cross-domain similarity local scaling (CSLS) and the retrieval tasks built on it.

    CSLS(Ws, t) = 2 cos(Ws, t) - r(Ws) - r(t)

r(x) is the mean cosine of the kappa nearest cross-lingual neighbours of x:
mapped source words look among target words and target words among mapped
source words.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from lexicalmodularity.alignment.matrix import MappingMatrix
from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, unit_rows
from lexicalmodularity.embeddings.lexicon import Lexicon
from lexicalmodularity.graph.ann_index import build_forest, top_k
from lexicalmodularity.utils.constants import (
    DEFAULT_KAPPA,
    DEFAULT_LEAF_CAPACITY,
    DEFAULT_LIMIT,
    DEFAULT_SEED,
    DEFAULT_TREES,
    EXACT_CSLS_MAX_VOCAB,
    Retrieval,
)
from lexicalmodularity.utils.errors import (
    EmptyInputError,
    InvalidParameterError,
    NoEvaluablePairsError,
    OutOfVocabularyError,
)

logger = logging.getLogger(__name__)

SCORE_CHUNK = 512


@dataclass(frozen=True, eq=False)
class CslsContext:
    """Two monolingual spaces, the mapping between them and the r caches."""

    source: EmbeddingSpace
    target: EmbeddingSpace
    mapping: MappingMatrix
    source_unit: np.ndarray
    target_unit: np.ndarray
    r_source: np.ndarray
    r_target: np.ndarray
    kappa: int

    @property
    def source_language(self) -> str:
        return self.source.language_codes[0]

    @property
    def target_language(self) -> str:
        return self.target.language_codes[0]

    def source_id(self, word: str) -> int:
        return self.source.index_of(self.source_language, word)

    def target_id(self, word: str) -> int:
        return self.target.index_of(self.target_language, word)

    def cosine_rows(self, source_ids: np.ndarray) -> np.ndarray:
        return self.source_unit[source_ids] @ self.target_unit.T

    def score_rows(self, source_ids: np.ndarray, retrieval: Retrieval = Retrieval.CSLS) -> np.ndarray:
        """Scores of the given sources against every target word."""
        cosines = self.cosine_rows(source_ids)
        if Retrieval(retrieval) is Retrieval.NN:
            return cosines
        return 2.0 * cosines - self.r_source[source_ids, np.newaxis] - self.r_target[np.newaxis, :]


@dataclass(frozen=True)
class BliRow:
    source: str
    gold: Tuple[str, ...]
    predicted: str
    correct: bool
    score: float


@dataclass(frozen=True)
class BliResult:
    p_at_1: float
    evaluated: int
    skipped_oov: int
    rows: Tuple[BliRow, ...] = ()

    def to_record(self) -> Dict[str, float]:
        return {"p_at_1": self.p_at_1, "evaluated": self.evaluated, "skipped_oov": self.skipped_oov}


def _single_language(space: EmbeddingSpace, role: str) -> None:
    if len(space) == 0:
        raise EmptyInputError(f"The {role} space is empty")
    if len(space.language_codes) != 1:
        raise InvalidParameterError(f"The {role} space must hold exactly one language, found {space.language_codes}")


def mean_top_similarities(
    queries: np.ndarray,
    index: np.ndarray,
    kappa: int,
    use_forest: bool = False,
    trees: int = DEFAULT_TREES,
    seed: int = DEFAULT_SEED,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    threads: int = 1,
) -> np.ndarray:
    """
    Mean of the `kappa` largest cosines between each (unit) query row and the
    (unit) index rows. Uses every index row when there are fewer than `kappa`.
    """
    if use_forest:
        forest = build_forest(index, trees=trees, leaf_capacity=leaf_capacity, seed=seed, threads=threads)

    def run(start: int) -> np.ndarray:
        block = queries[start:start + SCORE_CHUNK]
        if not use_forest:
            sims = block @ index.T
            kk = min(kappa, sims.shape[1])
            return np.partition(sims, sims.shape[1] - kk, axis=1)[:, sims.shape[1] - kk:].mean(axis=1)
        means = np.empty(block.shape[0])
        for row, candidates in enumerate(forest.candidates_of_queries(block)):
            sims = index[candidates] @ block[row]
            kk = min(kappa, len(sims))
            means[row] = np.partition(sims, len(sims) - kk)[len(sims) - kk:].mean()
        return means

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        parts = list(executor.map(run, range(0, queries.shape[0], SCORE_CHUNK)))
    return np.concatenate(parts) if parts else np.empty(0)


def build_csls_context(
    source: EmbeddingSpace,
    target: EmbeddingSpace,
    mapping: Optional[MappingMatrix] = None,
    kappa: int = DEFAULT_KAPPA,
    limit: Optional[int] = None,
    trees: int = DEFAULT_TREES,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> CslsContext:
    """
    Map the source space and compute both r caches. With `limit`, each side is
    first restricted to its most frequent words. r caches are exact when both
    vocabularies have at most 20,000 words and come from a random projection
    forest otherwise.
    """
    _single_language(source, "source")
    _single_language(target, "target")
    if kappa < 1:
        raise InvalidParameterError(f"kappa must be >= 1, got {kappa}")
    if limit is not None:
        source, target = source.top_frequent(limit), target.top_frequent(limit)
    mapping = mapping or MappingMatrix.identity(source.dim)
    if target.dim != mapping.dim:
        raise InvalidParameterError(f"Target dimension {target.dim} does not match mapping dimension {mapping.dim}")

    source_unit = unit_rows(mapping.apply(source.vectors))
    target_unit = unit_rows(target.vectors)
    use_forest = max(len(source), len(target)) > EXACT_CSLS_MAX_VOCAB
    if use_forest:
        logger.info(f"Vocabulary above {EXACT_CSLS_MAX_VOCAB} words; r caches use a random projection forest")
    options = dict(use_forest=use_forest, trees=trees, seed=seed, threads=threads)
    r_source = mean_top_similarities(source_unit, target_unit, kappa, **options)
    r_target = mean_top_similarities(target_unit, source_unit, kappa, **options)
    for array in (source_unit, target_unit, r_source, r_target):
        array.setflags(write=False)
    return CslsContext(
        source=source,
        target=target,
        mapping=mapping,
        source_unit=source_unit,
        target_unit=target_unit,
        r_source=r_source,
        r_target=r_target,
        kappa=kappa,
    )


def csls(ctx: CslsContext, s: str, t: str) -> float:
    """CSLS(Ws, t) for one source and one target word."""
    i, j = ctx.source_id(s), ctx.target_id(t)
    cosine = float(ctx.source_unit[i] @ ctx.target_unit[j])
    return 2.0 * cosine - float(ctx.r_source[i]) - float(ctx.r_target[j])


def csls_retrieve(
    ctx: CslsContext,
    s: str,
    n: int,
    retrieval: Retrieval = Retrieval.CSLS,
) -> List[Tuple[str, float]]:
    """Top-`n` target words for source word `s`, best first, lower node id on ties."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    i = ctx.source_id(s)
    scores = ctx.score_rows(np.array([i]), retrieval)[0]
    ids, values = top_k(np.arange(len(ctx.target), dtype=np.int64), scores, n)
    return [(ctx.target.words[j], float(v)) for j, v in zip(ids, values)]


def _best_targets(ctx: CslsContext, source_ids: np.ndarray, retrieval: Retrieval) -> Tuple[np.ndarray, np.ndarray]:
    """Best target id and its score per source; argmax keeps the lowest id on ties."""
    best = np.empty(len(source_ids), dtype=np.int64)
    scores = np.empty(len(source_ids))
    for start in range(0, len(source_ids), SCORE_CHUNK):
        rows = ctx.score_rows(source_ids[start:start + SCORE_CHUNK], retrieval)
        best[start:start + SCORE_CHUNK] = np.argmax(rows, axis=1)
        scores[start:start + SCORE_CHUNK] = rows[np.arange(rows.shape[0]), best[start:start + SCORE_CHUNK]]
    return best, scores


def _check_languages(ctx: CslsContext, lex: Lexicon) -> None:
    if (lex.source_language, lex.target_language) != (ctx.source_language, ctx.target_language):
        raise InvalidParameterError(
            f"Lexicon is {lex.source_language}-{lex.target_language} but the spaces are "
            f"{ctx.source_language}-{ctx.target_language}"
        )


def bli_p_at_1(ctx: CslsContext, test: Lexicon, retrieval: Retrieval = Retrieval.CSLS) -> BliResult:
    """
    Precision@1 of bilingual lexicon induction. Each distinct source word with
    at least one in-vocabulary gold target is evaluated once; its top-1
    retrieval is correct if it is any of those gold targets. Pairs with an OOV
    source, or whose source has only OOV targets, are counted in `skipped_oov`.

    Raises:
        NoEvaluablePairsError: No source word can be evaluated.
    """
    _check_languages(ctx, test)
    evaluable: List[Tuple[str, int, Tuple[str, ...]]] = []
    skipped = 0
    for source, targets in test.translations().items():
        i = ctx.source.get(ctx.source_language, source)
        gold = tuple(t for t in targets if ctx.target.get(ctx.target_language, t) is not None)
        if i is None or not gold:
            skipped += len(targets)
            continue
        evaluable.append((source, i, gold))
    if not evaluable:
        raise NoEvaluablePairsError(f"None of the {len(test)} test pairs is in vocabulary")

    best, scores = _best_targets(ctx, np.array([i for _, i, _ in evaluable], dtype=np.int64), retrieval)
    rows = []
    for (source, _, gold), j, score in zip(evaluable, best, scores):
        predicted = ctx.target.words[j]
        rows.append(BliRow(source=source, gold=gold, predicted=predicted, correct=predicted in gold, score=float(score)))
    correct = sum(row.correct for row in rows)
    if skipped:
        logger.info(f"BLI: {skipped} test pair(s) skipped as out of vocabulary")
    return BliResult(p_at_1=correct / len(rows), evaluated=len(rows), skipped_oov=skipped, rows=tuple(rows))


def expand_lexicon(
    ctx: CslsContext,
    seeds: Sequence[str],
    n: int,
    retrieval: Retrieval = Retrieval.CSLS,
) -> List[Tuple[str, List[Tuple[str, float]]]]:
    """
    The `n` nearest target words of every in-vocabulary seed word.

    Raises:
        EmptyInputError: No seeds given.
        NoEvaluablePairsError: Every seed is out of vocabulary.
    """
    if not seeds:
        raise EmptyInputError("No seed words given")
    expansions = []
    missing = []
    for seed in dict.fromkeys(seeds):
        try:
            expansions.append((seed, csls_retrieve(ctx, seed, n, retrieval)))
        except OutOfVocabularyError:
            missing.append(seed)
    if missing:
        logger.warning(f"Skipped {len(missing)} out-of-vocabulary seed(s): {', '.join(missing)}")
    if not expansions:
        raise NoEvaluablePairsError("All seed words are out of vocabulary")
    return expansions


def mean_translation_cosine(ctx: CslsContext, lex: Lexicon) -> float:
    """Mean cos(Ws, t) over the in-vocabulary pairs of `lex`."""
    _check_languages(ctx, lex)
    cosines = []
    for source, target in lex.pairs:
        i = ctx.source.get(ctx.source_language, source)
        j = ctx.target.get(ctx.target_language, target)
        if i is not None and j is not None:
            cosines.append(float(ctx.source_unit[i] @ ctx.target_unit[j]))
    if not cosines:
        raise NoEvaluablePairsError("No lexicon pair is in vocabulary")
    return math.fsum(cosines) / len(cosines)


def csls_10k(ctx: CslsContext, limit: int = DEFAULT_LIMIT) -> float:
    """Mean top-1 CSLS of the `limit` most frequent source words; higher is better."""
    source_ids = np.flatnonzero(ctx.source.ranks < limit)
    if len(source_ids) == 0:
        raise EmptyInputError("No source words within the frequency limit")
    _, scores = _best_targets(ctx, source_ids, Retrieval.CSLS)
    return math.fsum(scores) / len(scores)
