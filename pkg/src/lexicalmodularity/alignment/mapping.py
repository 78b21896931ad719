"""Supervised linear mappings and Procrustes refinement with model selection.

Mappings act on row vectors: a source matrix X is mapped to X @ W and compared
with the row-aligned target matrix Y.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from lexicalmodularity.alignment.csls import CslsContext, build_csls_context, csls_10k
from lexicalmodularity.alignment.matrix import MappingMatrix, map_space
from lexicalmodularity.embeddings.embedding_io import EmbeddingSpace, merge_spaces, preprocess
from lexicalmodularity.embeddings.lexicon import Lexicon
from lexicalmodularity.graph.modularity import modularity_from_space
from lexicalmodularity.utils.constants import (
    DEFAULT_DICTIONARY_SIZE,
    DEFAULT_K,
    DEFAULT_KAPPA,
    DEFAULT_LIMIT,
    DEFAULT_SEED,
    PreprocessStep,
    ValidationMetric,
)
from lexicalmodularity.utils.errors import (
    DegenerateMappingError,
    DictionaryCollapseError,
    InvalidParameterError,
    NoEvaluablePairsError,
)
from lexicalmodularity.utils.formatting_helpers import format_duration, format_real
from lexicalmodularity.utils.helpers import write_tsv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceEntry:
    epoch: int
    score: float
    dictionary_size: int


@dataclass
class RefinementTrace:
    """Validation score per epoch; epoch 0 is the initial mapping."""

    metric_name: str
    epochs: List[TraceEntry] = field(default_factory=list)

    @property
    def best_epoch(self) -> int:
        """Epoch with the highest score; the earliest one on ties."""
        best = None
        for entry in self.epochs:
            if best is None or entry.score > best.score:
                best = entry
        if best is None:
            raise InvalidParameterError("Empty refinement trace")
        return best.epoch


@dataclass(frozen=True)
class ValidationSettings:
    """How a validation metric is computed on a candidate mapping."""

    limit: int = DEFAULT_LIMIT
    kappa: int = DEFAULT_KAPPA
    k: int = DEFAULT_K
    trees: Optional[int] = None
    seed: int = DEFAULT_SEED
    threads: int = 1


def paired_matrices(src: EmbeddingSpace, tgt: EmbeddingSpace, lex: Lexicon) -> Tuple[np.ndarray, np.ndarray]:
    """
    Row-aligned source and target matrices over the in-vocabulary lexicon pairs.

    Raises:
        NoEvaluablePairsError: No pair has both words in vocabulary.
    """
    src_language, tgt_language = src.language_codes[0], tgt.language_codes[0]
    rows = []
    for source, target in lex.pairs:
        i = src.get(src_language, source)
        j = tgt.get(tgt_language, target)
        if i is not None and j is not None:
            rows.append((i, j))
    if not rows:
        raise NoEvaluablePairsError(f"None of the {len(lex)} lexicon pairs is in vocabulary")
    if len(rows) < len(lex):
        logger.info(f"Using {len(rows)} of {len(lex)} lexicon pairs (the rest are out of vocabulary)")
    source_ids, target_ids = map(np.array, zip(*rows))
    return src.vectors[source_ids], tgt.vectors[target_ids]


def fit_mse(src: EmbeddingSpace, tgt: EmbeddingSpace, lex: Lexicon) -> MappingMatrix:
    """
    Least-squares map W = argmin ||XW - Y||_F. Rank-deficient systems get the
    minimum-norm solution and a warning.
    """
    x, y = paired_matrices(src, tgt, lex)
    if x.shape[0] < x.shape[1]:
        logger.warning(f"Only {x.shape[0]} training pairs for dimension {x.shape[1]}; the system is underdetermined")
    w, _, rank, _ = linalg.lstsq(x, y)
    if rank < x.shape[1]:
        logger.warning(f"Source matrix has rank {rank} < {x.shape[1]}; returning the minimum-norm solution")
    return MappingMatrix(w, orthogonal=False)


def fit_procrustes(src: EmbeddingSpace, tgt: EmbeddingSpace, lex: Lexicon) -> MappingMatrix:
    """
    Orthogonal W = U V^T from the singular value decomposition U S V^T of X^T Y.

    Raises:
        DegenerateMappingError: X^T Y is all zero.
    """
    x, y = paired_matrices(src, tgt, lex)
    if x.shape[0] < x.shape[1]:
        logger.warning(f"Only {x.shape[0]} training pairs for dimension {x.shape[1]}")
    w, scale = linalg.orthogonal_procrustes(x, y)
    if scale == 0:
        raise DegenerateMappingError("Cross-covariance X^T Y is zero; no rotation is preferred")
    return MappingMatrix(w, orthogonal=True)


def induce_dictionary(ctx: CslsContext, size: int = DEFAULT_DICTIONARY_SIZE, mutual: bool = True) -> Lexicon:
    """
    Pair every source word with its CSLS-nearest target word. With `mutual`,
    keep only pairs that are also each other's CSLS-nearest source. The
    result is ordered by descending CSLS (lower source id on ties) and
    truncated to `size`.

    Raises:
        DictionaryCollapseError: No pair survives.
    """
    if size < 1:
        raise InvalidParameterError(f"Dictionary size must be >= 1, got {size}")
    n_source, n_target = len(ctx.source), len(ctx.target)
    forward = np.empty(n_source, dtype=np.int64)
    forward_scores = np.empty(n_source)
    for start in range(0, n_source, 512):
        rows = ctx.score_rows(np.arange(start, min(start + 512, n_source)))
        forward[start:start + 512] = np.argmax(rows, axis=1)
        forward_scores[start:start + 512] = rows[np.arange(rows.shape[0]), forward[start:start + 512]]

    keep = np.ones(n_source, dtype=bool)
    if mutual:
        backward = np.empty(n_target, dtype=np.int64)
        for start in range(0, n_target, 512):
            stop = min(start + 512, n_target)
            cosines = ctx.target_unit[start:stop] @ ctx.source_unit.T
            scores = 2.0 * cosines - ctx.r_target[start:stop, np.newaxis] - ctx.r_source[np.newaxis, :]
            backward[start:stop] = np.argmax(scores, axis=1)
        keep = backward[forward] == np.arange(n_source)

    source_ids = np.flatnonzero(keep)
    order = np.lexsort((source_ids, -forward_scores[source_ids]))[:size]
    source_ids = source_ids[order]
    pairs = tuple((ctx.source.words[i], ctx.target.words[forward[i]]) for i in source_ids)
    if not pairs:
        raise DictionaryCollapseError("Dictionary induction produced no pairs")
    return Lexicon(pairs, ctx.source_language, ctx.target_language)


def validation_score(
    metric: Union[str, ValidationMetric],
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    mapping: MappingMatrix,
    settings: ValidationSettings = ValidationSettings(),
) -> float:
    """
    Higher-is-better validation score of `mapping`:
    csls10k is the mean top-1 CSLS of the most frequent source words;
    mod10k is minus the normalized modularity of the joint graph over the most
    frequent words of both languages.
    """
    metric = parse_metric(metric)
    if metric is ValidationMetric.CSLS_10K:
        ctx = build_csls_context(
            src, tgt, mapping, kappa=settings.kappa, limit=settings.limit, seed=settings.seed, threads=settings.threads
        )
        return csls_10k(ctx, settings.limit)
    joint = merge_spaces(
        [
            map_space(src.top_frequent(settings.limit), mapping),
            preprocess(tgt.top_frequent(settings.limit), [PreprocessStep.UNIT]),
        ]
    )
    report = modularity_from_space(
        joint, k=settings.k, trees=settings.trees, seed=settings.seed, threads=settings.threads
    )
    return -report.q_norm


def parse_metric(metric: Union[str, ValidationMetric]) -> ValidationMetric:
    try:
        return ValidationMetric(metric)
    except ValueError:
        valid = ", ".join(m.value for m in ValidationMetric)
        raise InvalidParameterError(f"Unknown validation metric {metric!r} (valid: {valid})") from None


def refine(
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    w0: MappingMatrix,
    epochs: int,
    metric: Union[str, ValidationMetric],
    settings: ValidationSettings = ValidationSettings(),
    dictionary_size: int = DEFAULT_DICTIONARY_SIZE,
    mutual: bool = True,
) -> Tuple[MappingMatrix, RefinementTrace]:
    """
    Iterative Procrustes refinement: every epoch induces a dictionary under the
    current mapping over the most frequent words, solves Procrustes on it and
    scores the result. Returns the best-scoring mapping over all epochs,
    including `w0`, with the full trace.

    Raises:
        DictionaryCollapseError: An epoch induced an empty dictionary; the
            partial trace is attached.
    """
    metric = parse_metric(metric)
    if epochs < 1:
        raise InvalidParameterError(f"epochs must be >= 1, got {epochs}")
    started = time.monotonic()
    trace = RefinementTrace(metric_name=metric.value)
    src_top, tgt_top = src.top_frequent(settings.limit), tgt.top_frequent(settings.limit)

    best = w0
    best_score = validation_score(metric, src_top, tgt_top, w0, settings)
    trace.epochs.append(TraceEntry(epoch=0, score=best_score, dictionary_size=0))
    logger.info(f"Refinement epoch 0: {metric.value} = {best_score:.6f}")

    current = w0
    for epoch in range(1, epochs + 1):
        ctx = build_csls_context(
            src_top, tgt_top, current, kappa=settings.kappa, seed=settings.seed, threads=settings.threads
        )
        try:
            dictionary = induce_dictionary(ctx, size=dictionary_size, mutual=mutual)
        except DictionaryCollapseError as e:
            logger.error(f"Refinement aborted at epoch {epoch}: {e}")
            raise DictionaryCollapseError(str(e), trace=trace) from e
        current = fit_procrustes(src_top, tgt_top, dictionary)
        score = validation_score(metric, src_top, tgt_top, current, settings)
        trace.epochs.append(TraceEntry(epoch=epoch, score=score, dictionary_size=len(dictionary)))
        logger.info(f"Refinement epoch {epoch}: {metric.value} = {score:.6f} ({len(dictionary)} pairs)")
        if score > best_score:
            best, best_score = current, score

    logger.info(
        f"Refinement finished in {format_duration(time.monotonic() - started)}; "
        f"best epoch {trace.best_epoch} ({metric.value} = {best_score:.6f})"
    )
    return best, trace


def select_mapping(
    candidates: Sequence[MappingMatrix],
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    metric: Union[str, ValidationMetric],
    settings: ValidationSettings = ValidationSettings(),
) -> Tuple[int, List[float]]:
    """Index of the best-scoring candidate (lowest index on ties) and every score."""
    if not candidates:
        raise InvalidParameterError("No candidate mappings to select from")
    metric = parse_metric(metric)
    scores = [validation_score(metric, src, tgt, candidate, settings) for candidate in candidates]
    best = 0
    for index, score in enumerate(scores):
        if score > scores[best]:
            best = index
    logger.info(f"Selected candidate {best} of {len(candidates)} by {metric.value}")
    return best, scores


def save_trace(trace: RefinementTrace, path: Union[str, Path]) -> Path:
    """TSV with columns epoch, metric_name, score, dict_size."""
    rows = ((entry.epoch, trace.metric_name, format_real(entry.score), entry.dictionary_size) for entry in trace.epochs)
    return write_tsv(path, ("epoch", "metric_name", "score", "dict_size"), rows)
