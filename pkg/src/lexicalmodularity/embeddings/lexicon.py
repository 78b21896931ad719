from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

from lexicalmodularity.utils.errors import EmptyInputError, LexiconFormatError
from lexicalmodularity.utils.helpers import iter_utf8_lines, write_text_atomic

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Lexicon:
    """Ordered, de-duplicated (source, target) word pairs; many-to-many allowed."""

    pairs: Tuple[Tuple[str, str], ...]
    source_language: str
    target_language: str

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(dict.fromkeys((s, t) for s, t in self.pairs)))

    def __len__(self) -> int:
        return len(self.pairs)

    def translations(self) -> Dict[str, List[str]]:
        """Source word -> its gold targets, both in first-seen order."""
        grouped: Dict[str, List[str]] = {}
        for source, target in self.pairs:
            grouped.setdefault(source, []).append(target)
        return grouped


def load_lexicon(path: Union[str, Path], src: str, tgt: str, lowercase: bool = False) -> Lexicon:
    """
    Read a lexicon file with two whitespace-separated words per non-empty line.

    Raises:
        LexiconFormatError: A line is not valid UTF-8 or does not have exactly
            two tokens.
        EmptyInputError: No pairs were found.
    """
    pairs: List[Tuple[str, str]] = []
    for line_number, line in iter_utf8_lines(path, LexiconFormatError):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise LexiconFormatError(path, line_number, f"expected 2 tokens, found {len(tokens)}")
        source, target = tokens
        if lowercase:
            source, target = source.lower(), target.lower()
        pairs.append((source, target))
    lexicon = Lexicon(tuple(pairs), src, tgt)
    if not lexicon.pairs:
        raise EmptyInputError(f"{path}: empty lexicon")
    if len(lexicon) < len(pairs):
        logger.info(f"{path}: {len(pairs) - len(lexicon)} duplicate pair(s) removed")
    logger.info(f"Loaded {len(lexicon)} {src}-{tgt} pairs from {path}")
    return lexicon


def save_lexicon(lexicon: Lexicon, path: Union[str, Path]) -> Path:
    lines = [f"{source} {target}" for source, target in lexicon.pairs]
    return write_text_atomic(path, "\n".join(lines) + "\n")


def filter_lexicon(lex: Lexicon, exclude: Lexicon) -> Lexicon:
    """Pairs of `lex` that do not occur in `exclude`. The result may be empty."""
    excluded = set(exclude.pairs)
    return Lexicon(
        tuple(pair for pair in lex.pairs if pair not in excluded),
        lex.source_language,
        lex.target_language,
    )

