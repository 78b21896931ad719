import csv
import json
import logging
import math
import os
import re
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Iterator, List, Sequence, Tuple, Union

from lexicalmodularity.utils.formatting_helpers import format_full

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_text_atomic(path: PathLike, text: str) -> Path:
    """
    Write text through a temporary sibling file and move it into place, so a
    failed run never leaves a truncated artifact behind.
    Args:
        path: Destination file.
        text: Full file content.
    Returns:
        Path: The destination path.
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_name(f"{path.name}.tmp")
    try:
        with open(temp_path, "w", encoding="utf-8", newline="\n") as temp_file:
            temp_file.write(text)
        os.replace(temp_path, path)
    except OSError as e:
        logger.error(f"Error writing {path}: {e}")
        if temp_path.exists():
            temp_path.unlink()
        raise
    logger.debug(f"Wrote {path} ({len(text)} characters)")
    return path


_REAL_MARK = "__lexmod_real_"


def _json_real(value: float) -> str:
    text = format_full(value)
    return text if any(c in text for c in ".e") else f"{text}.0"


def write_json(path: PathLike, record: Dict[str, Any]) -> Path:
    """Write a JSON object with sorted keys; finite reals carry 17 significant digits."""
    reals: List[float] = []

    def mark(value: Any) -> Any:
        if isinstance(value, dict):
            return {key: mark(item) for key, item in value.items()}
        if isinstance(value, (list, tuple)):
            return [mark(item) for item in value]
        if isinstance(value, float) and math.isfinite(value):
            reals.append(value)
            return f"{_REAL_MARK}{len(reals) - 1}"
        return value

    text = json.dumps(mark(record), indent=2, sort_keys=True, ensure_ascii=False)
    text = re.sub(rf'"{_REAL_MARK}(\d+)"', lambda match: _json_real(reals[int(match.group(1))]), text)
    return write_text_atomic(path, text + "\n")


def write_tsv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a tab-separated table with a header row. Cells are written with str()."""
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(str(cell) for cell in row))
    return write_text_atomic(path, "\n".join(lines) + "\n")


def iter_utf8_lines(path: PathLike, error: Callable[[PathLike, int, str], Exception]) -> Iterator[Tuple[int, str]]:
    """
    Yield (1-based line number, decoded line) from a UTF-8 file. A line that is
    not valid UTF-8 raises `error(path, line_number, reason)`.
    """
    with open(path, "rb") as file:
        for line_number, raw in enumerate(file, start=1):
            try:
                yield line_number, raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise error(path, line_number, f"invalid UTF-8 byte at offset {e.start}") from None


def read_tsv(path: PathLike) -> List[Dict[str, str]]:
    """Read a tab-separated table with a header row into a list of dicts."""
    with open(path, "r", encoding="utf-8", newline="") as file:
        reader = csv.DictReader(file, delimiter="\t")
        rows = [row for row in reader]
        if reader.fieldnames is None:
            return []
    return rows


def sibling_path(path: PathLike, suffix: str) -> Path:
    """`out/bli.tsv` + `.summary.json` -> `out/bli.summary.json`."""
    path = Path(path)
    return path.with_name(path.stem + suffix)
