import math


def format_duration(seconds):
    """Convert a duration in seconds to the format hh:mm:ss."""
    seconds = int(seconds)
    minutes = seconds // 60
    hours = minutes // 60
    return f"{hours:02}:{minutes % 60:02}:{seconds % 60:02}"


def truncate(text, length):
    """Truncate text to the specified length, adding '...' if necessary."""
    return text if len(text) <= length else text[:length - 3] + "..."


def format_real(value, decimals=6):
    """Fixed-point text for TSV cells; missing or non-finite values become an empty cell."""
    if value is None or not math.isfinite(value):
        return ""
    return f"{value:.{decimals}f}"


def format_full(value):
    """17 significant digits, enough to round-trip a 64-bit float."""
    return f"{value:.17g}"
