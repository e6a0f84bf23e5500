import math
import re
from datetime import datetime
from decimal import Decimal, ROUND_HALF_UP


def get_datetime_string() -> str:
    return datetime.now().strftime('%Y-%m-%d %H:%M:%S')


def round_half_up(value: float, decimals: int) -> str:
    """Rounds the shortest decimal representation of value half-up and returns the display string."""
    if not isinstance(decimals, int):
        raise TypeError(f"the 'decimals' specified was of wrong type {type(decimals)}, expected {int}.")
    if decimals < 0:
        raise ValueError(f"the 'decimals' specified was less than 0.")
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    quantum = Decimal(1).scaleb(-decimals)
    rounded = Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)
    # avoid "-0.00"
    if rounded == 0:
        rounded = abs(rounded)
    return f"{rounded:.{decimals}f}"


def format_number(value: float) -> str:
    """Shortest text that reads back as the same float, with integral values written without a fraction."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def slugify(text: str) -> str:
    """'Thank you' -> 'thank-you'"""
    return re.sub(r"[\s_]+", "-", text.strip()).lower()


def natural_key(text: str):
    """Sort key that orders S2 before S10."""
    return tuple(int(part) if part.isdigit() else part.lower() for part in re.split(r"(\d+)", text))
