from typing import Any, Iterable, Sequence, Generator, Tuple


def chunk_ranges(length: int, size: int) -> Generator[Tuple[int, int], None, None]:
    """Yields successive (start, stop) ranges of at most size elements covering range(length)."""
    if size < 1:
        raise ValueError(f"the 'size' specified was less than 1.")
    for start in range(0, length, size):
        yield start, min(start + size, length)


def duplicates(values: Iterable[Any]) -> list:
    """Returns the values occurring more than once, in order of their second occurrence."""
    seen, repeated = set(), []
    for value in values:
        if value in seen and value not in repeated:
            repeated.append(value)
        seen.add(value)
    return repeated


def ordered_unique(values: Sequence[Any]) -> list:
    return list(dict.fromkeys(values))
