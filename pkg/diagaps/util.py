# -*- coding: utf-8 -*-
from typing import Dict, Hashable, Iterable, Iterator, List, Optional, Tuple, \
    TypeVar

import more_itertools

K = TypeVar('K', bound=Hashable)
A = TypeVar('A')
B = TypeVar('B')


def zip_dict(a: Dict[K, A], b: Dict[K, B]) \
        -> Dict[K, Tuple[Optional[A], Optional[B]]]:
    """
    Pair up stored and recomputed values, such as per-prime ratios, so that a
    key present on only one side shows up as a mismatch against None.

    :param a: The first mapping.
    :param b: The second mapping.
    :return: Every key of either mapping, with its (a value, b value) pair.
    """
    keys = a.keys() | b.keys()
    return {key: (a.get(key), b.get(key)) for key in keys}


def chunk(iterable: Iterable[A], n: int) -> Iterator[List[A]]:
    """
    Hand prime ranges and window offsets to workers in batches.

    :param iterable: The items.
    :param n: The largest batch.
    :return: Non-empty lists of n items, the last possibly shorter.
    """
    return more_itertools.chunked(iterable, n)


def ranges(lo: int, hi: int, width: int) -> Iterator[Tuple[int, int]]:
    """
    Cover [lo, hi) with consecutive half-open ranges aligned to multiples of
    width, so that the same range keys come out whatever lo is.

    :param lo: The inclusive start.
    :param hi: The exclusive end.
    :param width: The alignment and maximum length of each range.
    :return: An iterator of (start, end) pairs in ascending order.
    :raises ValueError: If width is not positive.
    """
    if width < 1:
        raise ValueError('Range width must be positive')
    start = lo
    while start < hi:
        end = min(hi, (start // width + 1) * width)
        yield start, end
        start = end
