# -*- coding: utf-8 -*-
"""
Ground truth about the value set S_F = {F(x) : x in N^s}: a dense bitset on
[0, N), exact representation search in windows at large offsets, and the
search for an explicit gap inside a witness's progression.
"""
from typing import (BinaryIO, Dict, Iterator, List, NamedTuple, Optional,
                    Tuple)
from concurrent.futures import ThreadPoolExecutor
import collections
import itertools
import json
import logging
import math
import struct

import numpy as np

from diagaps import arith, util
from diagaps.entities import DiagonalForm
from diagaps.errors import CertificateError, DomainError
from diagaps.gapcraft import GapWitness, check_witness, residue_epsilons

logger = logging.getLogger(__name__)

# the most bits a bitset may hold
DEFAULT_BITSET_BUDGET = 2 ** 30

# bits sieved per segment; each worker holds one segment of bools
DEFAULT_SEGMENT_BITS = 2 ** 23

# the most search nodes a single window or membership test may visit
DEFAULT_WINDOW_BUDGET = 10 ** 8


class ValueBitset:
    """
    S_F intersected with [0, N), one bit per integer, least significant bit
    first, both in memory and on disk.

    The export format is an 8-byte header followed by the packed bits:

        magic 'SF' | version (1 byte) | reserved (1 byte) | N (uint32 LE)
    """

    _MAGIC = b'SF'
    _FORMAT_VERSION = 1
    _HEADER = struct.Struct('<2sBBI')

    # bytes unpacked at a time when scanning
    _SCAN_BYTES = 2 ** 20

    def __init__(self, form: DiagonalForm, packed: np.ndarray, limit: int):
        """
        Initialise a new bitset.

        :param form: The form whose values are marked.
        :param packed: A uint8 array of ceil(N / 8) bytes; bit n & 7 of byte
                       n >> 3 is set iff n is a value. Padding bits are
                       zero.
        :param limit: N.
        """
        self.form = form
        self.packed = packed
        self.limit = limit

    @classmethod
    def from_bools(cls, form: DiagonalForm, bools: np.ndarray) \
            -> 'ValueBitset':
        return cls(form, np.packbits(bools.astype(bool), bitorder='little'),
                   len(bools))

    def __contains__(self, n: int) -> bool:
        if not 0 <= n < self.limit:
            raise DomainError(f'{n} is outside [0, {self.limit})')
        return bool(self.packed[n >> 3] >> (n & 7) & 1)

    def lookup(self, positions: np.ndarray) -> np.ndarray:
        """
        :param positions: Integers in [0, N).
        :return: A boolean array, true where the position is a value.
        """
        positions = np.asarray(positions, dtype=np.int64)
        return (self.packed[positions >> 3] >> (positions & 7) & 1) \
            .astype(bool)

    def chunks(self) -> Iterator[Tuple[int, np.ndarray]]:
        """
        Unpack the bitset a slice at a time.

        :return: An iterator of (first integer, boolean array) pairs covering
                 [0, N) in order.
        """
        for offset in range(0, len(self.packed), self._SCAN_BYTES):
            base = offset * 8
            yield base, np.unpackbits(
                self.packed[offset:offset + self._SCAN_BYTES],
                count=min(self._SCAN_BYTES * 8, self.limit - base),
                bitorder='little').astype(bool)

    def count(self) -> int:
        """
        :return: The number of values below N.
        """
        return sum(int(np.count_nonzero(bools)) for _, bools in self.chunks())

    def values(self) -> List[int]:
        return [int(n) for base, bools in self.chunks()
                for n in np.flatnonzero(bools) + base]

    def export(self, f: BinaryIO) -> None:
        """
        :param f: A binary file to write the header and bits to.
        :raises DomainError: If N does not fit the header.
        """
        if self.limit >= 2 ** 32:
            raise DomainError(f'N={self.limit} does not fit a uint32 header')
        f.write(self._HEADER.pack(self._MAGIC, self._FORMAT_VERSION, 0,
                                  self.limit))
        f.write(self.packed.tobytes())

    @classmethod
    def load(cls, form: DiagonalForm, data: bytes) -> 'ValueBitset':
        """
        :param form: The form the file was written for; not recorded in it.
        :param data: The exported bytes.
        :return: The bitset.
        :raises DomainError: If the header is wrong or the data truncated.
        """
        if len(data) < cls._HEADER.size:
            raise DomainError('Bitset file is shorter than its header')
        magic, version, _, limit = cls._HEADER.unpack_from(data)
        if magic != cls._MAGIC or version != cls._FORMAT_VERSION:
            raise DomainError(f'Not a version {cls._FORMAT_VERSION} bitset '
                              f'file')
        size = (limit + 7) // 8
        packed = np.frombuffer(data, dtype=np.uint8, offset=cls._HEADER.size)
        if len(packed) < size:
            raise DomainError(f'Bitset file holds {len(packed) * 8} bits, '
                              f'header says {limit}')
        packed = packed[:size].copy()
        if limit & 7:
            packed[-1] &= (1 << (limit & 7)) - 1
        return cls(form, packed, limit)

    def __str__(self) -> str:
        return f'ValueBitset({self.form.spec}, N={self.limit})'

    def __repr__(self) -> str:
        return f'<{self}>'


def _terms(a: int, s: int, limit: int) -> np.ndarray:
    """
    :return: a x^s for every x >= 0 with a x^s < limit, ascending.
    """
    top = arith.int_root((limit - 1) // a, s)
    return a * np.arange(top + 1, dtype=np.int64) ** s


def _mark_segment(partial: np.ndarray, last_terms: np.ndarray, lo: int,
                  hi: int) -> np.ndarray:
    """
    :param partial: The sorted distinct sums of every term but the last.
    :param last_terms: The values of the last term, ascending.
    :return: The packed bits of [lo, hi).
    """
    segment = np.zeros(hi - lo, dtype=bool)
    for term in last_terms.tolist():
        if term >= hi:
            break
        i, j = np.searchsorted(partial, [lo - term, hi - term])
        segment[partial[i:j] + (term - lo)] = True
    return np.packbits(segment, bitorder='little')


def sieve_values(form: DiagonalForm, limit: int,
                 budget: int = DEFAULT_BITSET_BUDGET,
                 workers: int = 1,
                 segment: int = DEFAULT_SEGMENT_BITS) -> ValueBitset:
    """
    Mark every value of F below N. The distinct sums of the first s - 1
    terms are collected with duplicates removed, which is where symmetric
    forms save their factor of up to s!, and the last term is added to them
    one segment of [0, N) at a time. Memory is N / 8 bytes for the result
    plus one segment of bools per worker.

    :param form: The form.
    :param limit: N.
    :param budget: The most bits allowed.
    :param workers: Threads filling disjoint segments of the result.
    :param segment: Bits per segment; a positive multiple of 8.
    :return: The bitset.
    :raises DomainError: If N is not positive or exceeds the budget, or the
                         segment size is invalid.
    """
    if limit < 1:
        raise DomainError(f'N must be positive, got {limit}')
    if limit > budget:
        raise DomainError(f'N={limit} exceeds the bitset budget of {budget} '
                          f'bits')
    if segment < 8 or segment % 8:
        raise DomainError(f'Segment size must be a positive multiple of 8, '
                          f'got {segment}')
    s = form.degree
    *head, last = form.coefficients
    partial = np.zeros(1, dtype=np.int64)
    for a in head:
        sums = (partial[:, None] + _terms(a, s, limit)[None, :]).ravel()
        partial = np.unique(sums[sums < limit])
    last_terms = _terms(last, s, limit)
    packed = np.zeros((limit + 7) // 8, dtype=np.uint8)

    def fill(lo: int) -> None:
        bits = _mark_segment(partial, last_terms, lo, min(limit, lo + segment))
        packed[lo >> 3:(lo >> 3) + len(bits)] = bits

    starts = range(0, limit, segment)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            list(executor.map(fill, starts))
    else:
        for lo in starts:
            fill(lo)
    bitset = ValueBitset(form, packed, limit)
    logger.info('Sieved %s below %d: %d values', form, limit, bitset.count())
    return bitset


class Gap(NamedTuple):
    """
    A run of non-values: start + 1, ..., start + length. An absent gap has
    start None and length 0.
    """
    start: Optional[int]
    length: int


def max_gap(bitset: ValueBitset) -> Gap:
    """
    :param bitset: A bitset.
    :return: The longest run of unset bits, the first on ties. Runs
             reaching the end of the bitset count; a run from 0 has start
             -1.
    """
    best = Gap(None, 0)
    previous = -1
    for base, bools in bitset.chunks():
        values = np.flatnonzero(bools) + base
        if not len(values):
            continue
        edges = np.concatenate(([previous], values))
        lengths = np.diff(edges) - 1
        j = int(np.argmax(lengths))
        if lengths[j] > best.length:
            best = Gap(int(edges[j]), int(lengths[j]))
        previous = int(values[-1])
    tail = bitset.limit - 1 - previous
    if tail > best.length:
        best = Gap(previous, tail)
    return best


class ValueWindow(NamedTuple):
    """
    The values of F in (start, start + length], each with one
    representation.
    """
    start: int
    length: int
    representations: List[Tuple[int, Tuple[int, ...]]]

    @property
    def empty(self) -> bool:
        return not self.representations


class _Search:
    """
    Depth-first search for vectors x with lo <= F(x) <= hi. Variables are
    visited in order of descending coefficient; between equal coefficients
    x is non-increasing, so every value is reached from a sorted vector.
    """

    def __init__(self, form: DiagonalForm, lo: int, hi: int, budget: int,
                 exhaustive: bool):
        self.form = form
        self.s = form.degree
        self.lo = lo
        self.hi = hi
        self.budget = budget
        self.exhaustive = exhaustive
        self.order = sorted(range(self.s),
                            key=lambda i: -form.coefficients[i])
        self.coefficients = [form.coefficients[i] for i in self.order]
        self.nodes = 0
        self.found: Dict[int, Tuple[int, ...]] = {}

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise DomainError(f'Window ({self.lo - 1}, {self.hi}] needs more '
                              f'than {self.budget} search steps; raise the '
                              f'budget or use a smaller offset')

    def _tail_is_symmetric(self, j: int) -> bool:
        return all(a == self.coefficients[j] for a in self.coefficients[j:])

    def _emit(self, n: int, xs: List[int]) -> None:
        x = [0] * self.s
        for position, value in zip(self.order, xs):
            x[position] = value
        x = tuple(x)
        if self.form.evaluate(x) != n:
            raise CertificateError(f'Representation {x} of {n} does not '
                                   f'evaluate to {n}')
        self.found.setdefault(n, x)

    def run(self) -> None:
        self._visit(0, 0, None, [])

    def _visit(self, j: int, partial: int, bound: Optional[int],
               xs: List[int]) -> bool:
        """
        :return: Whether to stop searching.
        """
        a = self.coefficients[j]
        top = arith.int_root((self.hi - partial) // a, self.s)
        if bound is not None:
            top = min(top, bound)
        rest = self.s - j - 1
        symmetric = self._tail_is_symmetric(j)
        for x in range(top, -1, -1):
            self._tick()
            total = partial + a * x ** self.s
            if rest == 0:
                if total < self.lo:
                    break
                self._emit(total, xs + [x])
                if not self.exhaustive:
                    return True
                continue
            # the remaining terms are at most a x^s each
            if symmetric and total + rest * a * x ** self.s < self.lo:
                break
            equal_next = self.coefficients[j + 1] == a
            if self._visit(j + 1, total, x if equal_next else None,
                           xs + [x]):
                return True
        return False


def window_search_cost(form: DiagonalForm, top: int) -> int:
    """
    Estimate the nodes a window search below `top` visits: the product of
    the ranges of every variable but the one with the smallest coefficient,
    divided by the orderings the search skips between equal coefficients.
    The last variable only steps through the few values near the window.

    :param form: The form.
    :param top: The largest integer of the window.
    :return: The estimate.
    """
    s = form.degree
    outer = sorted(form.coefficients, reverse=True)[:-1]
    cost = math.prod(arith.int_root(max(top, 0) // a, s) + 1 for a in outer)
    for multiplicity in collections.Counter(outer).values():
        cost //= math.factorial(multiplicity)
    return max(cost, 1)


def _magnitude(n: int) -> str:
    return f'10^{len(str(n)) - 1}'


def window_has_value(form: DiagonalForm, start: int, length: int,
                     budget: int = DEFAULT_WINDOW_BUDGET,
                     exhaustive: bool = True) -> ValueWindow:
    """
    Find the values of F in (A, A + K] exactly, by descending enumeration of
    the largest-coefficient variable and recursion on the residual.

    :param form: The form.
    :param start: A, at least -1.
    :param length: K, at least 1.
    :param budget: The most search steps allowed.
    :param exhaustive: Find every value; otherwise stop at the first.
    :return: The window, with one representation per value found.
    :raises DomainError: If the arguments are out of range or the search
                         exceeds its budget.
    """
    if start < -1 or length < 1:
        raise DomainError(f'Window needs A >= -1 and K >= 1, got A={start}, '
                          f'K={length}')
    cost = window_search_cost(form, start + length)
    if cost > budget:
        raise DomainError(f'Window ({start}, {start + length}] needs about '
                          f'{_magnitude(cost)} search steps, over the budget '
                          f'of {budget}')
    search = _Search(form, start + 1, start + length, budget, exhaustive)
    search.run()
    logger.debug('Window (%d, %d] of %s: %d values in %d steps', start,
                 start + length, form, len(search.found), search.nodes)
    return ValueWindow(start, length, sorted(search.found.items()))


def is_value(form: DiagonalForm, n: int,
             budget: int = DEFAULT_WINDOW_BUDGET) -> bool:
    """
    Decide whether n = F(x) for some x in N^s by plain nested loops over the
    first s - 1 variables in their given order and an exact root test for
    the last. Shares nothing with the window search but `int_root`.

    :param form: The form.
    :param n: The integer.
    :param budget: The most loop iterations allowed.
    :return: Whether n is a value.
    :raises DomainError: If the test exceeds its budget.
    """
    if n < 0:
        return False
    s = form.degree
    *head, last = form.coefficients
    ranges = [range(arith.int_root(n // a, s) + 1) for a in head]
    if math.prod(r.stop for r in ranges) > budget:
        raise DomainError(f'Membership test for {n} needs more than '
                          f'{budget} steps')
    for xs in itertools.product(*ranges):
        residual = n - sum(a * x ** s for a, x in zip(head, xs))
        if residual < 0 or residual % last:
            continue
        if arith.is_power(residual // last, s):
            return True
    return False


class GapReport:
    """
    The outcome of scanning windows m + (h - 1) M + [1, K] for h = 1, 2, ...
    """

    def __init__(self, form: DiagonalForm, gap_length: int, epsilon,
                 hits: List[bool], start: Optional[int] = None,
                 h: Optional[int] = None,
                 verification: Optional[List[Tuple[int, bool]]] = None):
        """
        Initialise a new report.

        :param form: The form.
        :param gap_length: K.
        :param epsilon: The witness's epsilon.
        :param hits: For each h scanned, whether its window held a value.
        :param start: The a of the first empty window, if any.
        :param h: The h of the first empty window, if any.
        :param verification: (n, is_value(n)) for each n in the gap, from the
                             independent membership test.
        """
        self.form = form
        self.gap_length = gap_length
        self.epsilon = epsilon
        self.hits = hits
        self.start = start
        self.h = h
        self.verification = verification or []

    @property
    def found(self) -> bool:
        return self.start is not None

    @property
    def hit_rate(self) -> float:
        """
        :return: The fraction of scanned windows holding a value.
        """
        return sum(self.hits) / len(self.hits) if self.hits else 0.0

    @property
    def expected_hit_rate(self) -> float:
        """
        :return: min(1, K epsilon), the average bound the certificate gives.
        """
        return min(1.0, self.gap_length * float(self.epsilon))

    def to_json(self) -> str:
        return json.dumps({
            'form': self.form.spec,
            'gap_length': self.gap_length,
            'found': self.found,
            'a': None if self.start is None else str(self.start),
            'h': self.h,
            'windows_scanned': len(self.hits),
            'hit_rate': round(self.hit_rate, 6),
            'expected_hit_rate': round(self.expected_hit_rate, 6),
            'verification': [{'n': str(n), 'is_value': value}
                             for n, value in self.verification],
        }, sort_keys=True, indent=2)

    def __str__(self) -> str:
        if self.found:
            return f'GapReport({self.form.spec}: gap after {self.start}, ' \
                   f'h={self.h})'
        return f'GapReport({self.form.spec}: none in {len(self.hits)} ' \
               f'windows)'

    def __repr__(self) -> str:
        return f'<{self}>'


def find_explicit_gap(form: DiagonalForm, witness: GapWitness, h_max: int,
                      budget: int = DEFAULT_WINDOW_BUDGET,
                      stop_at_first: bool = True) -> GapReport:
    """
    Scan the witness's windows for one holding no value of F. A window found
    empty is confirmed by testing each of its integers with `is_value()`
    before it is reported.

    :param form: The form.
    :param witness: A witness that passes `check_witness()`.
    :param h_max: The most windows to scan.
    :param budget: The search budget of each window.
    :param stop_at_first: Stop at the first gap; otherwise scan all h_max
                          windows for the hit statistics.
    :return: The report; `found` is false if every window held a value.
    :raises CertificateError: If the witness does not check, or the
                              confirmation disagrees with the search.
    """
    if h_max < 1:
        raise DomainError(f'h_max must be positive, got {h_max}')
    epsilon = check_witness(form, witness)
    k = witness.gap_length
    cost = window_search_cost(form, witness.m + k)
    if cost > budget:
        raise DomainError(f'The first window of a witness with a '
                          f'{len(str(witness.modulus))}-digit modulus needs '
                          f'about {_magnitude(cost)} search steps, over the '
                          f'budget of {budget}')
    report = GapReport(form, k, epsilon, [])
    for h in range(1, h_max + 1):
        a = witness.m + (h - 1) * witness.modulus
        window = window_has_value(form, a, k, budget, exhaustive=False)
        report.hits.append(not window.empty)
        if window.empty and not report.found:
            verification = [(n, is_value(form, n, budget))
                            for n in range(a + 1, a + k + 1)]
            if any(value for _, value in verification):
                raise CertificateError(f'Window after {a} was searched empty '
                                       f'but holds a value: {verification}')
            report.start, report.h = a, h
            report.verification = verification
            logger.info('Found a gap of length %d after %d (h=%d)', k, a, h)
            if stop_at_first:
                break
    if not report.found:
        logger.warning('No gap in %d windows of %s; hit rate %.3f', h_max,
                       witness, report.hit_rate)
    return report


class ProgressionCheck(NamedTuple):
    """
    How many progression points m + i + hM below L^s M^s are values, against
    the bound L^s r_F(m + i, M).
    """
    i: int
    observed: int
    bound: int


def progression_density_check(form: DiagonalForm, witness: GapWitness,
                              scale: int = 1,
                              budget: int = DEFAULT_BITSET_BUDGET) \
        -> List[ProgressionCheck]:
    """
    Check the counting step behind the density bound directly on a small
    witness, by sieving [0, L^s M^s).

    :param form: The form.
    :param witness: A witness with M^s L^s within the bitset budget.
    :param scale: L.
    :param budget: The bitset budget.
    :return: One check per i in [1, K].
    :raises DomainError: If the region exceeds the bitset budget.
    """
    s = form.degree
    limit = scale ** s * witness.modulus ** s
    bitset = sieve_values(form, limit, budget)
    epsilons = residue_epsilons(form, witness.bins, witness.m)
    points = scale ** s * witness.modulus ** (s - 1)
    checks = []
    for i, epsilon in enumerate(epsilons, 1):
        positions = np.arange(witness.m + i, limit, witness.modulus)
        observed = int(np.count_nonzero(bitset.lookup(positions)))
        checks.append(ProgressionCheck(i, observed, int(epsilon * points)))
    return checks


def chunked_windows(form: DiagonalForm, start: int, stop: int, length: int,
                    workers: int = 1,
                    budget: int = DEFAULT_WINDOW_BUDGET) -> List[ValueWindow]:
    """
    Search consecutive windows (a, a + K] for a = start, start + K, ... below
    stop, in batches across threads. Results come back in window order.

    :param form: The form.
    :param start: The first A.
    :param stop: The exclusive bound on A.
    :param length: K.
    :param workers: Threads to use.
    :param budget: The search budget of each window.
    :return: The windows.
    """
    offsets = range(start, stop, length)

    def search(a: int) -> ValueWindow:
        return window_has_value(form, a, length, budget)

    windows = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        for batch in util.chunk(offsets, 64 * max(1, workers)):
            windows.extend(executor.map(search, batch))
    return windows
