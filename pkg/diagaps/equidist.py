# -*- coding: utf-8 -*-
"""
Scan primes for the real part of the H term (and, for quartic forms, the K
term and character image point), and compare the observed distribution of
Re H with the arccos law.
"""
from typing import Iterator, List, NamedTuple, Optional, Sequence
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
import logging
import math

import numpy as np

from diagaps import util
from diagaps.arith import primes_in
from diagaps.cache import NullCache, Row, SampleCache
from diagaps.cyclotomic import (TUPLE_CLASSES, h_trace, make_context,
                                tuple_class_at)
from diagaps.entities import DiagonalForm
from diagaps.errors import DomainError
from diagaps.exceptional import CharacterImagePoint

logger = logging.getLogger(__name__)

# primes per cache file; also the unit of work handed to a worker
_CHUNK_WIDTH = 100_000

# angle windows in the discrepancy statistic
DISCREPANCY_BINS = 64


def ratio_at_most(x: int, d2: int, bound: Fraction) -> bool:
    """
    Decide x / sqrt(d2) <= bound exactly.

    :param x: The numerator.
    :param d2: The square of the positive denominator.
    :param bound: The rational threshold.
    :return: Whether the inequality holds.
    """
    lhs = x * x * bound.denominator ** 2
    rhs = bound.numerator ** 2 * d2
    if bound >= 0:
        return x <= 0 or lhs <= rhs
    return x < 0 and lhs >= rhs


class PrimeSample(NamedTuple):
    """
    The H term data at one prime.
    """
    p: int
    degree: int
    # the integer 2 Re(conj(chi)(a_1 ... a_s) pi^(s-2))
    trace: int
    k: Optional[int] = None
    class_point: Optional[CharacterImagePoint] = None

    @property
    def re_h_denominator_squared(self) -> int:
        """
        :return: The square of the scale dividing the trace to give Re H:
                 4p for cubic forms, 4p^2 for quartic ones.
        """
        return 4 * self.p ** (self.degree - 2)

    @property
    def re_h(self) -> float:
        return self.trace / math.sqrt(self.re_h_denominator_squared)

    def re_h_at_most(self, beta: Fraction) -> bool:
        """
        :param beta: A rational threshold.
        :return: Whether Re H <= beta, decided exactly.
        """
        return ratio_at_most(self.trace, self.re_h_denominator_squared, beta)

    def to_row(self) -> Row:
        if self.class_point is None:
            return self.p, self.trace, None, None, None
        return (self.p, self.trace, self.k,
                self.class_point.tuple_class.index, self.class_point.u5)

    @classmethod
    def from_row(cls, degree: int, row: Row) -> 'PrimeSample':
        p, trace, k, index, u5 = row
        if index is None:
            return cls(p, degree, trace)
        return cls(p, degree, trace, k,
                   CharacterImagePoint(TUPLE_CLASSES[index], u5))


def sample_at(form: DiagonalForm, p: int) -> PrimeSample:
    """
    :param form: The form.
    :param p: A prime congruent to 1 modulo the degree, dividing no
              coefficient.
    :return: The sample at p.
    :raises DomainError: If p is in the wrong class or divides a coefficient.
    """
    ctx = make_context(form.degree, p)
    trace = h_trace(form, ctx)
    if form.degree == 3:
        return PrimeSample(p, 3, trace)
    cls, sign = tuple_class_at(form, ctx)
    return PrimeSample(p, 4, trace, cls.k(sign),
                       CharacterImagePoint(cls, sign))


def _scan_range(spec: str, lo: int, hi: int) -> List[Row]:
    """
    Compute the rows for every admissible prime in [lo, hi). Takes the form
    spec rather than the form so it pickles cheaply to worker processes.
    """
    form = DiagonalForm.from_spec(spec)
    s = form.degree
    product = form.product
    return [sample_at(form, p).to_row() for p in primes_in(lo, hi)
            if p % s == 1 and product % p != 0]


def scan(form: DiagonalForm, limit: int, cache: Optional[SampleCache] = None,
         workers: int = 1, chunk_width: int = _CHUNK_WIDTH) \
        -> Iterator[PrimeSample]:
    """
    Produce one sample per prime p <= limit with p = 1 (mod s) and p dividing
    no coefficient, in ascending order of p.

    :param form: The form to scan.
    :param limit: The scan bound T, inclusive.
    :param cache: Where to look for and store chunk results.
    :param workers: The number of worker processes; 1 computes in-process.
    :param chunk_width: The width of each prime range.
    :return: An iterator of samples.
    :raises DomainError: If limit < 2.
    """
    if limit < 2:
        raise DomainError(f'Scan bound must be at least 2, got {limit}')
    cache = cache or NullCache()
    chunks = list(util.ranges(0, limit + 1, chunk_width))

    rows = {}
    missing = []
    for lo, hi in chunks:
        cached = cache.load(form, lo, hi)
        if cached is None:
            missing.append((lo, hi))
        else:
            rows[lo, hi] = cached
    logger.info('Scanning %s to %d: %d of %d chunks cached', form, limit,
                len(chunks) - len(missing), len(chunks))

    if workers > 1 and len(missing) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for batch in util.chunk(missing, workers * 4):
                results = executor.map(_scan_range,
                                       [form.spec] * len(batch),
                                       [lo for lo, _ in batch],
                                       [hi for _, hi in batch])
                for (lo, hi), result in zip(batch, results):
                    cache.store(form, lo, hi, result)
                    rows[lo, hi] = result
    else:
        for lo, hi in missing:
            result = _scan_range(form.spec, lo, hi)
            cache.store(form, lo, hi, result)
            rows[lo, hi] = result

    for key in chunks:
        for row in rows[key]:
            yield PrimeSample.from_row(form.degree, row)


def _restricted(samples: Sequence[PrimeSample],
                restriction: Optional[CharacterImagePoint]) \
        -> List[PrimeSample]:
    if restriction is None:
        return list(samples)
    return [sample for sample in samples if sample.class_point == restriction]


def discrepancy_of(samples: Sequence[PrimeSample],
                   bins: int = DISCREPANCY_BINS) -> float:
    """
    Measure how far the angles arccos(Re H) are from uniform on [0, pi]. With
    F_j the number of angles in the first j of `bins` equal windows and
    D_j = F_j / n - j / bins, the statistic is max D_j - min D_j, which is the
    supremum over windows of consecutive grid cells of
    |observed fraction - window length / pi|.

    :param samples: The samples.
    :param bins: The number of grid cells.
    :return: The statistic, in [0, 1].
    :raises DomainError: If there are no samples.
    """
    if not samples:
        raise DomainError('The discrepancy of an empty sample is undefined')
    re_h = np.clip([sample.re_h for sample in samples], -1.0, 1.0)
    angles = np.arccos(re_h)
    histogram, _ = np.histogram(angles, bins=bins, range=(0.0, math.pi))
    cumulative = np.concatenate(([0], np.cumsum(histogram))) / len(samples)
    deviations = cumulative - np.arange(bins + 1) / bins
    return float(deviations.max() - deviations.min())


def moment_sums(samples: Sequence[PrimeSample], n_max: int) -> List[float]:
    """
    :param samples: The samples.
    :param n_max: The highest moment.
    :return: The normalised Weyl sums (1/#) sum cos(n theta) for
             n = 1, ..., n_max, where theta = arccos(Re H). Each tends to 0
             when the angles are uniform.
    :raises DomainError: If there are no samples.
    """
    if not samples:
        raise DomainError('Moments of an empty sample are undefined')
    angles = np.arccos(np.clip([sample.re_h for sample in samples], -1, 1))
    return [float(np.cos(n * angles).mean()) for n in range(1, n_max + 1)]


def discrepancy(form: DiagonalForm, limit: int,
                restriction: Optional[CharacterImagePoint] = None,
                **kwargs) -> float:
    """
    :param form: The form to scan.
    :param limit: The scan bound T.
    :param restriction: For quartic forms, only count primes with this
                        character image point.
    :param kwargs: Passed through to `scan()`.
    :return: The discrepancy of the scanned angles.
    :raises DomainError: If limit < 100 or no prime is sampled.
    """
    if limit < 100:
        raise DomainError(f'Discrepancy needs T >= 100, got {limit}')
    samples = _restricted(list(scan(form, limit, **kwargs)), restriction)
    return discrepancy_of(samples)


class DensityReport(NamedTuple):
    """
    The fraction of scanned primes with Re H <= beta, against the arccos law.

    Relative figures are among the scanned (restricted) primes; absolute ones
    are among all primes up to T, where the law predicts half the relative
    density, since only half of all primes are 1 modulo s.
    """
    limit: int
    beta: Fraction
    samples: int
    selected: int
    observed: float
    expected: float
    observed_absolute: float
    expected_absolute: float
    discrepancy: float

    def to_dict(self) -> dict:
        result = self._asdict()
        result['beta'] = str(self.beta)
        return result


def expected_density(beta: Fraction) -> float:
    """
    :param beta: The threshold.
    :return: arccos(-beta) / pi, the limiting fraction with Re H <= beta.
    """
    return math.acos(-float(beta)) / math.pi


def density_report(form: DiagonalForm, limit: int, beta,
                   restriction: Optional[CharacterImagePoint] = None,
                   **kwargs) -> DensityReport:
    """
    Scan and compare the fraction of primes with Re H <= beta with
    arccos(-beta) / pi.

    :param form: The form to scan.
    :param limit: The scan bound T.
    :param beta: The threshold in (-1, 1]; anything Fraction accepts.
    :param restriction: For quartic forms, only count primes with this
                        character image point.
    :param kwargs: Passed through to `scan()`.
    :return: The report.
    :raises DomainError: If beta is out of range, or no prime is sampled.
    """
    beta = Fraction(beta)
    if not -1 < beta <= 1:
        raise DomainError(f'beta must lie in (-1, 1], got {beta}')
    samples = _restricted(list(scan(form, limit, **kwargs)), restriction)
    if not samples:
        raise DomainError(f'No primes of {form} up to {limit} to report on')
    selected = sum(1 for sample in samples if sample.re_h_at_most(beta))
    expected = expected_density(beta)
    all_primes = len(primes_in(2, limit + 1))
    report = DensityReport(limit, beta, len(samples), selected,
                           selected / len(samples), expected,
                           selected / all_primes, expected / 2,
                           discrepancy_of(samples))
    logger.info('%s: %d of %d primes up to %d have Re H <= %s (%.4f, '
                'expected %.4f)', form, selected, len(samples), limit, beta,
                report.observed, expected)
    return report
