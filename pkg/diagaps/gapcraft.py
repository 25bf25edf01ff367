# -*- coding: utf-8 -*-
"""
Build and check gap witnesses: a residue m modulo a squarefree M = p_1 ...
p_n with the primes split into K bins, such that m + i = 0 modulo every
prime of bin i. Each r_F(m + i, M) is then the product of one small ratio
per prime in bin i and the cross ratios of the other bins, so all K
residues have few solutions modulo M and a positive proportion of the
windows m + hM + [1, K] contain no value of F.
"""
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence
from fractions import Fraction
import heapq
import json
import logging
import math

from diagaps import util
from diagaps.arith import crt, is_prime
from diagaps.cache import SampleCache
from diagaps.counting import (BRUTE_FORCE_CAP, CountResult,
                              count_cubic_formula, count_general)
from diagaps.entities import DiagonalForm
from diagaps.equidist import PrimeSample, ratio_at_most, scan
from diagaps.errors import CertificateError, DomainError
from diagaps.exceptional import (ALLOWED_POINTS, CharacterImagePoint,
                                 is_exceptional_kummer)

logger = logging.getLogger(__name__)


class SelectionPolicy:
    """
    Which primes the gap construction may draw on.
    """

    def __init__(self, beta, limit: int, max_primes: Optional[int] = None,
                 u_class: Optional[CharacterImagePoint] = None,
                 cap: int = BRUTE_FORCE_CAP, prefer_small: bool = True):
        """
        Initialise a new selection policy.

        :param beta: The threshold in (0, 1]: primes are selected when
                     2 Re H <= -beta (cubic) or 2 Re H + K <= -beta
                     (quartic). Anything Fraction accepts.
        :param limit: The scan bound T.
        :param max_primes: The most primes a witness may use; None for all
                           selected primes.
        :param u_class: For quartic forms, only select primes with this
                        character image point. None selects from all.
        :param cap: Primes up to this are counted by brute force when no
                    closed formula applies.
        :param prefer_small: When accumulating primes of equal
                             weight per log-prime, take the smaller prime
                             first; otherwise the heavier one.
        :raises DomainError: If beta or limit is out of range, or u_class is
                             a point where no prime can be sparse.
        """
        beta = Fraction(beta)
        if not 0 < beta <= 1:
            raise DomainError(f'beta must lie in (0, 1], got {beta}')
        if limit < 2:
            raise DomainError(f'Scan bound must be at least 2, got {limit}')
        if max_primes is not None and max_primes < 1:
            raise DomainError(f'Prime budget must be positive, got '
                              f'{max_primes}')
        if u_class is not None and u_class not in ALLOWED_POINTS:
            raise DomainError(f'{u_class} has K > 1, so no prime in it can '
                              f'be selected')
        self.beta = beta
        self.limit = limit
        self.max_primes = max_primes
        self.u_class = u_class
        self.cap = cap
        self.prefer_small = prefer_small

    def __str__(self) -> str:
        return f'SelectionPolicy(beta={self.beta}, T={self.limit}, ' \
               f'max_primes={self.max_primes}, u={self.u_class})'

    def __repr__(self) -> str:
        return f'<{self}>'


class SelectedPrime(NamedTuple):
    """
    A prime with its zero-residue ratio r_F(0, p) / p^(s-1).
    """
    p: int
    ratio: Fraction

    @property
    def weight(self) -> float:
        """
        :return: -log(ratio), which is positive for selected primes.
        """
        return -math.log(self.ratio)


def _selected(sample: PrimeSample, beta: Fraction) -> bool:
    if sample.degree == 3:
        # 2 Re H = trace / sqrt(p)
        return ratio_at_most(sample.trace, sample.p, -beta)
    # 2 Re H + K = (trace + K q) / q
    return sample.trace + sample.k * sample.p <= -beta * sample.p


def residue_count(form: DiagonalForm, m: int, p: int,
                  cap: int = BRUTE_FORCE_CAP) -> CountResult:
    """
    Count r_F(m, p) exactly where any method allows, preferring the closed
    formulas: the zero formula, the cubic formula for nonzero m, then brute
    force up to the cap. Only quartic nonzero residues above the cap fall
    back to the Weil interval.

    :param form: The form.
    :param m: The residue.
    :param p: A prime dividing no coefficient.
    :param cap: The brute-force cap.
    :return: The count.
    """
    if form.degree == 3 and m % p != 0 and p % 3 == 1 and \
            form.product % p != 0:
        return count_cubic_formula(form, m, p)
    return count_general(form, m, p, cap)


def select_primes(form: DiagonalForm, policy: SelectionPolicy,
                  cache: Optional[SampleCache] = None,
                  workers: int = 1) -> List[SelectedPrime]:
    """
    Select the primes p <= T, p = 1 (mod s), dividing no coefficient, whose
    zero-residue ratio is at most 1 - beta (p^(1 - s/2) - p^(-s/2)). The
    condition is decided exactly as 2 Re H <= -beta (cubic) or
    2 Re H + K <= -beta (quartic), which is equivalent.

    :param form: A cubic, or non-exceptional quartic, form.
    :param policy: The selection policy.
    :param cache: The scan cache.
    :param workers: Worker processes for the scan.
    :return: The selected primes in ascending order, with exact ratios.
    :raises DomainError: If the form is an exceptional quartic.
    """
    if form.degree == 4:
        verdict = is_exceptional_kummer(form)
        if verdict.exceptional:
            raise DomainError(f'{form} is an exceptional form: '
                              f'r_F(0, q) >= q^3 at every good prime, so no '
                              f'prime can be selected')
    selected = []
    for sample in scan(form, policy.limit, cache=cache, workers=workers):
        if policy.u_class is not None and \
                sample.class_point != policy.u_class:
            continue
        if not _selected(sample, policy.beta):
            continue
        ratio = residue_count(form, 0, sample.p, policy.cap).ratio
        if ratio >= 1:
            raise CertificateError(f'Selected prime {sample.p} has ratio '
                                   f'{ratio} >= 1')
        selected.append(SelectedPrime(sample.p, ratio))
        logger.debug('Selected %d with ratio %s', sample.p, ratio)
    logger.info('Selected %d primes up to %d for %s', len(selected),
                policy.limit, form)
    return selected


def partition_bins(primes: Sequence[SelectedPrime], k: int) \
        -> List[List[SelectedPrime]]:
    """
    Split primes into k bins of balanced weight by the largest-first greedy
    rule: each prime, heaviest first, goes to the currently lightest bin.
    The lightest bin ends with at least total / k - max weight.

    :param primes: At least k primes.
    :param k: The number of bins.
    :return: The bins, each non-empty and sorted by prime.
    :raises DomainError: If k < 1 or there are fewer than k primes.
    """
    if k < 1:
        raise DomainError(f'Gap length must be positive, got {k}')
    if len(primes) < k:
        raise DomainError(f'Cannot fill {k} bins with {len(primes)} primes')
    bins = [[] for _ in range(k)]
    # (weight, size, index); size keeps weightless primes from piling up
    heap = [(0.0, 0, index) for index in range(k)]
    for prime in sorted(primes, key=lambda prime: (-prime.weight, prime.p)):
        weight, size, index = heapq.heappop(heap)
        bins[index].append(prime)
        heapq.heappush(heap, (weight + prime.weight, size + 1, index))
    return [sorted(bin_) for bin_ in bins]


class GapWitness:
    """
    A certified residue m modulo M for a gap of length K.
    """

    _FORMAT_VERSION = 1

    def __init__(self, form: DiagonalForm, gap_length: int,
                 bins: List[List[int]], m: int, modulus: int,
                 ratios: Dict[int, Fraction], epsilon: Fraction,
                 target: Fraction):
        """
        Initialise a new witness. Use `assemble_witness()` to construct one
        from bins; this stores whatever it is given.

        :param form: The form.
        :param gap_length: K.
        :param bins: K lists of primes; m + i = 0 modulo each prime of
                     bins[i - 1].
        :param m: The residue, in [0, M).
        :param modulus: M, the product of every bin prime.
        :param ratios: r_F(0, p) / p^(s-1) for every bin prime.
        :param epsilon: The largest r_F(m + i, M) / M^(s-1) over i in
                        [1, K].
        :param target: The epsilon the witness was built for.
        """
        self.form = form
        self.gap_length = gap_length
        self.bins = bins
        self.m = m
        self.modulus = modulus
        self.ratios = ratios
        self.epsilon = epsilon
        self.target = target

    @property
    def certified(self) -> bool:
        """
        :return: Whether epsilon meets the target.
        """
        return self.epsilon <= self.target

    @property
    def primes(self) -> List[int]:
        return sorted(p for bin_ in self.bins for p in bin_)

    @staticmethod
    def _fraction(value: Fraction) -> str:
        return f'{value.numerator}/{value.denominator}'

    def to_json(self) -> str:
        """
        :return: The witness as a JSON document with sorted keys. Big
                 integers are decimal strings, rationals "num/den" strings.
        """
        return json.dumps({
            'version': self._FORMAT_VERSION,
            'form': self.form.spec,
            'gap_length': self.gap_length,
            'bins': self.bins,
            'm': str(self.m),
            'M': str(self.modulus),
            'ratios': {str(p): self._fraction(ratio)
                       for p, ratio in self.ratios.items()},
            'epsilon': self._fraction(self.epsilon),
            'epsilon_decimal': f'{float(self.epsilon):.6g}',
            'target': self._fraction(self.target),
            'certified': self.certified,
        }, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> 'GapWitness':
        """
        Parse a witness written by `to_json()`. No check is performed beyond
        the format; use `check_witness()` for that.

        :param text: The JSON document.
        :return: The witness.
        :raises DomainError: If the document is malformed or from another
                             format version.
        """
        try:
            document = json.loads(text)
            version = document['version']
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f'Malformed witness document: {e!r}') from None
        if version != cls._FORMAT_VERSION:
            raise DomainError(f'Unsupported witness format version '
                              f'{version!r}')
        try:
            return cls(DiagonalForm.from_spec(document['form']),
                       int(document['gap_length']),
                       [[int(p) for p in bin_] for bin_ in document['bins']],
                       int(document['m']), int(document['M']),
                       {int(p): Fraction(ratio)
                        for p, ratio in document['ratios'].items()},
                       Fraction(document['epsilon']),
                       Fraction(document['target']))
        except (KeyError, TypeError, ValueError) as e:
            raise DomainError(f'Malformed witness document: {e!r}') from None

    def __str__(self) -> str:
        return f'GapWitness({self.form.spec}, K={self.gap_length}, ' \
               f'primes={len(self.primes)}, epsilon={float(self.epsilon):.4g})'

    def __repr__(self) -> str:
        return f'<{self}>'


def residue_epsilons(form: DiagonalForm, bins: Sequence[Sequence[int]],
                     m: int, cap: int = BRUTE_FORCE_CAP) -> List[Fraction]:
    """
    :param form: The form.
    :param bins: The bins of primes.
    :param m: The residue.
    :param cap: The brute-force cap.
    :return: r_F(m + i, M) / M^(s-1) for i = 1, ..., K, as the product of
             the per-prime ratios, each exact where any exact method
             applies and the Weil upper end otherwise.
    """
    primes = [p for bin_ in bins for p in bin_]
    epsilons = []
    for i in range(1, len(bins) + 1):
        product = Fraction(1)
        for p in primes:
            product *= residue_count(form, (m + i) % p, p, cap).upper_ratio
        epsilons.append(product)
    return epsilons


def assemble_witness(form: DiagonalForm, bins: Sequence[Sequence[int]],
                     target: Fraction, cap: int = BRUTE_FORCE_CAP) \
        -> GapWitness:
    """
    Solve m = -i (mod p) for every prime p of bin i by CRT and compute the
    exact certificate.

    :param form: The form.
    :param bins: K non-empty lists of distinct primes dividing no
                 coefficient.
    :param target: The epsilon aimed for.
    :param cap: The brute-force cap.
    :return: The witness, certified or not.
    :raises DomainError: If a prime repeats or a bin is empty.
    """
    bins = [sorted(bin_) for bin_ in bins]
    if not all(bins):
        raise DomainError('Every bin needs at least one prime')
    m, modulus = crt(((-i) % p, p)
                     for i, bin_ in enumerate(bins, 1) for p in bin_)
    ratios = {p: residue_count(form, 0, p, cap).ratio
              for bin_ in bins for p in bin_}
    epsilon = max(residue_epsilons(form, bins, m, cap))
    witness = GapWitness(form, len(bins), bins, m, modulus, ratios, epsilon,
                         Fraction(target))
    logger.info('Assembled %s: M has %d digits, %s', witness,
                len(str(modulus)),
                'certified' if witness.certified else 'not certified')
    return witness


class _CrossRatios:
    """
    Memoised log ratios at the residues a witness with given bins would use.
    The prime p of bin j sees residue (i - j) mod p in position i, whatever
    the CRT solution turns out to be.
    """

    def __init__(self, form: DiagonalForm, cap: int):
        self.form = form
        self.cap = cap
        self._logs = {}

    def log(self, p: int, residue: int) -> float:
        key = p, residue % p
        if key not in self._logs:
            ratio = residue_count(self.form, key[1], p, self.cap).upper_ratio
            self._logs[key] = math.log(ratio)
        return self._logs[key]

    def estimate(self, bins: Sequence[Sequence[SelectedPrime]]) -> float:
        """
        :return: The largest log epsilon over positions 1..K.
        """
        worst = -math.inf
        for i in range(1, len(bins) + 1):
            total = 0.0
            for j, bin_ in enumerate(bins, 1):
                for prime in bin_:
                    total += self.log(prime.p, i - j)
            worst = max(worst, total)
        return worst


def build_witness(form: DiagonalForm, gap_length: int,
                  policy: SelectionPolicy, target=None,
                  cache: Optional[SampleCache] = None,
                  workers: int = 1) -> GapWitness:
    """
    Accumulate selected primes, heaviest per log-prime first, re-balancing
    them into K bins after each addition, until the estimated epsilon meets
    the target; then assemble and certify exactly. If the primes run out
    first, the witness over every available prime is returned with
    `certified` false.

    :param form: A cubic, or non-exceptional quartic, form.
    :param gap_length: K.
    :param policy: The prime selection policy.
    :param target: The epsilon to reach; 1/(2K) by default.
    :param cache: The scan cache.
    :param workers: Worker processes for the scan.
    :return: The witness.
    :raises DomainError: If fewer than K primes are selected at all.
    """
    target = Fraction(1, 2 * gap_length) if target is None else \
        Fraction(target)
    if not 0 < target:
        raise DomainError(f'Target epsilon must be positive, got {target}')
    candidates = select_primes(form, policy, cache, workers)

    def priority(prime: SelectedPrime):
        tie = prime.p if policy.prefer_small else -prime.weight
        return -prime.weight / math.log(prime.p), tie

    candidates.sort(key=priority)
    if policy.max_primes is not None:
        candidates = candidates[:policy.max_primes]
    if len(candidates) < gap_length:
        raise DomainError(f'Only {len(candidates)} primes selected up to '
                          f'{policy.limit}; need at least {gap_length}')

    cross = _CrossRatios(form, policy.cap)
    log_target = math.log(target)
    witness = None
    for count in range(gap_length, len(candidates) + 1):
        bins = partition_bins(candidates[:count], gap_length)
        estimate = cross.estimate(bins)
        logger.debug('%d primes: estimated log epsilon %.4f, target %.4f',
                     count, estimate, log_target)
        if estimate > log_target + 1e-9 and count < len(candidates):
            continue
        witness = assemble_witness(form, [[prime.p for prime in bin_]
                                          for bin_ in bins], target,
                                   policy.cap)
        if witness.certified:
            return witness
    logger.warning('Prime budget exhausted: epsilon %.4g above target %s '
                   'with %d primes', float(witness.epsilon), target,
                   len(candidates))
    return witness


def check_witness(form: DiagonalForm, witness: GapWitness,
                  cap: int = BRUTE_FORCE_CAP) -> Fraction:
    """
    Recompute a witness from scratch: the modulus, every congruence, every
    per-prime ratio and the epsilon.

    :param form: The form the witness should be for.
    :param witness: The witness.
    :param cap: The brute-force cap.
    :return: The epsilon, exactly.
    :raises CertificateError: On any mismatch with the stored certificate,
                              naming the prime at fault where there is one.
    """
    if witness.form != form:
        raise CertificateError(f'Witness is for {witness.form}, not {form}')
    if len(witness.bins) != witness.gap_length or not all(witness.bins):
        raise CertificateError(f'Witness needs {witness.gap_length} '
                               f'non-empty bins, has {len(witness.bins)}')
    primes = [p for bin_ in witness.bins for p in bin_]
    if len(set(primes)) != len(primes):
        raise CertificateError(f'Duplicate primes in the bins: {primes}')
    for p in primes:
        if not is_prime(p):
            raise CertificateError(f'{p} is not prime')
        if form.product % p == 0:
            raise CertificateError(f'{p} divides a coefficient of {form}')
    if math.prod(primes) != witness.modulus:
        raise CertificateError(f'M={witness.modulus} is not the product of '
                               f'the bin primes')
    if not 0 <= witness.m < witness.modulus:
        raise CertificateError(f'm={witness.m} is not reduced modulo M')
    for i, bin_ in enumerate(witness.bins, 1):
        for p in bin_:
            if (witness.m + i) % p:
                raise CertificateError(f'Congruence violation at prime {p}: '
                                       f'm + {i} is not 0 modulo {p}')

    fresh = {p: residue_count(form, 0, p, cap).ratio for p in primes}
    for p, (stored, computed) in util.zip_dict(witness.ratios, fresh).items():
        if stored != computed:
            raise CertificateError(f'Ratio mismatch at prime {p}: stored '
                                   f'{stored}, recomputed {computed}')

    epsilon = max(residue_epsilons(form, witness.bins, witness.m, cap))
    if epsilon != witness.epsilon:
        raise CertificateError(f'Epsilon mismatch: stored {witness.epsilon}, '
                               f'recomputed {epsilon}')
    logger.info('Checked %s', witness)
    return epsilon


def tau_bound(s: int, gamma: float, k: float) -> float:
    """
    The worst-case scan bound a non-adaptive construction would need:
    gamma K^2 (log K)^4 for cubic forms and exp(exp(gamma K log K)) for
    quartic ones. Informational only.

    :param s: The degree.
    :param gamma: At least 1.
    :param k: The gap length, at least 2.
    :return: The bound; infinity when it overflows a float.
    :raises DomainError: If an argument is out of range.
    """
    if k < 2 or gamma < 1:
        raise DomainError(f'tau needs K >= 2 and gamma >= 1, got K={k}, '
                          f'gamma={gamma}')
    if s == 3:
        return gamma * k ** 2 * math.log(k) ** 4
    if s == 4:
        try:
            return math.exp(math.exp(gamma * k * math.log(k)))
        except OverflowError:
            return math.inf
    raise DomainError(f'Only degrees 3 and 4 are supported, got {s}')


def worst_case_log_epsilon(form: DiagonalForm,
                           bins: Sequence[Iterable[int]], beta) -> float:
    """
    The log epsilon a construction can promise without exact counts: each
    prime of bin i contributes log(1 - beta (p^(1-s/2) - p^(-s/2))) at
    position i and the Weil worst case log(1 + (s-1)^s p^((1-s)/2))
    elsewhere.

    :param form: The form.
    :param bins: The bins of primes.
    :param beta: The selection threshold.
    :return: The largest such sum over positions.
    """
    s = form.degree
    beta = float(beta)
    bins = [list(bin_) for bin_ in bins]
    worst = -math.inf
    for i in range(len(bins)):
        total = 0.0
        for j, bin_ in enumerate(bins):
            for p in bin_:
                if i == j:
                    total += math.log(1 - beta * (p ** (1 - s / 2) -
                                                  p ** (-s / 2)))
                else:
                    total += math.log(1 + (s - 1) ** s *
                                      p ** ((1 - s) / 2))
        worst = max(worst, total)
    return worst


class DensityBound(NamedTuple):
    """
    Among the L^s M^(s-1) progression points a = m + hM in [0, L^s M^s), at
    least `guaranteed` start a window (a, a + K] free of values of F.
    """
    region_size: int
    points: int
    guaranteed: int


def gap_density_bound(form: DiagonalForm, witness: GapWitness,
                      scale: int = 1, cap: int = BRUTE_FORCE_CAP) \
        -> DensityBound:
    """
    Count guaranteed gap starts. A value F(x) < L^s M^s has every
    x_j < LM, and the box [0, LM)^s holds L^s lifts of each residue vector,
    so at most L^s r_F(m + i, M) progression points have a value at a + i.

    :param form: The form.
    :param witness: A witness with epsilon <= 1/(2K).
    :param scale: L, at least 1.
    :param cap: The brute-force cap.
    :return: The bound.
    :raises DomainError: If the witness is too weak, m + K >= M, or L < 1.
    :raises CertificateError: If the witness does not check.
    """
    if scale < 1:
        raise DomainError(f'L must be at least 1, got {scale}')
    epsilon = check_witness(form, witness, cap)
    k = witness.gap_length
    if epsilon * 2 * k > 1:
        raise DomainError(f'Epsilon {epsilon} exceeds 1/(2K) = 1/{2 * k}')
    if witness.m + k >= witness.modulus:
        raise DomainError('Windows m + [1, K] must not wrap modulo M')
    s = form.degree
    total = sum(residue_epsilons(form, witness.bins, witness.m, cap))
    if total * 2 > 1:
        raise DomainError(f'Sum of residue ratios {total} exceeds 1/2')
    points = scale ** s * witness.modulus ** (s - 1)
    bad = total * points
    if bad.denominator != 1:
        raise CertificateError(f'Residue counts {bad} are not integral')
    return DensityBound(scale ** s * witness.modulus ** s, points,
                        points - int(bad))
