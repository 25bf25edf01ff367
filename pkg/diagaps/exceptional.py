# -*- coding: utf-8 -*-
"""
Decide whether a quartic diagonal form is exceptional, i.e. equal up to
permutation and fourth-power factors to a x^4 + b y^4 + 4a z^4 + 4b w^4.
Exceptional forms have r_F(0, q) >= q^3 at every good prime, so no prime
makes them sparse modulo q and the gap construction cannot start.
"""
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple
import collections
import functools
import itertools
import logging

import sympy

from diagaps import arith
from diagaps.arith import primes_in
from diagaps.counting import BRUTE_FORCE_CAP, count_general
from diagaps.cyclotomic import TupleClass, TUPLE_CLASSES, classify_tuple
from diagaps.entities import DiagonalForm
from diagaps.errors import DomainError

logger = logging.getLogger(__name__)


class DeltaGroup(NamedTuple):
    """
    The subgroup of Q+/(Q*)^4 generated by a_1, ..., a_4 and 4, presented by
    valuations modulo 4 over the primes dividing 2 a_1 a_2 a_3 a_4.
    """
    primes: Tuple[int, ...]
    # five vectors, for a_1, ..., a_4 and then 4
    generators: Tuple[Tuple[int, ...], ...]


class CharacterImagePoint(NamedTuple):
    """
    A class of (chi(a_1), ..., chi(a_4)) together with chi(-1).
    """
    tuple_class: TupleClass
    u5: int

    @property
    def k(self) -> int:
        """
        :return: The K term taken by every prime in this class.
        """
        return self.tuple_class.k(self.u5)

    def __str__(self) -> str:
        return f'({self.tuple_class.name},{self.u5:+d})'


# the image points under which K <= 1, so primes with r_F(0, q) < q^3 exist
ALLOWED_POINTS = frozenset(
    [CharacterImagePoint(TUPLE_CLASSES[i], 1) for i in (2, 3, 5, 7, 8)] +
    [CharacterImagePoint(TUPLE_CLASSES[i], -1) for i in (1, 2, 5, 6, 7)])


def _require_quartic(form: DiagonalForm) -> None:
    if form.degree != 4:
        raise DomainError(f'{form} is not quartic; exceptionality is only '
                          f'defined for biquadratic forms')


def delta_group(form: DiagonalForm) -> DeltaGroup:
    """
    :param form: A quartic form.
    :return: The valuation presentation of its Kummer group.
    :raises DomainError: If the form is not quartic.
    """
    _require_quartic(form)
    primes = tuple(sorted(sympy.factorint(2 * form.product)))

    def vector(n: int) -> Tuple[int, ...]:
        return tuple(sympy.multiplicity(ell, n) % 4 for ell in primes)

    return DeltaGroup(primes, tuple(vector(a) for a in form.coefficients) +
                      (vector(4),))


@functools.lru_cache(maxsize=8192)
def _fibers(coefficients: Tuple[int, ...]) \
        -> Dict[CharacterImagePoint, int]:
    group = delta_group(DiagonalForm.from_coefficients(coefficients))
    # primes on which every generator is a fourth power add nothing but a
    # constant factor to each fiber
    active = [j for j in range(len(group.primes))
              if any(v[j] for v in group.generators)]
    fibers = collections.Counter()
    # Z/4 is injective over itself, so every character of the subgroup
    # extends to one of the ambient group; enumerating those covers Hom
    for c in itertools.product(range(4), repeat=len(active)):
        exps = [sum(cj * v[j] for cj, j in zip(c, active)) % 4
                for v in group.generators]
        point = CharacterImagePoint(classify_tuple(exps[:4]),
                                    1 if exps[4] == 0 else -1)
        fibers[point] += 1
    return dict(fibers)


def char_image(form: DiagonalForm) -> FrozenSet[CharacterImagePoint]:
    """
    Enumerate every character of the Kummer group, map it to the class of
    (psi(a_1), ..., psi(a_4)) and psi(4) = chi(-1), and collect the points
    hit. By Chebotarev each point is taken by a positive density of primes.

    :param form: A quartic form.
    :return: The image.
    :raises DomainError: If the form is not quartic.
    """
    _require_quartic(form)
    return frozenset(_fibers(form.coefficients))


def pick_good_u(form: DiagonalForm) -> CharacterImagePoint:
    """
    Choose the allowed image point to restrict prime selection to: the one
    with the largest fiber, then the smallest K, then the lowest class index.

    :param form: A non-exceptional quartic form.
    :return: The chosen point.
    :raises DomainError: If the form is exceptional.
    """
    _require_quartic(form)
    fibers = _fibers(form.coefficients)
    candidates = [point for point in fibers if point in ALLOWED_POINTS]
    if not candidates:
        raise DomainError(f'{form} is exceptional; no allowed image point')
    return min(candidates, key=lambda point: (-fibers[point], point.k,
                                              point.tuple_class.index))


class KummerVerdict(NamedTuple):
    exceptional: bool
    certificate: Optional[CharacterImagePoint]


def is_exceptional_kummer(form: DiagonalForm) -> KummerVerdict:
    """
    Decide exceptionality from the character image: the form is exceptional
    iff no image point is allowed.

    :param form: A quartic form.
    :return: The verdict, with the chosen allowed point as certificate when
             the form is not exceptional.
    """
    _require_quartic(form)
    if char_image(form).isdisjoint(ALLOWED_POINTS):
        return KummerVerdict(True, None)
    return KummerVerdict(False, pick_good_u(form))


def _fourth_power_split(n: int) -> Tuple[int, int]:
    """
    :param n: A positive integer.
    :return: (f, c) with n = f c^4 and f fourth-power free.
    """
    free, root = 1, 1
    for ell, e in sympy.factorint(n).items():
        free *= ell ** (e % 4)
        root *= ell ** (e // 4)
    return free, root


def _split_pair(x: int, y: int) -> Optional[Tuple[int, int, int, bool]]:
    """
    Try to write {x, y} as {a c^4, 4a d^4}.

    :return: (a, c, d, swapped), where swapped says y plays the a c^4 role,
             or None.
    """
    for first, second, swapped in ((x, y, False), (y, x, True)):
        a, c = _fourth_power_split(first)
        if second % (4 * a) == 0 and arith.is_power(second // (4 * a), 4):
            return a, c, arith.int_root(second // (4 * a), 4), swapped
    return None


class Decomposition(NamedTuple):
    """
    Witnesses coefficients[sigma[j]] = (a c1^4, b c2^4, 4a c3^4, 4b c4^4)[j].
    """
    a: int
    b: int
    c: Tuple[int, int, int, int]
    sigma: Tuple[int, int, int, int]

    def __str__(self) -> str:
        c1, c2, c3, c4 = self.c
        return f'a={self.a} b={self.b} c=({c1},{c2},{c3},{c4}) ' \
               f'positions={self.sigma}'


def exceptional_decomposition(form: DiagonalForm) -> Optional[Decomposition]:
    """
    Search for an explicit decomposition of the coefficients as
    (a c1^4, b c2^4, 4a c3^4, 4b c4^4) up to permutation.

    :param form: A quartic form.
    :return: The first decomposition found, or None.
    """
    _require_quartic(form)
    coefficients = form.coefficients
    for (i, k), (j, l) in form.pairs():
        first = _split_pair(coefficients[i], coefficients[k])
        second = _split_pair(coefficients[j], coefficients[l])
        if first is None or second is None:
            continue
        a, c1, c3, swapped_a = first
        b, c2, c4, swapped_b = second
        low_a, high_a = (k, i) if swapped_a else (i, k)
        low_b, high_b = (l, j) if swapped_b else (j, l)
        return Decomposition(a, b, (c1, c2, c3, c4),
                             (low_a, low_b, high_a, high_b))
    return None


def is_exceptional_pattern(form: DiagonalForm) -> bool:
    """
    :param form: A quartic form.
    :return: Whether the coefficients match the exceptional pattern.
    """
    return exceptional_decomposition(form) is not None


class ProbeReport(NamedTuple):
    """
    Which primes q <= q_max gave r_F(0, q) >= q^3.
    """
    form: DiagonalForm
    q_max: int
    checked: List[int]
    # (q, r_F(0, q)) for every prime where r_F(0, q) < q^3
    failures: List[Tuple[int, int]]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def witness(self) -> Optional[int]:
        """
        :return: The smallest prime with r_F(0, q) < q^3, if any.
        """
        return self.failures[0][0] if self.failures else None


def empirical_exceptional_probe(form: DiagonalForm, q_max: int,
                                cap: int = BRUTE_FORCE_CAP) -> ProbeReport:
    """
    Compare r_F(0, q) with q^3 at every prime q <= q_max dividing no
    coefficient.

    :param form: A quartic form.
    :param q_max: The largest prime to check; at most cap.
    :param cap: The brute-force cap.
    :return: The report.
    :raises DomainError: If q_max exceeds the cap.
    """
    _require_quartic(form)
    if q_max > cap:
        raise DomainError(f'q_max={q_max} exceeds the brute-force cap of '
                          f'{cap}')
    bad = form.bad_primes
    checked, failures = [], []
    for q in primes_in(2, q_max + 1):
        if q in bad:
            continue
        checked.append(q)
        count = count_general(form, 0, q, cap).count
        if count < q ** 3:
            failures.append((q, count))
            logger.debug('%s: r(0, %d) = %d < q^3', form, q, count)
    logger.info('Probed %s at %d primes up to %d: %d below q^3', form,
                len(checked), q_max, len(failures))
    return ProbeReport(form, q_max, checked, failures)
