# -*- coding: utf-8 -*-
"""
Exact counts r_F(m, M) of solutions of F(x) = m (mod M), by brute force
and by closed formula, extended multiplicatively to squarefree moduli.
"""
from typing import Iterable, NamedTuple, Optional, Tuple
from fractions import Fraction
import functools
import itertools
import logging

import numpy as np

from diagaps import cyclotomic
from diagaps.arith import is_prime, isqrt_ceil, mod_pow
from diagaps.cyclotomic import CyclotomicInt, make_context
from diagaps.entities import DiagonalForm
from diagaps.errors import CertificateError, DomainError

logger = logging.getLogger(__name__)

# primes above this are never enumerated
BRUTE_FORCE_CAP = 5_000


class CountResult:
    """
    The number of solutions of a congruence, or an interval containing it
    when no exact method applies.
    """

    BRUTE = 'brute'
    FORMULA = 'formula'
    MULTIPLICATIVE = 'multiplicative'
    WEIL = 'weil'

    def __init__(self, degree: int, modulus: int, method: str,
                 count: Optional[int] = None, lower: Optional[int] = None,
                 upper: Optional[int] = None):
        """
        Initialise a new count result.

        :param degree: The degree s of the form counted.
        :param modulus: The modulus M of the congruence.
        :param method: How the count was obtained; one of the class
                       constants.
        :param count: The exact count, if known.
        :param lower: The lower end of the interval; defaults to count.
        :param upper: The upper end of the interval; defaults to count.
        """
        self.degree = degree
        self.modulus = modulus
        self.method = method
        self.count = count
        self.lower = count if lower is None else lower
        self.upper = count if upper is None else upper

    @property
    def exact(self) -> bool:
        return self.count is not None

    @property
    def scale(self) -> int:
        """
        :return: M^(s-1), the expected count.
        """
        return self.modulus ** (self.degree - 1)

    @property
    def ratio(self) -> Fraction:
        """
        :return: count / M^(s-1), in lowest terms.
        :raises DomainError: If the count is not exact.
        """
        if not self.exact:
            raise DomainError(f'Count modulo {self.modulus} is only known to '
                              f'lie in [{self.lower}, {self.upper}]')
        return Fraction(self.count, self.scale)

    @property
    def upper_ratio(self) -> Fraction:
        """
        :return: upper / M^(s-1); equal to the ratio for exact counts.
        """
        return Fraction(self.upper, self.scale)

    def __str__(self) -> str:
        if self.exact:
            return f'{self.count} ({self.method}, M={self.modulus})'
        return f'[{self.lower}, {self.upper}] ({self.method}, ' \
               f'M={self.modulus})'

    def __repr__(self) -> str:
        return f'<CountResult {self}>'


def _power_histogram(a: int, s: int, modulus: int) -> np.ndarray:
    x = np.arange(modulus, dtype=np.int64)
    values = np.ones(modulus, dtype=np.int64)
    for _ in range(s):
        values = values * x % modulus
    values = values * (a % modulus) % modulus
    return np.bincount(values, minlength=modulus)


def _cyclic_convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    modulus = len(x)
    full = np.convolve(x, y)
    out = full[:modulus].copy()
    out[:modulus - 1] += full[modulus:]
    return out


@functools.lru_cache(maxsize=256)
def _distribution(coefficients: Tuple[int, ...], modulus: int) \
        -> np.ndarray:
    s = len(coefficients)
    histograms = [_power_histogram(a, s, modulus) for a in coefficients]
    result = functools.reduce(_cyclic_convolve, histograms)
    result.setflags(write=False)
    return result


def value_distribution(form: DiagonalForm, modulus: int) -> np.ndarray:
    """
    Count the solutions of F(x) = m (mod M) for every m at once, by building
    the histogram of a_i x^s for each variable and convolving them cyclically
    over Z/M. Costs O(s M^2) rather than O(M^s).

    :param form: The form.
    :param modulus: Any positive modulus M.
    :return: A read-only int64 array of length M whose entry m is r_F(m, M).
    :raises DomainError: If the modulus is not positive.
    """
    if modulus < 1:
        raise DomainError(f'Modulus must be positive, got {modulus}')
    return _distribution(form.coefficients, modulus)


def count_brute(form: DiagonalForm, m: int, p: int,
                cap: int = BRUTE_FORCE_CAP) -> CountResult:
    """
    Count solutions modulo a prime by convolving power histograms.

    :param form: The form.
    :param m: The residue.
    :param p: A prime no larger than cap.
    :param cap: The largest prime that may be enumerated.
    :return: The exact count.
    :raises DomainError: If p is not prime or exceeds the cap.
    """
    if not is_prime(p):
        raise DomainError(f'{p} is not prime')
    if p > cap:
        raise DomainError(f'{p} exceeds the brute-force cap of {cap}; use '
                          f'count_zero_formula or count_general')
    count = int(value_distribution(form, p)[m % p])
    return CountResult(form.degree, p, CountResult.BRUTE, count)


def _formula_applies(form: DiagonalForm, p: int) -> bool:
    return form.product % p != 0 and form.degree % p != 0


def quadratic_character(a: int, p: int) -> int:
    """
    :param a: An integer not divisible by p.
    :param p: An odd prime.
    :return: The Legendre symbol (a / p), by Euler's criterion.
    """
    return 1 if mod_pow(a, (p - 1) // 2, p) == 1 else -1


def count_zero_formula(form: DiagonalForm, p: int) -> CountResult:
    """
    Count solutions of F(x) = 0 (mod p) in closed form:

    - cubic, p = 2 (mod 3): cubing is a bijection, so p^2;
    - cubic, p = 1 (mod 3): p^2 + (p - 1) 2Re(conj(chi)(a1 a2 a3) pi);
    - quartic, q = 3 (mod 4): q^3 + (a1 a2 a3 a4 / q) q (q - 1);
    - quartic, q = 1 (mod 4): q^3 + q (q - 1) K + (q - 1) 2Re(conj(chi)(a1
      a2 a3 a4) pi^2).

    :param form: The form.
    :param p: A prime dividing neither s nor any coefficient.
    :return: The exact count.
    :raises DomainError: If p is not prime, or the formula does not apply.
    """
    if not is_prime(p):
        raise DomainError(f'{p} is not prime')
    if not _formula_applies(form, p):
        raise DomainError(f'{p} divides the degree or a coefficient of '
                          f'{form}; the closed formula is invalid there')

    s = form.degree
    if s == 3:
        if p % 3 == 2:
            count = p ** 2
        else:
            ctx = make_context(3, p)
            count = p ** 2 + (p - 1) * cyclotomic.h_trace(form, ctx)
    elif p % 4 == 3:
        count = p ** 3 + quadratic_character(form.product, p) * p * (p - 1)
    else:
        ctx = make_context(4, p)
        count = p ** 3 + p * (p - 1) * cyclotomic.k_term(form, ctx) + \
            (p - 1) * cyclotomic.h_trace(form, ctx)
    logger.debug('r(0, %d) = %d for %s by formula', p, count, form)
    return CountResult(s, p, CountResult.FORMULA, count)


def count_cubic_formula(form: DiagonalForm, m: int, p: int) -> CountResult:
    """
    Count solutions of a cubic F(x) = m (mod p) with m nonzero in closed form,
    through the three-character Jacobi sums J(chi, chi, chi) = -pi and
    J(chi^e1, chi^e2, chi^e3) = p for mixed exponents:

        r = p^2 - 2Re(conj(chi)(a1 a2 a3) pi)
            + p * sum over mixed e of chi^(e1+e2+e3)(m) prod conj(chi)^ei(ai)

    :param form: A cubic form.
    :param m: A residue not divisible by p.
    :param p: A prime congruent to 1 modulo 3 dividing no coefficient.
    :return: The exact count.
    :raises DomainError: If any precondition fails.
    """
    if form.degree != 3:
        raise DomainError(f'{form} is not cubic')
    if m % p == 0:
        raise DomainError('Use count_zero_formula for m = 0')
    ctx = make_context(3, p)
    exps = cyclotomic.character_exponents(form, ctx)
    km = cyclotomic.chi(ctx, m)

    mixed = CyclotomicInt(3, 0, 0)
    for e in itertools.product((1, 2), repeat=3):
        if len(set(e)) == 1:
            continue
        k = sum(e) * km - sum(ei * ki for ei, ki in zip(e, exps))
        mixed += CyclotomicInt.zeta_power(3, k)
    # the mixed terms pair up with their conjugates
    if mixed.b:
        raise CertificateError(f'Mixed Jacobi terms {mixed} are not real')

    count = p ** 2 - cyclotomic.h_trace(form, ctx) + p * mixed.a
    return CountResult(3, p, CountResult.FORMULA, count)


def weil_interval(s: int, p: int) -> Tuple[int, int]:
    """
    :param s: The degree.
    :param p: The prime.
    :return: Integer bounds containing p^(s-1) -/+ (s-1)^s p^((s-1)/2),
             widened outwards to integers when the bound is irrational.
    """
    # (s-1)^s p^((s-1)/2) = sqrt((s-1)^(2s) p^(s-1))
    bound = isqrt_ceil((s - 1) ** (2 * s) * p ** (s - 1))
    centre = p ** (s - 1)
    return max(0, centre - bound), centre + bound


def count_general(form: DiagonalForm, m: int, p: int,
                  cap: int = BRUTE_FORCE_CAP) -> CountResult:
    """
    Count solutions modulo a prime by the best available method: the zero
    formula when m = 0 and it applies, brute force up to the cap, and
    otherwise the Weil interval.

    :param form: The form.
    :param m: The residue.
    :param p: The prime.
    :param cap: The brute-force cap.
    :return: An exact count, or an interval if none is available.
    :raises DomainError: If p is not prime, or p divides a coefficient above
                         the cap, where neither method applies.
    """
    if not is_prime(p):
        raise DomainError(f'{p} is not prime')
    if m % p == 0 and _formula_applies(form, p):
        return count_zero_formula(form, p)
    if p <= cap:
        return count_brute(form, m, p, cap)
    if form.product % p == 0:
        raise DomainError(f'{p} divides a coefficient of {form} and exceeds '
                          f'the brute-force cap')
    lower, upper = weil_interval(form.degree, p)
    return CountResult(form.degree, p, CountResult.WEIL, lower=lower,
                       upper=upper)


def count_squarefree(form: DiagonalForm, m: int, primes: Iterable[int],
                     cap: int = BRUTE_FORCE_CAP) -> CountResult:
    """
    Count solutions modulo a squarefree M as the product of the counts modulo
    its prime factors.

    :param form: The form.
    :param m: The residue modulo M.
    :param primes: The distinct primes whose product is M.
    :param cap: The brute-force cap.
    :return: The exact count modulo M.
    :raises DomainError: If a prime repeats or some factor has no exact
                         count.
    """
    primes = list(primes)
    if len(set(primes)) != len(primes):
        raise DomainError(f'Duplicate primes in {primes}')
    count, modulus = 1, 1
    for p in primes:
        result = count_general(form, m, p, cap)
        if not result.exact:
            raise DomainError(f'No exact count of {form} at m={m % p} modulo '
                              f'{p}')
        count *= result.count
        modulus *= p
    return CountResult(form.degree, modulus, CountResult.MULTIPLICATIVE,
                       count)


class WeilReport(NamedTuple):
    """
    The largest deviation of r_F(m, p) from p^(s-1) over nonzero m.
    """
    p: int
    max_deviation: int
    worst_residue: Optional[int]
    bound: float
    passed: bool


def weil_check(form: DiagonalForm, p: int,
               cap: int = BRUTE_FORCE_CAP) -> WeilReport:
    """
    Verify |r_F(m, p) - p^(s-1)| <= (s-1)^s p^((s-1)/2) for every nonzero m.

    :param form: The form.
    :param p: A prime dividing no coefficient, no larger than cap.
    :param cap: The brute-force cap.
    :return: The report.
    :raises DomainError: If p divides a coefficient or exceeds the cap.
    """
    if form.product % p == 0:
        raise DomainError(f'{p} divides a coefficient of {form}')
    if p > cap:
        raise DomainError(f'{p} exceeds the brute-force cap of {cap}')
    s = form.degree
    distribution = value_distribution(form, p)
    deviations = np.abs(distribution[1:] - p ** (s - 1))
    if len(deviations):
        worst = int(np.argmax(deviations))
        max_deviation, worst_residue = int(deviations[worst]), worst + 1
    else:
        max_deviation, worst_residue = 0, None
    passed = max_deviation ** 2 <= (s - 1) ** (2 * s) * p ** (s - 1)
    return WeilReport(p, max_deviation, worst_residue,
                      (s - 1) ** s * p ** ((s - 1) / 2), passed)
