# -*- coding: utf-8 -*-
"""
Exact arithmetic in Z[zeta_3] and Z[i], power residue characters modulo a
prime, Gauss and Jacobi sums, and the quantities H and K that govern the
number of zeros of a diagonal form modulo p.
"""
from typing import List, NamedTuple, Optional, Sequence, Tuple
from fractions import Fraction
import functools
import itertools
import logging
import math

import numpy as np
from sympy.ntheory.residue_ntheory import sqrt_mod

from diagaps.arith import is_prime, mod_pow
from diagaps.entities import DiagonalForm
from diagaps.errors import CertificateError, DomainError

logger = logging.getLogger(__name__)

_SUPPORTED_DEGREES = (3, 4)


def _round_div(x: int, n: int) -> int:
    """
    :param x: The numerator.
    :param n: The positive denominator.
    :return: The integer nearest to x / n, rounding halves up.
    """
    return (2 * x + n) // (2 * n)


class CyclotomicInt:
    """
    An element a + b*zeta of Z[zeta_s] for s in {3, 4}, where zeta is
    exp(2 pi i / s). Instances are immutable.
    """

    __slots__ = ('s', 'a', 'b')

    def __init__(self, s: int, a: int, b: int):
        if s not in _SUPPORTED_DEGREES:
            raise DomainError(f'Only Z[zeta_3] and Z[i] are supported, got '
                              f's={s}')
        object.__setattr__(self, 's', s)
        object.__setattr__(self, 'a', int(a))
        object.__setattr__(self, 'b', int(b))

    def __setattr__(self, key, value):
        raise AttributeError(f'{self.__class__.__name__} is immutable')

    @classmethod
    def zeta_power(cls, s: int, k: int) -> 'CyclotomicInt':
        """
        :param s: The degree.
        :param k: The exponent; reduced modulo s.
        :return: zeta_s^k.
        """
        k %= s
        if s == 3:
            return cls(3, *((1, 0), (0, 1), (-1, -1))[k])
        return cls(4, *((1, 0), (0, 1), (-1, 0), (0, -1))[k])

    @classmethod
    def from_counts(cls, s: int, counts: Sequence[int]) -> 'CyclotomicInt':
        """
        Collapse a multiset of roots of unity into a single element.

        :param s: The degree.
        :param counts: counts[k] is the multiplicity of zeta_s^k.
        :return: The sum of counts[k] * zeta_s^k.
        """
        total = cls(s, 0, 0)
        for k, count in enumerate(counts):
            total += cls.zeta_power(s, k) * int(count)
        return total

    @classmethod
    def units(cls, s: int) -> List['CyclotomicInt']:
        """
        :param s: The degree.
        :return: All units of the ring: the sixth roots of unity for s = 3,
                 the fourth roots for s = 4.
        """
        powers = [cls.zeta_power(s, k) for k in range(s)]
        if s == 3:
            return powers + [-u for u in powers]
        return powers

    def _coerce(self, other) -> 'CyclotomicInt':
        if isinstance(other, CyclotomicInt):
            if other.s != self.s:
                raise DomainError(f'Cannot combine elements of Z[zeta_'
                                  f'{self.s}] and Z[zeta_{other.s}]')
            return other
        if isinstance(other, (int, np.integer)):
            return CyclotomicInt(self.s, int(other), 0)
        return NotImplemented

    def __add__(self, other) -> 'CyclotomicInt':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicInt(self.s, self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self) -> 'CyclotomicInt':
        return CyclotomicInt(self.s, -self.a, -self.b)

    def __sub__(self, other) -> 'CyclotomicInt':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + -other

    def __rsub__(self, other) -> 'CyclotomicInt':
        return -self + other

    def __mul__(self, other) -> 'CyclotomicInt':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.a, self.b, other.a, other.b
        if self.s == 3:
            # zeta^2 = -1 - zeta
            return CyclotomicInt(3, a * c - b * d, a * d + b * c - b * d)
        return CyclotomicInt(4, a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> 'CyclotomicInt':
        if n < 0:
            raise DomainError('Negative powers are not ring elements')
        result = CyclotomicInt(self.s, 1, 0)
        base = self
        while n:
            if n & 1:
                result *= base
            base *= base
            n >>= 1
        return result

    def conjugate(self) -> 'CyclotomicInt':
        """
        :return: The complex conjugate, which is again a ring element.
        """
        if self.s == 3:
            return CyclotomicInt(3, self.a - self.b, -self.b)
        return CyclotomicInt(4, self.a, -self.b)

    def norm(self) -> int:
        """
        :return: The field norm, i.e. the squared complex modulus.
        """
        a, b = self.a, self.b
        if self.s == 3:
            return a * a - a * b + b * b
        return a * a + b * b

    def trace(self) -> int:
        """
        :return: The element plus its conjugate, i.e. twice the real part.
        """
        if self.s == 3:
            return 2 * self.a - self.b
        return 2 * self.a

    @property
    def real(self) -> Fraction:
        """
        :return: The exact real part.
        """
        return Fraction(self.trace(), 2)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def to_complex(self) -> complex:
        """
        :return: The element embedded in the complex plane with zeta mapped
                 to exp(2 pi i / s).
        """
        if self.s == 3:
            return complex(self.a - self.b / 2, self.b * math.sqrt(3) / 2)
        return complex(self.a, self.b)

    def __divmod__(self, other) -> Tuple['CyclotomicInt', 'CyclotomicInt']:
        """
        Divide with remainder, rounding the exact quotient coordinate-wise to
        the nearest lattice point. The remainder then has norm strictly below
        the divisor's in both rings, so Euclid's algorithm terminates.
        """
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError('Division by zero in cyclotomic ring')
        numerator = self * other.conjugate()
        quotient = CyclotomicInt(self.s, _round_div(numerator.a, n),
                                 _round_div(numerator.b, n))
        return quotient, self - quotient * other

    def __floordiv__(self, other) -> 'CyclotomicInt':
        return divmod(self, other)[0]

    def __mod__(self, other) -> 'CyclotomicInt':
        return divmod(self, other)[1]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, np.integer)):
            return self.b == 0 and self.a == other
        return isinstance(other, CyclotomicInt) and \
            (self.s, self.a, self.b) == (other.s, other.a, other.b)

    def __hash__(self) -> int:
        return hash((self.s, self.a, self.b))

    def __str__(self) -> str:
        symbol = 'w' if self.s == 3 else 'i'
        return f'{self.a}{self.b:+d}{symbol}'

    def __repr__(self) -> str:
        return f'<CyclotomicInt(s={self.s}, {self})>'


def gcd(x: CyclotomicInt, y: CyclotomicInt) -> CyclotomicInt:
    """
    Compute a greatest common divisor by Euclid's algorithm. The result is
    only defined up to a unit.

    :param x: The first element.
    :param y: The second element.
    :return: A generator of the ideal (x, y).
    """
    while not y.is_zero():
        x, y = y, x % y
    return x


class PrimeCharContext:
    """
    A prime p = 1 (mod s) together with the canonical root of x^2 + x + 1
    (s = 3) or x^2 + 1 (s = 4) modulo p. The root fixes the prime of Z[zeta_s]
    above p, and with it the power residue character chi_{s,p}.
    """

    def __init__(self, s: int, p: int, root: int):
        """
        Initialise a new context. Use `make_context()` rather than calling
        this directly, as it validates its arguments and picks the root.

        :param s: The degree.
        :param p: The prime.
        :param root: An integer in (0, p) mapping to zeta_s modulo p.
        """
        self.s = s
        self.p = p
        self.root = root
        self.exponent = (p - 1) // s
        # maps the residue of zeta^k to k
        self._logs = {pow(root, k, p): k for k in range(s)}

    def log(self, value: int) -> int:
        """
        :param value: An s-th root of unity modulo p.
        :return: The k such that root^k = value (mod p).
        :raises CertificateError: If value is not an s-th root of unity.
        """
        try:
            return self._logs[value]
        except KeyError:
            raise CertificateError(f'{value} is not an order-{self.s} root of '
                                   f'unity modulo {self.p}') from None

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeCharContext) and \
            (self.s, self.p, self.root) == (other.s, other.p, other.root)

    def __hash__(self) -> int:
        return hash((self.s, self.p, self.root))

    def __str__(self) -> str:
        return f'PrimeCharContext(s={self.s}, p={self.p}, root={self.root})'

    def __repr__(self) -> str:
        return f'<{self}>'


def _polynomial_roots(s: int, p: int) -> List[int]:
    """
    :param s: The degree.
    :param p: A prime congruent to 1 modulo s.
    :return: The roots of x^2 + x + 1 (s = 3) or x^2 + 1 (s = 4) modulo p,
             ascending.
    """
    if s == 3:
        half = (p + 1) // 2
        return sorted(int(t - 1) * half % p
                      for t in sqrt_mod(-3 % p, p, all_roots=True))
    return sorted(int(t) for t in sqrt_mod(p - 1, p, all_roots=True))


@functools.lru_cache(maxsize=4096)
def make_context(s: int, p: int) -> PrimeCharContext:
    """
    Build the canonical character context for a prime.

    :param s: The degree, 3 or 4.
    :param p: A prime congruent to 1 modulo s.
    :return: The context using the smallest positive root.
    :raises DomainError: If s is unsupported, p is not prime, or p is in the
                         wrong residue class.
    """
    if s not in _SUPPORTED_DEGREES:
        raise DomainError(f'Only degrees 3 and 4 are supported, got {s}')
    if not is_prime(p):
        raise DomainError(f'{p} is not prime')
    if p % s != 1:
        raise DomainError(f'{p} is not congruent to 1 modulo {s}, so '
                          f'chi_{s},{p} is not defined')
    return PrimeCharContext(s, p, _polynomial_roots(s, p)[0])


def chi(ctx: PrimeCharContext, a: int) -> Optional[int]:
    """
    Evaluate the power residue character.

    :param ctx: The character context.
    :param a: Any integer.
    :return: None if p divides a, otherwise the k in Z/s with
             chi(a) = zeta_s^k.
    """
    if a % ctx.p == 0:
        return None
    return ctx.log(mod_pow(a, ctx.exponent, ctx.p))


def character_table(ctx: PrimeCharContext) -> np.ndarray:
    """
    Evaluate the character at every residue at once by vectorised modular
    exponentiation. Only valid while p^2 fits in an int64.

    :param ctx: The character context.
    :return: An array of length p whose entry t is the exponent of chi(t),
             or -1 for t = 0.
    """
    p = ctx.p
    base = np.arange(p, dtype=np.int64)
    values = np.ones(p, dtype=np.int64)
    e = ctx.exponent
    while e:
        if e & 1:
            values = values * base % p
        base = base * base % p
        e >>= 1
    table = np.full(p, -1, dtype=np.int64)
    for k in range(ctx.s):
        table[values == pow(ctx.root, k, p)] = k
    table[0] = -1
    return table


def _check_exponent(ctx: PrimeCharContext, e: int) -> int:
    e %= ctx.s
    if e == 0:
        raise DomainError('The trivial character is not allowed here')
    return e


def jacobi_sum(ctx: PrimeCharContext, e1: int, e2: int) -> CyclotomicInt:
    """
    Compute J(chi^e1, chi^e2) = sum over t1 + t2 = 1 of chi^e1(t1) chi^e2(t2)
    by direct summation in O(p).

    :param ctx: The character context.
    :param e1: The first exponent; must be nonzero modulo s.
    :param e2: The second exponent; must be nonzero modulo s.
    :return: The exact sum.
    :raises DomainError: If either character is trivial.
    """
    e1, e2 = _check_exponent(ctx, e1), _check_exponent(ctx, e2)
    p, s = ctx.p, ctx.s
    table = character_table(ctx)
    # t = 0 and t = 1 make one of the factors vanish
    t = np.arange(2, p, dtype=np.int64)
    exponents = (e1 * table[t] + e2 * table[(1 - t) % p]) % s
    return CyclotomicInt.from_counts(s, np.bincount(exponents, minlength=s))


def _cyclic_convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    p = len(x)
    full = np.convolve(x, y)
    out = full[:p].copy()
    out[:p - 1] += full[p:]
    return out


def j0_sum(ctx: PrimeCharContext, exps: Sequence[int]) -> CyclotomicInt:
    """
    Compute J0(chi^e1, ..., chi^el), the sum of the character products over
    all tuples whose coordinates sum to 0 modulo p.

    The sum is evaluated exactly in the group ring: each character becomes an
    s-by-p table of root-of-unity multiplicities, and the tables are
    cyclically convolved over Z/p, costing O(s^2 l p^2) rather than
    enumerating p^(l-1) tuples.

    :param ctx: The character context.
    :param exps: At least two exponents, all nonzero modulo s, summing to 0
                 modulo s.
    :return: The exact sum.
    :raises DomainError: If an exponent is trivial, there are fewer than two,
                         or their sum is nonzero modulo s.
    """
    s, p = ctx.s, ctx.p
    exps = [_check_exponent(ctx, e) for e in exps]
    if len(exps) < 2:
        raise DomainError('J0 needs at least two characters')
    if sum(exps) % s:
        raise DomainError(f'J0 needs exponents summing to 0 modulo {s}, got '
                          f'{exps}')
    table = character_table(ctx)
    nonzero = table >= 0

    def layer(e: int) -> np.ndarray:
        rows = np.zeros((s, p), dtype=np.int64)
        rows[(e * table[nonzero]) % s, np.flatnonzero(nonzero)] = 1
        return rows

    acc = layer(exps[0])
    for e in exps[1:]:
        nxt = layer(e)
        out = np.zeros((s, p), dtype=np.int64)
        for k1, k2 in itertools.product(range(s), repeat=2):
            out[(k1 + k2) % s] += _cyclic_convolve(acc[k1], nxt[k2])
        acc = out
    return CyclotomicInt.from_counts(s, acc[:, 0])


def gauss_sum(ctx: PrimeCharContext, e: int) -> complex:
    """
    Compute G(chi^e) = sum over t of chi^e(t) exp(2 pi i t / p) in floating
    point. Only used to cross-check exact identities.

    :param ctx: The character context.
    :param e: The exponent; must be nonzero modulo s.
    :return: The Gauss sum.
    """
    e = _check_exponent(ctx, e)
    p, s = ctx.p, ctx.s
    table = character_table(ctx)
    t = np.arange(1, p)
    phases = 2j * np.pi * (e * table[t] / s + t / p)
    return complex(np.exp(phases).sum())


def _is_primary(x: CyclotomicInt) -> bool:
    if x.s == 3:
        return x.a % 3 == 2 and x.b % 3 == 0
    return (x.a % 4, x.b % 4) in ((1, 0), (3, 2))


@functools.lru_cache(maxsize=65536)
def _primary_generator(s: int, p: int, root: int) -> CyclotomicInt:
    generator = gcd(CyclotomicInt(s, p, 0), CyclotomicInt(s, -root, 1))
    if generator.norm() != p:
        raise CertificateError(f'gcd({p}, zeta - {root}) has norm '
                               f'{generator.norm()}, expected {p}')
    for unit in CyclotomicInt.units(s):
        candidate = generator * unit
        if _is_primary(candidate):
            return candidate
    raise CertificateError(f'No primary associate of {generator} found')


def pi_element(ctx: PrimeCharContext) -> CyclotomicInt:
    """
    Compute pi_{s,p} = J(chi, chi) in O(log p) rather than O(p).

    The prime of Z[zeta_s] above p fixed by the context is generated by
    gcd(p, zeta - root). Its primary associate pi (pi = 2 mod 3, respectively
    pi = 1 mod 2 + 2i) satisfies J(chi, chi) = pi for s = 3 and
    J(chi, chi) = -chi(-1) pi for s = 4.

    :param ctx: The character context.
    :return: J(chi, chi), exactly.
    """
    pi = _primary_generator(ctx.s, ctx.p, ctx.root)
    if ctx.s == 4 and chi(ctx, -1) == 0:
        return -pi
    return pi


def _h_element(form: DiagonalForm, ctx: PrimeCharContext) -> CyclotomicInt:
    if form.degree != ctx.s:
        raise DomainError(f'{form} does not match a degree {ctx.s} context')
    k = chi(ctx, form.product)
    if k is None:
        raise DomainError(f'{ctx.p} divides a coefficient of {form}')
    return CyclotomicInt.zeta_power(ctx.s, -k) * \
        pi_element(ctx) ** (ctx.s - 2)


def h_trace(form: DiagonalForm, ctx: PrimeCharContext) -> int:
    """
    :param form: The form.
    :param ctx: A context of the form's degree.
    :return: The integer 2 Re(conj(chi)(a_1 ... a_s) pi^(s-2)), from which
             Re H is obtained by dividing by 2 sqrt(p) (s = 3) or 2q (s = 4).
    :raises DomainError: If p divides a coefficient.
    """
    return _h_element(form, ctx).trace()


def h_term(form: DiagonalForm, ctx: PrimeCharContext) -> complex:
    """
    Compute H = conj(chi)(a_1 a_2 a_3) pi / sqrt(p) for cubic forms, or
    conj(chi)(a_1 ... a_4) pi^2 / q for quartic ones. Only the real part and
    modulus are independent of the choice of prime above p.

    :param form: The form.
    :param ctx: A context of the form's degree.
    :return: H as a complex number of modulus 1.
    :raises DomainError: If p divides a coefficient.
    """
    scale = math.sqrt(ctx.p) if ctx.s == 3 else ctx.p
    return _h_element(form, ctx).to_complex() / scale


class TupleClass(NamedTuple):
    """
    One of the eight equivalence classes of quadruples of fourth roots of
    unity, with the (b, c) values it contributes to the K term.
    """
    index: int
    b: int
    c: int

    @property
    def name(self) -> str:
        return f'U{self.index}'

    def k(self, chi_minus_one: int) -> int:
        """
        :param chi_minus_one: The value of chi(-1), either 1 or -1.
        :return: b + chi(-1) c.
        """
        return self.b + chi_minus_one * self.c


# representatives as exponents of i, with their (b, c) rows
_REPRESENTATIVES = {
    1: ((0, 0, 0, 0), 7, 12),
    2: ((0, 0, 0, 2), -5, 0),
    3: ((0, 0, 0, 1), -1, -6),
    4: ((0, 0, 2, 2), 7, -4),
    5: ((0, 0, 2, 1), -1, 2),
    6: ((0, 0, 1, 1), 3, 4),
    7: ((0, 0, 1, 3), -1, 0),
    8: ((0, 2, 1, 3), 3, -4),
}


def canonical_tuple(exps: Sequence[int]) -> Tuple[int, ...]:
    """
    :param exps: Four exponents of i.
    :return: The smallest sorted tuple reachable by permuting, multiplying
             every entry by a common fourth root of unity, and conjugating.
    """
    return min(tuple(sorted((sign * e + shift) % 4 for e in exps))
               for sign in (1, -1) for shift in range(4))


TUPLE_CLASSES = {index: TupleClass(index, b, c)
                 for index, (_, b, c) in _REPRESENTATIVES.items()}
_CLASS_BY_CANONICAL = {canonical_tuple(rep): TUPLE_CLASSES[index]
                       for index, (rep, _, _) in _REPRESENTATIVES.items()}


def representative(cls: TupleClass) -> Tuple[int, ...]:
    """
    :param cls: A tuple class.
    :return: Its representative quadruple, as exponents of i.
    """
    return _REPRESENTATIVES[cls.index][0]


def classify_tuple(exps: Sequence[int]) -> TupleClass:
    """
    :param exps: Four exponents of i, i.e. (chi(a_1), ..., chi(a_4)) in
                 logarithmic form.
    :return: The class of the quadruple.
    :raises DomainError: If there are not four exponents.
    """
    if len(exps) != 4:
        raise DomainError(f'Expected four exponents, got {len(exps)}')
    return _CLASS_BY_CANONICAL[canonical_tuple(exps)]


def _i_power_sum(exponents: Sequence[int]) -> Tuple[int, int]:
    counts = [0] * 4
    for e in exponents:
        counts[e % 4] += 1
    return counts[0] - counts[2], counts[1] - counts[3]


def table_row_from_sums(exps: Sequence[int]) -> Tuple[int, int]:
    """
    Recompute (b, c) for a quadruple from their defining sums over S_4:

        b = chi^2(a1 a2 a3 a4) + 1/4 sum chi(a_s1 a_s2) chi^3(a_s3 a_s4)
        c = 1/2 sum chi^2(a_s1) chi^2(a_s2) chi(a_s3) chi^3(a_s4)

    :param exps: Four exponents of i.
    :return: The pair (b, c).
    :raises CertificateError: If either sum fails to be a real integer.
    """
    b_terms = [2 * sum(exps)]
    c_terms = []
    for e1, e2, e3, e4 in itertools.permutations(exps):
        b_terms.append(e1 + e2 + 3 * (e3 + e4))
        c_terms.append(2 * e1 + 2 * e2 + e3 + 3 * e4)

    head_re, head_im = _i_power_sum(b_terms[:1])
    sum_re, sum_im = _i_power_sum(b_terms[1:])
    c_re, c_im = _i_power_sum(c_terms)
    b = Fraction(head_re) + Fraction(sum_re, 4)
    c = Fraction(c_re, 2)
    if head_im or sum_im or c_im or b.denominator != 1 or \
            c.denominator != 1:
        raise CertificateError(f'Sums for {tuple(exps)} are not real '
                               f'integers')
    return int(b), int(c)


def character_exponents(form: DiagonalForm, ctx: PrimeCharContext) \
        -> List[int]:
    """
    :param form: The form.
    :param ctx: A context of any degree.
    :return: The exponents of chi at each coefficient.
    :raises DomainError: If p divides a coefficient.
    """
    exps = [chi(ctx, a) for a in form.coefficients]
    if None in exps:
        raise DomainError(f'{ctx.p} divides a coefficient of {form}')
    return exps


def chi_minus_one(ctx: PrimeCharContext) -> int:
    """
    :param ctx: The character context.
    :return: chi(-1) as the integer 1 or -1.
    """
    return 1 if chi(ctx, -1) == 0 else -1


def tuple_class_at(form: DiagonalForm, ctx: PrimeCharContext) \
        -> Tuple[TupleClass, int]:
    """
    :param form: A quartic form.
    :param ctx: A quartic context.
    :return: The class of (chi(a_1), ..., chi(a_4)) and chi(-1).
    """
    if ctx.s != 4 or form.degree != 4:
        raise DomainError('Tuple classes are only defined for quartic forms')
    return classify_tuple(character_exponents(form, ctx)), chi_minus_one(ctx)


def k_term(form: DiagonalForm, ctx: PrimeCharContext) -> int:
    """
    Compute K = b + chi(-1) c for a quartic form.

    :param form: A quartic form.
    :param ctx: A context with s = 4.
    :return: An integer in [-7, 19].
    :raises DomainError: If q divides a coefficient or the degrees are wrong.
    """
    cls, sign = tuple_class_at(form, ctx)
    k = cls.k(sign)
    logger.debug('K term of %s at %d: class %s, chi(-1)=%d, K=%d', form,
                 ctx.p, cls.name, sign, k)
    return k

