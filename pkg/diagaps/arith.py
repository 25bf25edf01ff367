# -*- coding: utf-8 -*-
"""
Deterministic integer primitives: primality, prime ranges, modular powers,
exact integer roots and the Chinese remainder theorem.
"""
from typing import List, Iterable, Tuple
import math

import gmpy2
import numpy as np

from diagaps.errors import DomainError

# Miller-Rabin with these bases is exact for every n < 3.3 * 10^24, which
# covers the 64-bit range
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MAX_PRIMALITY_INPUT = 2 ** 64


def is_prime(n: int) -> bool:
    """
    Decide primality of a 64-bit integer exactly.

    :param n: The integer to test.
    :return: True iff n is prime.
    :raises DomainError: If n does not fit in 64 bits.
    """
    if n >= _MAX_PRIMALITY_INPUT:
        raise DomainError(f'{n} exceeds the 64-bit primality range')
    if n < 2:
        return False
    for p in _WITNESSES:
        if n % p == 0:
            return n == p

    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1

    for a in _WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _sieve(n: int) -> np.ndarray:
    """
    Sieve of Eratosthenes.

    :param n: The inclusive upper bound.
    :return: The primes up to and including n, as an int64 array.
    """
    if n < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_in(lo: int, hi: int) -> List[int]:
    """
    List the primes in [lo, hi) with a segmented sieve, so only the segment
    and the base primes up to sqrt(hi) are held in memory.

    :param lo: The inclusive lower bound.
    :param hi: The exclusive upper bound.
    :return: The primes in the range, ascending.
    :raises DomainError: If lo > hi.
    """
    if lo > hi:
        raise DomainError(f'Empty prime range [{lo}, {hi}) is reversed')
    lo = max(lo, 2)
    if hi <= lo:
        return []
    segment = np.ones(hi - lo, dtype=bool)
    for p in _sieve(math.isqrt(hi - 1)).tolist():
        start = max(p * p, -(-lo // p) * p)
        segment[start - lo::p] = False
    return (np.flatnonzero(segment) + lo).tolist()


def mod_pow(a: int, e: int, p: int) -> int:
    """
    :param a: The base; may be negative.
    :param e: The nonnegative exponent.
    :param p: The positive modulus.
    :return: a^e reduced into [0, p).
    :raises DomainError: If e is negative or p is not positive.
    """
    if p < 1 or e < 0:
        raise DomainError(f'mod_pow needs e >= 0 and p >= 1, got e={e}, '
                          f'p={p}')
    return pow(a, e, p)


def int_root(n: int, s: int) -> int:
    """
    Compute the floor of the real s-th root of a natural number.

    :param n: The radicand.
    :param s: The root degree.
    :return: The unique r with r^s <= n < (r + 1)^s.
    :raises DomainError: If n is negative or s is not positive.
    """
    if n < 0 or s < 1:
        raise DomainError(f'int_root needs n >= 0 and s >= 1, got n={n}, '
                          f's={s}')
    root = int(gmpy2.iroot(gmpy2.mpz(n), s)[0])
    while root ** s > n:
        root -= 1
    while (root + 1) ** s <= n:
        root += 1
    return root


def isqrt_ceil(n: int) -> int:
    """
    :param n: A natural number.
    :return: The smallest r with r^2 >= n.
    """
    if n <= 0:
        return 0
    return math.isqrt(n - 1) + 1


def is_power(n: int, s: int) -> bool:
    """
    :param n: A natural number.
    :param s: The exponent.
    :return: Whether n is a perfect s-th power.
    """
    return n >= 0 and int_root(n, s) ** s == n


def crt(system: Iterable[Tuple[int, int]]) -> Tuple[int, int]:
    """
    Solve a system of simultaneous congruences.

    :param system: Pairs of (residue, modulus). Moduli must be positive and
                   pairwise coprime, and each residue must lie in
                   [0, modulus).
    :return: The pair (m, M) where M is the product of the moduli and m is
             the unique solution in [0, M).
    :raises DomainError: If a modulus is not positive, a residue is out of
                         range, or two moduli share a factor.
    """
    m, modulus = gmpy2.mpz(0), gmpy2.mpz(1)
    for residue, mod in system:
        if mod < 1:
            raise DomainError(f'CRT modulus must be positive, got {mod}')
        if not 0 <= residue < mod:
            raise DomainError(f'CRT residue {residue} is not reduced modulo '
                              f'{mod}')
        if gmpy2.gcd(modulus, mod) != 1:
            raise DomainError(f'CRT modulus {mod} shares a factor with the '
                              f'product of the preceding moduli')
        if mod == 1:
            continue
        t = (residue - m) * gmpy2.invert(modulus, mod) % mod
        m += modulus * t
        modulus *= mod
    return int(m), int(modulus)
