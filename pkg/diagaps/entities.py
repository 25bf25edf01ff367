# -*- coding: utf-8 -*-
import abc
import functools
import hashlib
import operator
from typing import Iterable, Sequence, Set, Tuple

import sympy

from diagaps.errors import DomainError


class DiagonalForm(metaclass=abc.ABCMeta):
    """
    Represents a diagonal form a_1 x_1^s + ... + a_s x_s^s whose number of
    variables equals its degree s.
    """

    # separates the degree from the coefficients in a form spec
    _SPEC_SEPARATOR = ':'

    def __init__(self, coefficients: Sequence[int]):
        """
        Initialise a new form.

        :param coefficients: The s positive integer coefficients.
        :raises DomainError: If there are not exactly s coefficients, or any
                             is not a positive integer.
        """
        coefficients = tuple(coefficients)
        if len(coefficients) != self.degree:
            raise DomainError(f'A degree {self.degree} form needs '
                              f'{self.degree} coefficients, got '
                              f'{len(coefficients)}')
        for a in coefficients:
            if not isinstance(a, int) or isinstance(a, bool) or a < 1:
                raise DomainError(f'Coefficients must be positive integers, '
                                  f'got {a!r}')
        self.coefficients = coefficients

    @property
    @abc.abstractmethod
    def degree(self) -> int:
        """
        :return: The degree s, which is also the number of variables.
        """
        raise NotImplementedError()

    @property
    def product(self) -> int:
        """
        :return: The product of the coefficients.
        """
        return functools.reduce(operator.mul, self.coefficients, 1)

    @property
    def bad_primes(self) -> Set[int]:
        """
        :return: The primes dividing some coefficient.
        """
        return set(sympy.factorint(self.product))

    @property
    def spec(self) -> str:
        """
        :return: The form in `<degree>:<c1>,...,<cs>` notation.
        """
        return f'{self.degree}{self._SPEC_SEPARATOR}' + \
            ','.join(str(a) for a in self.coefficients)

    @property
    def digest(self) -> str:
        """
        :return: A short stable identifier, used to key cache files.
        """
        return hashlib.sha1(self.spec.encode('ascii')).hexdigest()[:16]

    def evaluate(self, x: Sequence[int]) -> int:
        """
        :param x: A vector of s integers.
        :return: F(x), exactly.
        """
        if len(x) != self.degree:
            raise DomainError(f'Expected {self.degree} variables, got '
                              f'{len(x)}')
        return sum(a * xi ** self.degree
                   for a, xi in zip(self.coefficients, x))

    def permuted(self, order: Iterable[int]) -> 'DiagonalForm':
        """
        :param order: A permutation of range(s).
        :return: The form with coefficients reordered.
        """
        return self.from_coefficients([self.coefficients[i] for i in order])

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[int]) \
            -> 'DiagonalForm':
        """
        Create a form, choosing the subclass by the number of coefficients.

        :param coefficients: The coefficients; 3 or 4 of them.
        :return: The form.
        :raises DomainError: If the degree is unsupported.
        """
        coefficients = tuple(coefficients)
        if len(coefficients) == 3:
            return CubicForm(coefficients)
        if len(coefficients) == 4:
            return QuarticForm(coefficients)
        raise DomainError(f'Only degrees 3 and 4 are supported, got '
                          f'{len(coefficients)} coefficients')

    @classmethod
    def from_spec(cls, spec: str) -> 'DiagonalForm':
        """
        Parse a form spec such as "3:1,1,1" or "4:1,1,4,4".

        :param spec: The spec string.
        :return: The form it describes.
        :raises DomainError: If the spec is malformed or the coefficient count
                             does not match the degree.
        """
        degree_, sep, coefficients_ = spec.strip().partition(
            cls._SPEC_SEPARATOR)
        try:
            degree = int(degree_)
            coefficients = tuple(int(c) for c in coefficients_.split(','))
        except ValueError:
            raise DomainError(f'Malformed form spec {spec!r}; expected '
                              f'<degree>:<c1>,<c2>,... e.g. 3:1,1,1') \
                from None
        if not sep or degree != len(coefficients):
            raise DomainError(f'Form spec {spec!r} must list exactly its '
                              f'degree of coefficients')
        return cls.from_coefficients(coefficients)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiagonalForm) and \
            self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash(self.coefficients)

    def __str__(self) -> str:
        return f'{self.__class__.__name__}({self.spec})'

    def __repr__(self) -> str:
        return f'<{self}>'


class CubicForm(DiagonalForm):
    """
    A diagonal form in three variables of degree three.
    """

    @property
    def degree(self) -> int:
        return 3


class QuarticForm(DiagonalForm):
    """
    A diagonal form in four variables of degree four, also called a
    biquadratic form.
    """

    @property
    def degree(self) -> int:
        return 4

    def pairs(self) -> Iterable[Tuple[Tuple[int, int], Tuple[int, int]]]:
        """
        :return: The three ways of splitting the variable indices into two
                 pairs.
        """
        yield (0, 1), (2, 3)
        yield (0, 2), (1, 3)
        yield (0, 3), (1, 2)
