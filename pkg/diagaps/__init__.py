# -*- coding: utf-8 -*-
from typing import Optional, Sequence, Union
from fractions import Fraction
import importlib.metadata

from diagaps.entities import DiagonalForm as _DiagonalForm
from diagaps.counting import CountResult as _CountResult, count_general
from diagaps.gapcraft import GapWitness, SelectionPolicy, build_witness

__title__ = 'diagaps'
__author__ = 'George Brighton'
__license__ = 'MIT'
__copyright__ = 'Copyright 2017 George Brighton'


try:
    __version__ = importlib.metadata.version(__title__)
except importlib.metadata.PackageNotFoundError:
    __version__ = 'unknown'


def form(value: Union[str, Sequence[int], _DiagonalForm]) -> _DiagonalForm:
    """
    Retrieve a diagonal form from a spec string or coefficient sequence.

    :param value: A spec such as "3:1,1,1", coefficients such as (1, 1, 1),
                  or a form, which is returned as is.
    :return: The form.
    """
    if isinstance(value, _DiagonalForm):
        return value
    if isinstance(value, str):
        return _DiagonalForm.from_spec(value)
    return _DiagonalForm.from_coefficients(value)


def count(value: Union[str, Sequence[int], _DiagonalForm], m: int,
          p: int) -> _CountResult:
    """
    Count the solutions of F(x) = m (mod p) by the best available method.

    :param value: The form, in any notation `form()` accepts.
    :param m: The residue.
    :param p: The prime.
    :return: The count.
    """
    return count_general(form(value), m, p)


def witness(value: Union[str, Sequence[int], _DiagonalForm], gap_length: int,
            limit: int, beta=Fraction(1, 2), target=None,
            max_primes: Optional[int] = None) -> GapWitness:
    """
    Build a gap witness.

    :param value: The form, in any notation `form()` accepts.
    :param gap_length: K.
    :param limit: The prime scan bound.
    :param beta: The selection threshold.
    :param target: The epsilon to reach; 1/(2K) by default.
    :param max_primes: The most primes to use.
    :return: The witness, which is flagged uncertified if the target was not
             met.
    """
    policy = SelectionPolicy(beta, limit, max_primes=max_primes)
    return build_witness(form(value), gap_length, policy, target)
