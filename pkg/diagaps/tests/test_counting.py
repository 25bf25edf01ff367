# -*- coding: utf-8 -*-
from fractions import Fraction
import itertools
import unittest

import sympy

from diagaps import counting
from diagaps.counting import CountResult
from diagaps.entities import CubicForm, DiagonalForm, QuarticForm
from diagaps.errors import DomainError


def _forms(s: int, count: int):
    forms = itertools.combinations_with_replacement(range(1, 8), s)
    return [DiagonalForm.from_coefficients(c)
            for c in itertools.islice(forms, count)]


def _naive(form: DiagonalForm, m: int, modulus: int) -> int:
    return sum(1 for x in itertools.product(range(modulus),
                                            repeat=form.degree)
               if (form.evaluate(x) - m) % modulus == 0)


class TestCountResult(unittest.TestCase):

    def test_exact(self):
        result = CountResult(3, 7, CountResult.BRUTE, 55)
        self.assertTrue(result.exact)
        self.assertEqual(result.ratio, Fraction(55, 49))
        self.assertEqual(result.upper_ratio, result.ratio)
        self.assertEqual(str(result), '55 (brute, M=7)')

    def test_interval(self):
        result = CountResult(3, 7, CountResult.WEIL, lower=0, upper=105)
        self.assertFalse(result.exact)
        self.assertEqual(result.upper_ratio, Fraction(105, 49))
        with self.assertRaises(DomainError):
            _ = result.ratio


class TestValueDistribution(unittest.TestCase):

    def test_matches_enumeration(self):
        for form, modulus in [(CubicForm([1, 1, 1]), 7),
                              (CubicForm([1, 2, 3]), 9),
                              (QuarticForm([1, 1, 1, 1]), 5),
                              (QuarticForm([1, 2, 2, 3]), 6)]:
            distribution = counting.value_distribution(form, modulus)
            for m in range(modulus):
                self.assertEqual(distribution[m], _naive(form, m, modulus),
                                 (form, m, modulus))

    def test_total(self):
        distribution = counting.value_distribution(CubicForm([2, 3, 5]), 91)
        self.assertEqual(distribution.sum(), 91 ** 3)

    def test_read_only(self):
        distribution = counting.value_distribution(CubicForm([1, 1, 1]), 7)
        with self.assertRaises(ValueError):
            distribution[0] = 0

    def test_bad_modulus(self):
        with self.assertRaises(DomainError):
            counting.value_distribution(CubicForm([1, 1, 1]), 0)


class TestCountBrute(unittest.TestCase):

    def test_small(self):
        form = CubicForm([1, 1, 1])
        self.assertEqual(counting.count_brute(form, 0, 7).count, 55)
        self.assertEqual(counting.count_brute(form, 1, 7).count, 90)
        self.assertEqual(counting.count_brute(form, 2, 7).count, 27)
        self.assertEqual(counting.count_brute(form, 0, 5).count, 25)

    def test_quartic_small(self):
        form = QuarticForm([1, 1, 1, 1])
        self.assertEqual(counting.count_brute(form, 0, 5).count, 1)
        self.assertEqual(counting.count_brute(form, 1, 5).count, 16)
        self.assertEqual(counting.count_brute(form, 0, 3).count, 33)
        self.assertEqual(counting.count_brute(form, 0, 7).count, 385)
        self.assertEqual(counting.count_brute(form, 0, 13).count, 1537)

    def test_residue_reduced(self):
        form = CubicForm([1, 1, 1])
        self.assertEqual(counting.count_brute(form, 8, 7).count,
                         counting.count_brute(form, 1, 7).count)

    def test_not_prime(self):
        with self.assertRaises(DomainError):
            counting.count_brute(CubicForm([1, 1, 1]), 0, 9)

    def test_cap(self):
        with self.assertRaises(DomainError):
            counting.count_brute(CubicForm([1, 1, 1]), 0, 13, cap=11)


class TestCountZeroFormula(unittest.TestCase):

    def test_small(self):
        form = CubicForm([1, 1, 1])
        self.assertEqual(counting.count_zero_formula(form, 7).count, 55)
        self.assertEqual(counting.count_zero_formula(form, 13).count, 109)
        self.assertEqual(counting.count_zero_formula(form, 37).count, 973)
        self.assertEqual(counting.count_zero_formula(form, 43).count, 1513)
        self.assertEqual(counting.count_zero_formula(form, 5).count, 25)

    def test_quartic_small(self):
        form = QuarticForm([1, 1, 1, 1])
        self.assertEqual(counting.count_zero_formula(form, 5).count, 1)
        self.assertEqual(counting.count_zero_formula(form, 13).count, 1537)
        self.assertEqual(counting.count_zero_formula(form, 7).count, 385)

    def test_matches_brute_cubic(self):
        for form in _forms(3, 20):
            for p in sympy.primerange(5, 1500):
                if form.product % p == 0:
                    continue
                with self.subTest(form=form.spec, p=p):
                    self.assertEqual(
                        counting.count_zero_formula(form, p).count,
                        counting.count_brute(form, 0, p).count)

    def test_matches_brute_quartic(self):
        for form in _forms(4, 20):
            for q in sympy.primerange(3, 1500):
                if form.product % q == 0:
                    continue
                with self.subTest(form=form.spec, q=q):
                    self.assertEqual(
                        counting.count_zero_formula(form, q).count,
                        counting.count_brute(form, 0, q).count)

    def test_quadratic_character(self):
        for p in sympy.primerange(3, 200):
            squares = {x * x % p for x in range(1, p)}
            for a in range(1, 2 * p):
                if a % p:
                    self.assertEqual(counting.quadratic_character(a, p),
                                     1 if a % p in squares else -1, (a, p))

    def test_bad_prime(self):
        with self.assertRaises(DomainError):
            counting.count_zero_formula(CubicForm([1, 1, 7]), 7)

    def test_degree_prime(self):
        with self.assertRaises(DomainError):
            counting.count_zero_formula(CubicForm([1, 1, 1]), 3)
        with self.assertRaises(DomainError):
            counting.count_zero_formula(QuarticForm([1, 1, 1, 1]), 2)

    def test_not_prime(self):
        with self.assertRaises(DomainError):
            counting.count_zero_formula(CubicForm([1, 1, 1]), 91)


class TestCountCubicFormula(unittest.TestCase):

    def test_small(self):
        form = CubicForm([1, 1, 1])
        self.assertEqual(counting.count_cubic_formula(form, 1, 7).count, 90)
        self.assertEqual(counting.count_cubic_formula(form, 2, 7).count, 27)

    def test_matches_brute(self):
        for form in _forms(3, 12):
            for p in sympy.primerange(7, 300):
                if p % 3 != 1 or form.product % p == 0:
                    continue
                distribution = counting.value_distribution(form, p)
                for m in range(1, p):
                    self.assertEqual(
                        counting.count_cubic_formula(form, m, p).count,
                        distribution[m], (form.spec, m, p))

    def test_zero_residue(self):
        with self.assertRaises(DomainError):
            counting.count_cubic_formula(CubicForm([1, 1, 1]), 7, 7)

    def test_wrong_class(self):
        with self.assertRaises(DomainError):
            counting.count_cubic_formula(CubicForm([1, 1, 1]), 1, 11)

    def test_quartic(self):
        with self.assertRaises(DomainError):
            counting.count_cubic_formula(QuarticForm([1, 1, 1, 1]), 1, 13)


class TestWeil(unittest.TestCase):

    def test_interval(self):
        self.assertTupleEqual(counting.weil_interval(3, 7), (0, 105))
        self.assertTupleEqual(counting.weil_interval(3, 13), (65, 273))

    def test_interval_contains_counts(self):
        form = CubicForm([1, 2, 3])
        for p in sympy.primerange(5, 400):
            lower, upper = counting.weil_interval(3, p)
            for count in counting.value_distribution(form, p)[1:]:
                self.assertTrue(lower <= count <= upper, p)

    def test_check(self):
        for form in [CubicForm([1, 1, 1]), QuarticForm([1, 1, 4, 4]),
                     QuarticForm([1, 2, 3, 5])]:
            for p in sympy.primerange(11, 400):
                report = counting.weil_check(form, p)
                self.assertTrue(report.passed, (form.spec, p))
                self.assertEqual(report.p, p)

    def test_check_deviation(self):
        report = counting.weil_check(CubicForm([1, 1, 1]), 7)
        # r(1, 7) = 90 is the furthest from 49
        self.assertEqual(report.max_deviation, 41)
        self.assertIn(report.worst_residue, (1, 6))

    def test_check_bad_prime(self):
        with self.assertRaises(DomainError):
            counting.weil_check(CubicForm([1, 1, 7]), 7)

    def test_check_cap(self):
        with self.assertRaises(DomainError):
            counting.weil_check(CubicForm([1, 1, 1]), 13, cap=11)


class TestInvariants(unittest.TestCase):

    def test_mass(self):
        for form in _forms(3, 6) + _forms(4, 6):
            for p in sympy.primerange(2, 300):
                total = counting.value_distribution(form, p).sum()
                self.assertEqual(total, p ** form.degree, (form.spec, p))

    def test_mass_by_formula(self):
        # the closed formulas alone must account for all p^3 vectors
        for form in _forms(3, 6):
            for p in sympy.primerange(7, 300):
                if p % 3 != 1 or form.product % p == 0:
                    continue
                total = counting.count_zero_formula(form, p).count + sum(
                    counting.count_cubic_formula(form, m, p).count
                    for m in range(1, p))
                self.assertEqual(total, p ** 3, (form.spec, p))

    def test_permutation(self):
        for coefficients in [(1, 2, 3), (2, 3, 5), (1, 2, 4, 7),
                             (1, 3, 3, 5)]:
            forms = [DiagonalForm.from_coefficients(c) for c in
                     set(itertools.permutations(coefficients))]
            for p in sympy.primerange(11, 120):
                if forms[0].product % p == 0:
                    continue
                counts = {(counting.count_zero_formula(form, p).count,
                           counting.count_general(form, 1, p).count)
                          for form in forms}
                self.assertEqual(len(counts), 1, (coefficients, p))

    def test_unit_scaling(self):
        for coefficients in [(1, 1, 1), (1, 2, 3), (1, 1, 2, 3)]:
            form = DiagonalForm.from_coefficients(coefficients)
            s = form.degree
            for p in sympy.primerange(11, 80):
                if form.product % p == 0:
                    continue
                distribution = counting.value_distribution(form, p)
                for c in (2, p - 1):
                    # r_cF(cm) = r_F(m)
                    scaled = DiagonalForm.from_coefficients(
                        [c * a for a in coefficients])
                    self.assertEqual(
                        counting.count_general(scaled, 3 * c, p).count,
                        distribution[3 % p], (coefficients, p, c))
                    # a_1 -> a_1 c^s leaves every count alone
                    twisted = DiagonalForm.from_coefficients(
                        [coefficients[0] * c ** s, *coefficients[1:]])
                    self.assertEqual(
                        counting.count_general(twisted, 5, p).count,
                        distribution[5 % p], (coefficients, p, c))

    def test_weil_across_forms(self):
        for form in _forms(3, 12) + _forms(4, 12):
            for p in sympy.primerange(5, 500):
                if form.product % p == 0:
                    continue
                report = counting.weil_check(form, p)
                self.assertTrue(report.passed,
                                (form.spec, p, report.max_deviation))


class TestCountGeneral(unittest.TestCase):

    def test_formula(self):
        result = counting.count_general(CubicForm([1, 1, 1]), 0, 13)
        self.assertEqual(result.method, CountResult.FORMULA)
        self.assertEqual(result.count, 109)

    def test_brute(self):
        result = counting.count_general(CubicForm([1, 1, 1]), 1, 7)
        self.assertEqual(result.method, CountResult.BRUTE)
        self.assertEqual(result.count, 90)

    def test_bad_prime_brute(self):
        result = counting.count_general(CubicForm([1, 1, 7]), 0, 7)
        self.assertEqual(result.method, CountResult.BRUTE)
        self.assertEqual(result.count, _naive(CubicForm([1, 1, 7]), 0, 7))

    def test_weil(self):
        result = counting.count_general(QuarticForm([1, 1, 1, 1]), 1, 13,
                                        cap=5)
        self.assertEqual(result.method, CountResult.WEIL)
        self.assertFalse(result.exact)
        self.assertEqual(result.lower, 0)
        self.assertEqual(result.upper, 5994)

    def test_zero_above_cap(self):
        result = counting.count_general(QuarticForm([1, 1, 1, 1]), 0, 13,
                                        cap=5)
        self.assertEqual(result.count, 1537)

    def test_bad_prime_above_cap(self):
        with self.assertRaises(DomainError):
            counting.count_general(CubicForm([1, 1, 7]), 0, 7, cap=5)

    def test_not_prime(self):
        with self.assertRaises(DomainError):
            counting.count_general(CubicForm([1, 1, 1]), 0, 15)


class TestCountSquarefree(unittest.TestCase):

    def test_product(self):
        form = CubicForm([1, 1, 1])
        result = counting.count_squarefree(form, 0, [7, 13])
        self.assertEqual(result.count, 5995)
        self.assertEqual(result.modulus, 91)
        self.assertEqual(result.method, CountResult.MULTIPLICATIVE)
        self.assertEqual(result.count,
                         counting.value_distribution(form, 91)[0])

    def test_matches_distribution(self):
        form = QuarticForm([1, 2, 3, 5])
        distribution = counting.value_distribution(form, 3 * 5 * 7)
        for m in range(0, 105, 13):
            self.assertEqual(
                counting.count_squarefree(form, m, [3, 5, 7]).count,
                distribution[m])

    def test_duplicate(self):
        with self.assertRaises(DomainError):
            counting.count_squarefree(CubicForm([1, 1, 1]), 0, [7, 7])

    def test_inexact_factor(self):
        with self.assertRaises(DomainError):
            counting.count_squarefree(CubicForm([1, 1, 1]), 1, [7, 13],
                                      cap=7)
