# -*- coding: utf-8 -*-
from fractions import Fraction
import io
import json
import unittest

import mock
import numpy as np

from diagaps import gapcraft, sieve
from diagaps.entities import CubicForm, QuarticForm
from diagaps.errors import CertificateError, DomainError
from diagaps.gapcraft import SelectionPolicy
from diagaps.sieve import Gap, ValueBitset

_FORM = CubicForm([1, 1, 1])


class TestSieveValues(unittest.TestCase):

    def test_cubes(self):
        self.assertListEqual(sieve.sieve_values(_FORM, 10).values(),
                             [0, 1, 2, 3, 8, 9])

    def test_fourth_powers(self):
        self.assertListEqual(
            sieve.sieve_values(QuarticForm([1, 1, 1, 1]), 6).values(),
            [0, 1, 2, 3, 4])

    def test_coefficients(self):
        self.assertListEqual(sieve.sieve_values(CubicForm([2, 3, 5]),
                                                3).values(), [0, 2])

    def test_matches_evaluation(self):
        form = QuarticForm([1, 2, 2, 3])
        limit = 3000
        expected = set()
        for x in np.ndindex(8, 7, 7, 6):
            value = form.evaluate(x)
            if value < limit:
                expected.add(value)
        self.assertListEqual(sieve.sieve_values(form, limit).values(),
                             sorted(expected))

    def test_threads(self):
        form = CubicForm([1, 2, 3])
        self.assertTrue(np.array_equal(
            sieve.sieve_values(form, 10 ** 5, workers=3, segment=4096).packed,
            sieve.sieve_values(form, 10 ** 5).packed))

    def test_segments(self):
        form = QuarticForm([1, 1, 2, 3])
        self.assertTrue(np.array_equal(
            sieve.sieve_values(form, 1003, segment=8).packed,
            sieve.sieve_values(form, 1003).packed))

    def test_bad_segment(self):
        for segment in (0, 4, 12):
            with self.assertRaises(DomainError):
                sieve.sieve_values(_FORM, 100, segment=segment)

    def test_packed(self):
        bitset = sieve.sieve_values(_FORM, 10 ** 6 + 3)
        self.assertEqual(bitset.packed.dtype, np.uint8)
        self.assertEqual(bitset.packed.nbytes, (10 ** 6 + 3 + 7) // 8)
        self.assertEqual(bitset.count(), len(bitset.values()))

    def test_budget(self):
        with self.assertRaises(DomainError):
            sieve.sieve_values(_FORM, 1001, budget=1000)

    def test_limit(self):
        with self.assertRaises(DomainError):
            sieve.sieve_values(_FORM, 0)

    def test_contains(self):
        bitset = sieve.sieve_values(_FORM, 100)
        self.assertIn(54, bitset)
        self.assertNotIn(44, bitset)
        with self.assertRaises(DomainError):
            _ = 100 in bitset

    def test_lookup(self):
        bitset = sieve.sieve_values(_FORM, 100)
        found = bitset.lookup(np.array([0, 4, 9, 44, 54]))
        self.assertListEqual(found.tolist(), [True, False, True, False, True])


class TestBitsetFile(unittest.TestCase):

    def test_header(self):
        f = io.BytesIO()
        sieve.sieve_values(_FORM, 10).export(f)
        data = f.getvalue()
        self.assertEqual(data[:8], b'SF\x01\x00\x0a\x00\x00\x00')
        # 0, 1, 2, 3, 8 and 9, least significant bit first
        self.assertEqual(data[8:], bytes([0b00001111, 0b00000011]))

    def test_load(self):
        bitset = sieve.sieve_values(QuarticForm([1, 1, 2, 3]), 1003)
        f = io.BytesIO()
        bitset.export(f)
        loaded = ValueBitset.load(bitset.form, f.getvalue())
        self.assertEqual(loaded.limit, 1003)
        self.assertTrue(np.array_equal(loaded.packed, bitset.packed))

    def test_bad_magic(self):
        with self.assertRaises(DomainError):
            ValueBitset.load(_FORM, b'XX\x01\x00\x08\x00\x00\x00\xff')

    def test_bad_version(self):
        with self.assertRaises(DomainError):
            ValueBitset.load(_FORM, b'SF\x02\x00\x08\x00\x00\x00\xff')

    def test_truncated(self):
        with self.assertRaises(DomainError):
            ValueBitset.load(_FORM, b'SF\x01\x00\x10\x00\x00\x00\xff')
        with self.assertRaises(DomainError):
            ValueBitset.load(_FORM, b'SF\x01')


class TestMaxGap(unittest.TestCase):

    def test_cubes(self):
        self.assertEqual(sieve.max_gap(sieve.sieve_values(_FORM, 100)),
                         Gap(43, 10))

    def test_run_to_end(self):
        form = QuarticForm([1, 1, 1, 1])
        self.assertEqual(sieve.max_gap(sieve.sieve_values(form, 16)),
                         Gap(4, 11))
        self.assertEqual(sieve.max_gap(sieve.sieve_values(form, 6)),
                         Gap(4, 1))

    def test_none(self):
        self.assertEqual(sieve.max_gap(sieve.sieve_values(_FORM, 4)),
                         Gap(None, 0))

    def test_first_on_ties(self):
        bitset = ValueBitset.from_bools(_FORM, np.array([1, 0, 1, 0, 1]))
        self.assertEqual(sieve.max_gap(bitset), Gap(0, 1))

    def test_run_reaching_limit(self):
        # 44, ..., 53 are not sums of three cubes; 54 is
        self.assertEqual(sieve.max_gap(sieve.sieve_values(_FORM, 54)),
                         Gap(43, 10))

    def test_chunk_boundaries(self):
        cases = [(_FORM, 10 ** 4), (CubicForm([1, 2, 3]), 10 ** 5)]
        for form, limit in cases:
            bitset = sieve.sieve_values(form, limit)
            whole = sieve.max_gap(bitset)
            for scan_bytes in (1, 7):
                with mock.patch.object(ValueBitset, '_SCAN_BYTES',
                                       scan_bytes):
                    self.assertEqual(sieve.max_gap(bitset), whole,
                                     (form.spec, scan_bytes))

    def test_million(self):
        limit = 10 ** 6
        bitset = sieve.sieve_values(_FORM, limit)
        gap = sieve.max_gap(bitset)

        values = np.flatnonzero(np.unpackbits(bitset.packed, count=limit,
                                              bitorder='little'))
        lengths = np.diff(np.append(values, limit)) - 1
        j = int(np.argmax(lengths))
        self.assertEqual(gap, Gap(int(values[j]), int(lengths[j])))

        self.assertIn(gap.start, bitset)
        self.assertTrue(sieve.is_value(_FORM, gap.start))
        self.assertTrue(sieve.window_has_value(_FORM, gap.start,
                                               gap.length).empty)
        if gap.start + gap.length + 1 < limit:
            self.assertIn(gap.start + gap.length + 1, bitset)


class TestWindowHasValue(unittest.TestCase):

    def test_empty(self):
        self.assertTrue(sieve.window_has_value(_FORM, 43, 10).empty)
        self.assertTrue(sieve.window_has_value(_FORM, 3, 2).empty)

    def test_single(self):
        window = sieve.window_has_value(_FORM, 53, 1)
        self.assertListEqual(window.representations, [(54, (3, 3, 0))])

    def test_zero(self):
        window = sieve.window_has_value(_FORM, -1, 1)
        self.assertListEqual(window.representations, [(0, (0, 0, 0))])

    def test_not_exhaustive(self):
        window = sieve.window_has_value(_FORM, 0, 100, exhaustive=False)
        self.assertEqual(len(window.representations), 1)

    def test_matches_bitset(self):
        for form in [CubicForm([1, 2, 3]), QuarticForm([1, 1, 2, 5]),
                     QuarticForm([1, 1, 1, 1])]:
            bitset = sieve.sieve_values(form, 5001)
            windows = sieve.chunked_windows(form, 0, 5000, 10, workers=2)
            found = [n for window in windows
                     for n, _ in window.representations]
            self.assertListEqual(found, bitset.values()[1:], form.spec)

    def test_matches_bitset_cubic(self):
        limit = 10 ** 5
        for coefficients in [(1, 1, 1), (1, 2, 3), (1, 1, 2), (2, 3, 5),
                             (1, 4, 7)]:
            form = CubicForm(coefficients)
            bitset = sieve.sieve_values(form, limit + 1)
            windows = sieve.chunked_windows(form, 0, limit, 100, workers=2)
            found = [n for window in windows
                     for n, _ in window.representations]
            self.assertListEqual(found, bitset.values()[1:], form.spec)

    def test_representations_evaluate(self):
        form = QuarticForm([3, 1, 2, 1])
        for n, x in sieve.window_has_value(form, 10 ** 4, 500) \
                .representations:
            self.assertEqual(form.evaluate(x), n)

    def test_large_offset(self):
        window = sieve.window_has_value(_FORM, 10 ** 9, 3)
        for n, x in window.representations:
            self.assertEqual(_FORM.evaluate(x), n)
            self.assertTrue(sieve.is_value(_FORM, n))

    def test_budget(self):
        with self.assertRaises(DomainError):
            sieve.window_has_value(_FORM, 10 ** 6, 10, budget=5)

    def test_rejected_before_searching(self):
        with mock.patch.object(sieve._Search, 'run') as run:
            with self.assertRaisesRegex(DomainError, 'search steps'):
                sieve.window_has_value(_FORM, 10 ** 30, 3)
        run.assert_not_called()

    def test_search_cost(self):
        self.assertEqual(sieve.window_search_cost(_FORM, 999), 50)
        self.assertEqual(sieve.window_search_cost(CubicForm([1, 2, 3]), 999),
                         56)
        self.assertEqual(sieve.window_search_cost(_FORM, -1), 1)

    def test_arguments(self):
        with self.assertRaises(DomainError):
            sieve.window_has_value(_FORM, -2, 1)
        with self.assertRaises(DomainError):
            sieve.window_has_value(_FORM, 0, 0)


class TestIsValue(unittest.TestCase):

    def test_small(self):
        self.assertTrue(sieve.is_value(_FORM, 54))
        self.assertTrue(sieve.is_value(_FORM, 0))
        self.assertFalse(sieve.is_value(_FORM, 44))
        self.assertFalse(sieve.is_value(_FORM, -1))

    def test_matches_bitset(self):
        form = CubicForm([1, 2, 3])
        bitset = sieve.sieve_values(form, 2000)
        for n in range(2000):
            self.assertEqual(sieve.is_value(form, n), n in bitset, n)

    def test_budget(self):
        with self.assertRaises(DomainError):
            sieve.is_value(_FORM, 10 ** 9 + 4, budget=10)

    def test_rejected_before_looping(self):
        with mock.patch('itertools.product') as product:
            with self.assertRaises(DomainError):
                sieve.is_value(_FORM, 10 ** 30)
        product.assert_not_called()


class TestFindExplicitGap(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.witness = gapcraft.build_witness(
            _FORM, 3, SelectionPolicy(1, 43, max_primes=3))

    def test_found(self):
        report = sieve.find_explicit_gap(_FORM, self.witness, 200)
        self.assertTrue(report.found)
        self.assertEqual(report.start % self.witness.modulus, self.witness.m)
        self.assertEqual(report.start, self.witness.m +
                         (report.h - 1) * self.witness.modulus)
        self.assertListEqual([n for n, _ in report.verification],
                             [report.start + i for i in (1, 2, 3)])
        self.assertFalse(any(value for _, value in report.verification))
        self.assertEqual(len(report.hits), report.h)

    def test_statistics(self):
        report = sieve.find_explicit_gap(_FORM, self.witness, 50,
                                         stop_at_first=False)
        self.assertEqual(len(report.hits), 50)
        self.assertLessEqual(report.hit_rate, 1.0)
        self.assertEqual(report.expected_hit_rate,
                         min(1.0, 3 * float(self.witness.epsilon)))

    def test_hit_rate_within_certificate(self):
        # windows {481h}: 13 and 37 cut the chance of a value to epsilon
        witness = gapcraft.assemble_witness(_FORM, [[13, 37]],
                                            Fraction(1, 2))
        self.assertEqual(witness.epsilon,
                         Fraction(109, 169) * Fraction(973, 1369))
        report = sieve.find_explicit_gap(_FORM, witness, 200,
                                         stop_at_first=False)
        self.assertEqual(len(report.hits), 200)
        self.assertTrue(report.found)
        self.assertLessEqual(report.hit_rate,
                             min(1.0, float(witness.epsilon)) + 0.15)

    def test_json(self):
        report = sieve.find_explicit_gap(_FORM, self.witness, 200)
        document = json.loads(report.to_json())
        self.assertTrue(document['found'])
        self.assertEqual(document['a'], str(report.start))
        self.assertEqual(document['gap_length'], 3)
        self.assertEqual(len(document['verification']), 3)

    def test_tampered(self):
        witness = gapcraft.GapWitness.from_json(self.witness.to_json())
        witness.epsilon = Fraction(1, 100)
        with self.assertRaises(CertificateError):
            sieve.find_explicit_gap(_FORM, witness, 10)

    def test_h_max(self):
        with self.assertRaises(DomainError):
            sieve.find_explicit_gap(_FORM, self.witness, 0)


class TestProgressionDensity(unittest.TestCase):

    def test_bound_holds(self):
        witness = gapcraft.assemble_witness(_FORM, [[7], [13]],
                                            Fraction(1, 4))
        for scale in (1, 2):
            checks = sieve.progression_density_check(_FORM, witness, scale)
            self.assertEqual(len(checks), 2)
            for check in checks:
                self.assertLessEqual(check.observed, check.bound, check)

    def test_budget(self):
        witness = gapcraft.assemble_witness(_FORM, [[7], [13]],
                                            Fraction(1, 4))
        with self.assertRaises(DomainError):
            sieve.progression_density_check(_FORM, witness, budget=1000)


class TestCertifiedWitnessSearch(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.witness = gapcraft.build_witness(_FORM, 3,
                                             SelectionPolicy(1, 60000))

    def test_rejected_before_searching(self):
        self.assertTrue(self.witness.certified)
        self.assertGreater(len(str(self.witness.modulus)), 100)
        with mock.patch.object(sieve._Search, 'run') as run:
            with self.assertRaisesRegex(DomainError, 'digit modulus'):
                sieve.find_explicit_gap(_FORM, self.witness, 10)
        run.assert_not_called()

    def test_still_checked(self):
        witness = gapcraft.GapWitness.from_json(self.witness.to_json())
        witness.epsilon = Fraction(1, 10 ** 6)
        with self.assertRaises(CertificateError):
            sieve.find_explicit_gap(_FORM, witness, 10)
