# -*- coding: utf-8 -*-
from fractions import Fraction
import unittest

from diagaps import util


class TestZipDict(unittest.TestCase):

    def test_both_empty(self):
        self.assertDictEqual(util.zip_dict({}, {}), {})

    def test_one_empty(self):
        self.assertDictEqual(util.zip_dict({}, {7: 1, 13: 2}),
                             {7: (None, 1), 13: (None, 2)})

    def test_ratios(self):
        stored = {7: Fraction(1, 7), 13: Fraction(109, 169), 31: 3}
        fresh = {7: Fraction(1, 7), 19: 4, 31: 9}
        self.assertDictEqual(util.zip_dict(stored, fresh), {
            7: (Fraction(1, 7), Fraction(1, 7)),
            13: (Fraction(109, 169), None),
            19: (None, 4),
            31: (3, 9),
        })


class TestChunk(unittest.TestCase):

    def test_empty(self):
        self.assertListEqual(list(util.chunk([], 5)), [])

    def test_all_full(self):
        self.assertListEqual(list(util.chunk(range(6), 2)),
                             [[0, 1], [2, 3], [4, 5]])

    def test_partial_full(self):
        self.assertListEqual(list(util.chunk(range(4), 3)),
                             [[0, 1, 2], [3]])


class TestRanges(unittest.TestCase):

    def test_empty(self):
        self.assertListEqual(list(util.ranges(5, 5, 10)), [])

    def test_aligned(self):
        self.assertListEqual(list(util.ranges(0, 25, 10)),
                             [(0, 10), (10, 20), (20, 25)])

    def test_unaligned_start(self):
        self.assertListEqual(list(util.ranges(13, 31, 10)),
                             [(13, 20), (20, 30), (30, 31)])

    def test_invalid_width(self):
        with self.assertRaises(ValueError):
            list(util.ranges(0, 10, 0))
