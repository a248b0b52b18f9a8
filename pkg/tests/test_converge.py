"""Tests for the convergence diagnostic."""

import json
import unittest

import numpy as np

from dcscreen.converge import (
    ConvergenceReport,
    convergence_diagnostic,
    fixed_coefficients,
    parse_grid,
    surrogate_utilities,
)
from dcscreen.errors import GridTooSmall, UsageError
from dcscreen.simulate import ModelSpec


class TestGrid(unittest.TestCase):
    """Test sample-size grid parsing."""

    def test_parse(self):
        """Strings and sequences give sorted unique sizes."""
        self.assertEqual(parse_grid("400,50, 100"), (50, 100, 400))
        self.assertEqual(parse_grid([200, 50, 200]), (50, 200))

    def test_too_small(self):
        """A single sample size cannot show a trend."""
        with self.assertRaises(GridTooSmall):
            parse_grid("100")
        with self.assertRaises(GridTooSmall):
            parse_grid([100, 100])
        with self.assertRaises(UsageError):
            parse_grid("2,10")


class TestDiagnostic(unittest.TestCase):
    """Test the error table on small grids."""

    def test_table_shape(self):
        """One row per grid point with ordered error summaries."""
        report = convergence_diagnostic("1a", p=25, grid=(30, 60), seeds=3, surrogate_n=400)
        self.assertIsInstance(report, ConvergenceReport)
        self.assertEqual([r.n for r in report.rows], [30, 60])
        self.assertEqual(len(report.surrogate), 25)
        for row in report.rows:
            self.assertEqual(len(row.errors), 3)
            self.assertLessEqual(row.q25_err, row.median_err)
            self.assertLessEqual(row.median_err, row.q75_err)
            self.assertLessEqual(row.q75_err, row.max_err)
            self.assertGreater(row.median_err, 0.0)

    def test_independent_model(self):
        """indep has exactly zero population utilities; errors are the raw utilities."""
        model = ModelSpec("indep", n=50, p=25)
        np.testing.assert_array_equal(
            surrogate_utilities(model, fixed_coefficients(0), 1000), np.zeros(25))
        report = convergence_diagnostic("indep", p=25, grid=(40, 400), seeds=5)
        self.assertTrue(all(s == 0.0 for s in report.surrogate))
        self.assertLess(report.rows[1].median_err, report.rows[0].median_err)

    def test_given_surrogate(self):
        """A supplied surrogate skips the large draw."""
        report = convergence_diagnostic("1b", p=25, grid=(30, 40), seeds=2,
                                        surrogate=np.full(25, 0.5))
        self.assertEqual(report.surrogate, tuple([0.5] * 25))

    def test_workers_do_not_change_results(self):
        """Pooled and serial runs agree exactly."""
        kwargs = dict(p=25, grid=(30, 45), seeds=4, surrogate_n=300, master_seed=9)
        serial = convergence_diagnostic("1d", workers=1, **kwargs)
        pooled = convergence_diagnostic("1d", workers=2, **kwargs)
        self.assertEqual(serial.to_dict(), pooled.to_dict())

    def test_unsupported_model(self):
        """3b has no fixed population utilities."""
        with self.assertRaises(UsageError):
            convergence_diagnostic("3b", p=25, grid=(30, 40), seeds=1)
        with self.assertRaises(UsageError):
            convergence_diagnostic("1a", p=25, grid=(30, 40), seeds=0)

    def test_to_dict(self):
        """The payload is plain JSON."""
        report = convergence_diagnostic("indep", p=25, grid=(20, 30), seeds=2)
        doc = json.loads(json.dumps(report.to_dict(), allow_nan=False))
        self.assertEqual(doc["grid"], [20, 30])
        self.assertEqual(len(doc["rows"]), 2)
        self.assertIn("strictly_decreasing", doc)


if __name__ == "__main__":
    unittest.main()
