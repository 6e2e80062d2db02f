"""
Tests for run reports and their tables.
"""

import math
import unittest

from src.analytics.metrics import (
    COMPARE_COLUMNS, build_report, compare_table, distance_histogram, log_product, max_loss_run,
    report_table, timing_table,
)
from src.data.models import SimResult
from src.errors import DataError
from tests.fakes import PositionModel, make_sequence


class _ReportModel(PositionModel):
    """PositionModel exposing the similarities() helper build_report uses."""

    def similarity(self, a, b):
        return self.compare(self.features(a), self.features(b))

    def similarities(self, frames):
        return [self.similarity(a, b) for a, b in zip(frames, frames[1:])]


class TestLossRuns(unittest.TestCase):
    """Test max_loss_run and the distance histogram."""

    def test_no_losses(self):
        """Test a complete sequence has no loss run."""
        self.assertEqual(max_loss_run([0, 1, 2, 3]), 0)

    def test_interior_gap(self):
        """Test the longest interior gap is reported."""
        self.assertEqual(max_loss_run([0, 1, 5, 6, 9]), 3)

    def test_leading_gap_counts(self):
        """Test frames missing before the first received id are a run."""
        self.assertEqual(max_loss_run([4, 5, 6]), 4)

    def test_empty(self):
        """Test nothing received gives zero."""
        self.assertEqual(max_loss_run([]), 0)

    def test_histogram(self):
        """Test steps between received ids are counted."""
        self.assertEqual(distance_histogram([0, 1, 2, 5, 6, 9]), {1: 3, 3: 2})


class TestLogProduct(unittest.TestCase):
    """Test the log-product aggregate."""

    def test_zeros_are_counted_separately(self):
        """Test zeros do not enter the sum."""
        total, zeros = log_product([0, 1, math.e ** 2, 0])
        self.assertAlmostEqual(total, 2.0)
        self.assertEqual(zeros, 2)

    def test_empty(self):
        """Test an empty profile gives 0 and no zeros."""
        self.assertEqual(log_product([]), (0.0, 0))


class TestBuildReport(unittest.TestCase):
    """Test build_report on a fabricated result."""

    def setUp(self):
        self.sequence = make_sequence(10)
        self.model = _ReportModel()
        self.result = SimResult(received=[(0, 10.0), (1, 50.0), (4, 90.0), (5, 130.0)],
                                dropped=[(2, 80.0), (3, 120.0)], extraction_count=3,
                                buffered=[6, 7, 8, 9], enqueue_times=[0.1, 0.3])

    def test_profile_and_aggregates(self):
        """Test adjacent similarities and summary values."""
        report = build_report(self.result, self.sequence, self.model, policy='orbbuf')
        curve = self.model.curve
        self.assertEqual(report.adjacent_similarities, [curve(1), curve(3), curve(1)])
        self.assertEqual(report.min_similarity, curve(3))
        self.assertEqual(report.max_loss_run, 2)
        self.assertEqual(report.dropped_count, 2)
        self.assertEqual(report.extraction_count, 3)
        self.assertAlmostEqual(report.mean_enqueue_ms, 0.2)
        self.assertEqual(report.max_enqueue_ms, 0.3)
        self.assertEqual(report.summary()['received'], 4)

    def test_single_frame_has_no_minimum(self):
        """Test fewer than two received frames give no minimum."""
        result = SimResult(received=[(3, 1.0)], dropped=[], extraction_count=0)
        report = build_report(result, self.sequence, self.model, policy='drop-oldest')
        self.assertIsNone(report.min_similarity)
        self.assertEqual(report.adjacent_similarities, [])
        self.assertEqual(report.max_loss_run, 3)

    def test_unknown_frame(self):
        """Test received ids must belong to the sequence."""
        result = SimResult(received=[(42, 1.0)], dropped=[], extraction_count=0)
        with self.assertRaises(DataError):
            build_report(result, self.sequence, self.model)

    def test_tables(self):
        """Test report, timing and comparison tables."""
        report = build_report(self.result, self.sequence, self.model, policy='orbbuf')
        table = report_table(report)
        self.assertEqual(list(table.columns), ['metric', 'value'])
        values = dict(zip(table['metric'], table['value']))
        self.assertEqual(values['max_loss_run'], 2)
        self.assertEqual(values['received_ids'], '0 1 4 5')
        self.assertEqual(values['distance_histogram'], '1:2 3:1')
        self.assertNotIn('mean_enqueue_ms', values)

        self.assertEqual(timing_table(report)['enqueue_ms'].tolist(), [0.1, 0.3])

        compare = compare_table([report, report])
        self.assertEqual(list(compare.columns), COMPARE_COLUMNS)
        self.assertEqual(len(compare), 2)
        self.assertTrue(compare.iloc[0].equals(compare.iloc[1]))


if __name__ == '__main__':
    unittest.main()
