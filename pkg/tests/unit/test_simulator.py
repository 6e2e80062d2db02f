"""
Tests for the event-driven link simulator.
"""

import unittest

from src.buffering.policies import POLICY_NAMES
from src.data.models import InterruptionSpec, LinkTrace
from src.errors import SimulationError, UsageError
from src.netsim.simulator import events_table, message_loss_probability, simulate
from src.netsim.trace import apply_interruption, constant_trace
from tests.fakes import CountingModel, PositionModel, make_sequence


class TestSimulate(unittest.TestCase):
    """Test simulate on blank frames with explicit sizes."""

    def setUp(self):
        # 100-byte frames at 25 fps need 2500 B/s
        self.sequence = make_sequence(50, fps=25, size=100)

    def test_fast_link_receives_everything(self):
        """Test an unconstrained link drops nothing and keeps order."""
        result = simulate(self.sequence, constant_trace(1e9), 'drop-oldest', 5)
        self.assertEqual(result.received_ids, list(range(50)))
        self.assertEqual(result.dropped, [])
        self.assertIsNone(result.in_flight)
        self.assertEqual(result.buffered, [])

    def test_arrival_times(self):
        """Test each frame arrives size/rate after it is generated."""
        result = simulate(make_sequence(3, fps=10, size=100), constant_trace(1000.0), 'drop-oldest', 2)
        self.assertEqual(result.received, [(0, 100.0), (1, 200.0), (2, 300.0)])

    def test_conservation(self):
        """Test every frame is received, dropped, buffered or in flight exactly once."""
        trace = apply_interruption(constant_trace(2600.0), InterruptionSpec(10, 400, 10), 25)
        for name in POLICY_NAMES:
            result = simulate(self.sequence, trace, name, 4, model=PositionModel())
            ids = result.received_ids + result.dropped_ids + result.buffered
            if result.in_flight is not None:
                ids.append(result.in_flight)
            self.assertEqual(sorted(ids), list(range(50)), name)
            self.assertEqual(result.received_ids, sorted(result.received_ids))

    def test_total_starvation(self):
        """Test a dead link delivers nothing and leaves one frame in flight."""
        trace = LinkTrace(points=((0.0, 0.0),))
        result = simulate(self.sequence, trace, 'drop-oldest', 5)
        self.assertEqual(result.received, [])
        self.assertEqual(result.in_flight, 0)
        self.assertEqual(result.buffered, [45, 46, 47, 48, 49])
        self.assertEqual(len(result.dropped), 44)

    def test_starvation_then_recovery_retention(self):
        """Test Drop-Oldest keeps the newest frames, Drop-Youngest the oldest."""
        trace = LinkTrace(points=((0.0, 0.0), (5000.0, 1e9)))
        oldest = simulate(self.sequence, trace, 'drop-oldest', 5)
        youngest = simulate(self.sequence, trace, 'drop-youngest', 5)
        # Frame 0 goes in flight at t=0 and stalls until the link recovers
        self.assertEqual(oldest.received_ids, [0, 45, 46, 47, 48, 49])
        self.assertEqual(youngest.received_ids, [0, 1, 2, 3, 4, 49])

    def test_deterministic(self):
        """Test identical inputs give equal results, random policy included."""
        trace = apply_interruption(constant_trace(2600.0), InterruptionSpec(10, 400, 10), 25)
        first = simulate(self.sequence, trace, 'random', 4, seed=3)
        second = simulate(self.sequence, trace, 'random', 4, seed=3)
        self.assertEqual(first, second)

    def test_baselines_never_extract(self):
        """Test baseline policies never touch the similarity model."""
        trace = apply_interruption(constant_trace(2600.0), InterruptionSpec(10, 400, 10), 25)
        for name in ('drop-oldest', 'drop-youngest', 'random'):
            model = CountingModel()
            result = simulate(self.sequence, trace, name, 4, model=model)
            self.assertEqual(result.extraction_count, 0)
            self.assertEqual(model.extractions, [])

    def test_baselines_run_without_model_under_congestion(self):
        """Test baselines need no similarity model when frames are sent from a backlog."""
        trace = apply_interruption(constant_trace(2600.0), InterruptionSpec(10, 400, 10), 25)
        for name in ('drop-oldest', 'drop-youngest', 'random'):
            result = simulate(self.sequence, trace, name, 4)
            self.assertGreater(len(result.dropped), 0, name)
            self.assertEqual(result.extraction_count, 0, name)

    def test_orbbuf_slowdown_without_drops_extracts_nothing(self):
        """Test a backlog that never fills the buffer costs no feature extraction."""
        # Half rate for 200 ms queues a few frames but stays below capacity
        trace = LinkTrace(points=((0.0, 2600.0), (400.0, 1250.0), (600.0, 2600.0)))
        model = CountingModel()
        result = simulate(self.sequence, trace, 'orbbuf', 25, model=model)
        self.assertEqual(result.dropped, [])
        self.assertEqual(result.extraction_count, 0)
        self.assertEqual(model.extractions, [])

    def test_drop_oldest_retention_monotone_in_capacity(self):
        """Test a larger Drop-Oldest buffer never delivers fewer frames."""
        traces = [
            apply_interruption(constant_trace(2600.0), InterruptionSpec(10, 400, 10), 25),
            LinkTrace(points=((0.0, 1800.0), (700.0, 400.0), (1200.0, 3000.0))),
            LinkTrace(points=((0.0, 0.0), (900.0, 5000.0))),
        ]
        for trace in traces:
            counts = [len(simulate(self.sequence, trace, 'drop-oldest', capacity).received)
                      for capacity in range(1, 12)]
            self.assertEqual(counts, sorted(counts), counts)

    def test_orbbuf_without_congestion_extracts_nothing(self):
        """Test ORBBuf on a fast link never needs features."""
        model = CountingModel()
        result = simulate(self.sequence, constant_trace(1e9), 'orbbuf', 5, model=model)
        self.assertEqual(result.extraction_count, 0)
        self.assertEqual(model.comparisons, 0)

    def test_orbbuf_extracts_under_congestion(self):
        """Test ORBBuf computes features once frames queue up."""
        trace = apply_interruption(constant_trace(2600.0), InterruptionSpec(10, 400, 10), 25)
        result = simulate(self.sequence, trace, 'orbbuf', 4, model=PositionModel())
        self.assertGreater(result.extraction_count, 0)
        self.assertGreater(len(result.dropped), 0)

    def test_size_model_overrides_encoded_size(self):
        """Test a custom size model changes transfer times."""
        result = simulate(make_sequence(2, fps=10), constant_trace(1000.0), 'drop-oldest', 2,
                          size_model=lambda frame: 50)
        self.assertEqual(result.received, [(0, 50.0), (1, 150.0)])

    def test_non_positive_size(self):
        """Test a zero-byte message is a simulation error."""
        with self.assertRaises(SimulationError):
            simulate(make_sequence(2), constant_trace(1000.0), 'drop-oldest', 2, size_model=lambda frame: 0)

    def test_invalid_capacity(self):
        """Test capacity below one is a usage error."""
        with self.assertRaises(UsageError):
            simulate(self.sequence, constant_trace(1e9), 'drop-oldest', 0)

    def test_orbbuf_requires_tracking(self):
        """Test ORBBuf cannot run with score tracking disabled."""
        with self.assertRaises(UsageError):
            simulate(self.sequence, constant_trace(1e9), 'orbbuf', 3, model=PositionModel(), track_scores=False)

    def test_events_table(self):
        """Test the per-event CSV table lists every frame once."""
        trace = LinkTrace(points=((0.0, 0.0),))
        table = events_table(simulate(make_sequence(8), trace, 'drop-oldest', 3))
        self.assertEqual(list(table.columns), ['event', 'frame_id', 'time_ms'])
        self.assertEqual(sorted(table['frame_id']), list(range(8)))
        self.assertEqual(table['event'].value_counts().to_dict(), {'dropped': 4, 'buffered': 3, 'in_flight': 1})


class TestMessageLossProbability(unittest.TestCase):
    """Test the packet-to-message loss formula."""

    def test_one_percent_over_hundred_packets(self):
        """Test 1% packet loss over 100 packets loses about 63.4% of messages."""
        self.assertAlmostEqual(message_loss_probability(0.01, 100), 0.63397, delta=1e-4)

    def test_edges(self):
        """Test zero loss and single packets."""
        self.assertEqual(message_loss_probability(0.0, 50), 0.0)
        self.assertAlmostEqual(message_loss_probability(0.3, 1), 0.3)
        self.assertEqual(message_loss_probability(0.5, 0), 0.0)

    def test_invalid_arguments(self):
        """Test out-of-range probability and negative counts."""
        with self.assertRaises(UsageError):
            message_loss_probability(1.5, 10)
        with self.assertRaises(UsageError):
            message_loss_probability(0.1, -1)


if __name__ == '__main__':
    unittest.main()
