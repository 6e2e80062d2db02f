"""
Tests for PGM input/output, sequence loading and the synthetic generator.
"""

import os
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.data.frame_io import (
    CALIBRATION_HIGH_RATIO, CALIBRATION_LOW_RATIO, gen_synthetic, load_pgm, load_sequence,
    model_encoded_size, ratio_size_model, sustaining_rate, with_encoded_sizes, write_pgm,
)
from src.data.models import FrameSequence, SyntheticParams
from src.errors import (
    FrameFormatError, OutputError, PGMMagicError, PGMMaxvalError, PGMTruncatedError,
    SequenceLoadError, UsageError,
)
from tests.fakes import make_frame


class _TempDirCase(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def write_bytes(self, name, data):
        path = os.path.join(self.test_dir, name)
        with open(path, 'wb') as f:
            f.write(data)
        return path


class TestLoadPgm(_TempDirCase):
    """Test load_pgm parsing and its error kinds."""

    def test_reads_pixels_exactly(self):
        """Test a 3x2 image is read byte for byte."""
        path = self.write_bytes('a.pgm', b"P5\n3 2\n255\n" + bytes([0, 10, 20, 30, 40, 255]))
        frame = load_pgm(path, frame_id=4, t_gen=160.0)
        self.assertEqual((frame.width, frame.height), (3, 2))
        self.assertEqual(frame.pixels.tolist(), [[0, 10, 20], [30, 40, 255]])
        self.assertEqual(frame.id, 4)
        self.assertEqual(frame.t_gen, 160.0)
        self.assertEqual(frame.encoded_size, 6)

    def test_header_comments_and_whitespace(self):
        """Test comments and mixed whitespace in the header."""
        data = b"P5 # camera\n# another\n2\t2\r\n255\n" + bytes([1, 2, 3, 4])
        frame = load_pgm(self.write_bytes('c.pgm', data))
        self.assertEqual(frame.pixels.tolist(), [[1, 2], [3, 4]])

    def test_pixel_starting_with_whitespace_byte(self):
        """Test only one separator byte follows maxval."""
        data = b"P5\n2 1\n255\n" + bytes([10, 32])
        frame = load_pgm(self.write_bytes('w.pgm', data))
        self.assertEqual(frame.pixels.tolist(), [[10, 32]])

    def test_wrong_magic(self):
        """Test ASCII PGM is rejected with a magic error."""
        path = self.write_bytes('p2.pgm', b"P2\n2 1\n255\n0 0\n")
        with self.assertRaises(PGMMagicError):
            load_pgm(path)

    def test_sixteen_bit_maxval(self):
        """Test maxval above 255 is rejected."""
        path = self.write_bytes('m.pgm', b"P5\n1 1\n65535\n\x00\x00")
        with self.assertRaises(PGMMaxvalError):
            load_pgm(path)

    def test_truncated_payload(self):
        """Test a short pixel payload is reported."""
        path = self.write_bytes('t.pgm', b"P5\n4 4\n255\n" + bytes(10))
        with self.assertRaises(PGMTruncatedError):
            load_pgm(path)

    def test_truncated_header(self):
        """Test a header without maxval is reported."""
        with self.assertRaises(PGMTruncatedError):
            load_pgm(self.write_bytes('h.pgm', b"P5\n4 4"))

    def test_format_errors_are_value_errors(self):
        """Test the error family stays compatible with ValueError."""
        self.assertTrue(issubclass(FrameFormatError, ValueError))

    def test_write_then_load_round_trip(self):
        """Test write_pgm output loads back to the same pixels."""
        rng = np.random.default_rng(1)
        frame = make_frame(0, pixels=rng.integers(0, 256, size=(5, 7), dtype=np.uint8))
        path = os.path.join(self.test_dir, 'r.pgm')
        write_pgm(path, frame)
        self.assertTrue(load_pgm(path).same_pixels(frame))

    def test_write_to_missing_directory(self):
        """Test an unwritable target is an output error."""
        with self.assertRaises(OutputError):
            write_pgm(os.path.join(self.test_dir, 'missing', 'x.pgm'), make_frame(0))


class TestLoadSequence(_TempDirCase):
    """Test directory loading."""

    def _write_frames(self, names):
        for value, name in enumerate(names):
            write_pgm(os.path.join(self.test_dir, name), make_frame(0, pixels=np.full((2, 2), value, np.uint8)))

    def test_lexicographic_order_and_timing(self):
        """Test files are ordered by name and timed from fps."""
        self._write_frames(['b.pgm', 'a.pgm', 'c.pgm'])
        Path(self.test_dir, 'notes.txt').write_text('ignored')
        sequence = load_sequence(self.test_dir, fps=25)
        self.assertEqual(sequence.ids(), [0, 1, 2])
        self.assertEqual([f.t_gen for f in sequence], [0.0, 40.0, 80.0])
        # a.pgm was written second, with value 1
        self.assertEqual(int(sequence[0].pixels[0, 0]), 1)

    def test_compression_ratio_sets_sizes(self):
        """Test the size model is applied on load."""
        self._write_frames(['000.pgm'])
        sequence = load_sequence(self.test_dir, fps=10, compression_ratio=0.5)
        self.assertEqual(sequence[0].encoded_size, 2)

    def test_empty_directory(self):
        """Test a directory without frames cannot be loaded."""
        with self.assertRaises(SequenceLoadError):
            load_sequence(self.test_dir, fps=25)

    def test_bad_file_names_the_file(self):
        """Test a broken file is reported with its name."""
        self._write_frames(['000.pgm'])
        self.write_bytes('001.pgm', b"P6\n1 1\n255\n\x00\x00\x00")
        with self.assertRaises(SequenceLoadError) as ctx:
            load_sequence(self.test_dir, fps=25)
        self.assertIn('001.pgm', str(ctx.exception))

    def test_non_positive_fps(self):
        """Test fps must be positive."""
        self._write_frames(['000.pgm'])
        with self.assertRaises(UsageError):
            load_sequence(self.test_dir, fps=0)


class TestGenSynthetic(unittest.TestCase):
    """Test the drifting dot-field generator."""

    def setUp(self):
        self.params = SyntheticParams(width=40, height=30, n_frames=6, dot_density=0.1,
                                      shift_px_per_frame=3, noise_sigma=0.0, seed=11)

    def test_deterministic(self):
        """Test identical params produce identical frames."""
        first = gen_synthetic(self.params)
        second = gen_synthetic(self.params)
        for a, b in zip(first, second):
            self.assertTrue(a.same_pixels(b))

    def test_frames_are_shifted_copies(self):
        """Test frame i is frame 0 rolled right by i x shift."""
        sequence = gen_synthetic(self.params)
        base = sequence[0].pixels
        for i, frame in enumerate(sequence):
            np.testing.assert_array_equal(frame.pixels, np.roll(base, 3 * i, axis=1))
        self.assertTrue(set(np.unique(base)).issubset({0, 255}))

    def test_density(self):
        """Test the bright fraction follows dot_density."""
        params = SyntheticParams(width=200, height=200, n_frames=1, dot_density=0.05, seed=2)
        fraction = float((gen_synthetic(params)[0].pixels == 255).mean())
        self.assertAlmostEqual(fraction, 0.05, delta=0.01)

    def test_noise_is_clipped_and_fresh(self):
        """Test noise stays in range and differs between frames."""
        params = SyntheticParams(width=40, height=30, n_frames=3, dot_density=0.1,
                                 shift_px_per_frame=0, noise_sigma=20.0, seed=4)
        sequence = gen_synthetic(params)
        self.assertEqual(sequence[0].pixels.dtype, np.uint8)
        self.assertFalse(sequence[0].same_pixels(sequence[1]))

    def test_sequence_timing(self):
        """Test ids and t_gen follow fps."""
        sequence = gen_synthetic(self.params, fps=20)
        self.assertIsInstance(sequence, FrameSequence)
        self.assertEqual([f.t_gen for f in sequence], [0.0, 50.0, 100.0, 150.0, 200.0, 250.0])

    def test_invalid_params(self):
        """Test negative sizes are usage errors."""
        with self.assertRaises(UsageError):
            SyntheticParams(width=-1)


class TestSizeModel(unittest.TestCase):
    """Test the encoded size model."""

    def test_ratio_one_is_raw_size(self):
        """Test ratio 1.0 keeps width x height bytes."""
        self.assertEqual(model_encoded_size(make_frame(0, width=8, height=4), 1.0), 32)

    def test_minimum_one_byte(self):
        """Test very small ratios still give one byte."""
        self.assertEqual(model_encoded_size(make_frame(0), 1e-6), 1)

    def test_ratio_out_of_range(self):
        """Test ratios outside (0, 1] are refused."""
        for ratio in (0.0, -0.5, 1.5):
            with self.assertRaises(UsageError):
                model_encoded_size(make_frame(0), ratio)
            with self.assertRaises(UsageError):
                ratio_size_model(ratio)

    def test_calibration_rates(self):
        """Test the calibration ratios give about 3 MB/s and 0.5 MB/s at 1280x1024, 25 fps."""
        frame = make_frame(0, pixels=np.zeros((1024, 1280), np.uint8))
        self.assertAlmostEqual(model_encoded_size(frame, CALIBRATION_HIGH_RATIO) * 25 / 1e6, 3.0, delta=0.01)
        self.assertAlmostEqual(model_encoded_size(frame, CALIBRATION_LOW_RATIO) * 25 / 1e6, 0.5, delta=0.01)

    def test_sustaining_rate(self):
        """Test the sustaining rate is mean size times fps."""
        params = SyntheticParams(width=10, height=10, n_frames=4, seed=0)
        sequence = with_encoded_sizes(gen_synthetic(params, fps=25), 0.5)
        self.assertEqual(sequence[0].encoded_size, 50)
        self.assertEqual(sustaining_rate(sequence), 1250.0)
        self.assertEqual(ratio_size_model(0.5)(sequence[0]), 50)


if __name__ == '__main__':
    unittest.main()
