"""
Tests for the command-line interface: subcommands, output files and exit codes.
"""

import contextlib
import io
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd

from src.cli import build_parser, cmd_run, main
from src.config import load_run_config
from src.data.frame_io import gen_synthetic, load_sequence
from src.errors import SimulationError

SMALL = ['--width', '96', '--height', '72', '--n-frames', '20', '--capacity', '4',
         '--intr-frame', '5', '--intr-latency-ms', '200', '--intr-duration-frames', '3']


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.out = os.path.join(self.test_dir, 'results')

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def run_cli(self, *argv):
        """Runs main with captured output and returns (code, stdout, stderr)."""
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()

    def only_run_dir(self):
        runs = [p for p in Path(self.out).iterdir() if p.is_dir()]
        self.assertEqual(len(runs), 1)
        return runs[0]


class TestGenCommand(CliTestCase):
    """Test writing a synthetic sequence to PGM files."""

    def test_gen_writes_numbered_frames(self):
        """Test gen writes 000000.pgm.. and the parameter sidecar."""
        code, _, _ = self.run_cli('gen', '--n-frames', '3', '--width', '32', '--height', '24', '--out', self.out)
        self.assertEqual(code, 0)
        names = sorted(os.listdir(self.out))
        self.assertEqual(names, ['000000.pgm', '000001.pgm', '000002.pgm', 'params.env'])
        self.assertIn('n_frames = 3', Path(self.out, 'params.env').read_text(encoding='utf-8'))

    def test_gen_is_reproducible(self):
        """Test regeneration gives byte-identical files."""
        other = os.path.join(self.test_dir, 'again')
        args = ('--n-frames', '3', '--width', '32', '--height', '24', '--seed', '5')
        self.run_cli('gen', *args, '--out', self.out)
        self.run_cli('gen', *args, '--out', other)
        for name in os.listdir(self.out):
            self.assertEqual(Path(self.out, name).read_bytes(), Path(other, name).read_bytes())

    def test_gen_then_load(self):
        """Test the written files load back to the generated pixels."""
        flags = {'n_frames': '3', 'width': '32', 'height': '24', 'seed': '5'}
        self.run_cli('gen', '--n-frames', '3', '--width', '32', '--height', '24', '--seed', '5', '--out', self.out)
        config = load_run_config(flag_values=flags)
        generated = gen_synthetic(config.synthetic, config.fps)
        loaded = load_sequence(self.out, config.fps)
        self.assertEqual(loaded.ids, [0, 1, 2])
        for a, b in zip(generated, loaded):
            np.testing.assert_array_equal(a.pixels, b.pixels)

    def test_gen_rejects_sequence_dir(self):
        """Test gen with an input directory is a usage error."""
        code, _, err = self.run_cli('gen', '--sequence-dir', self.test_dir, '--out', self.out)
        self.assertEqual(code, 1)
        self.assertIn('Ошибка', err)


class TestRunCommand(CliTestCase):
    """Test single runs."""

    def test_run_writes_outputs(self):
        """Test run creates the report, events, timing, charts and config."""
        code, stdout, _ = self.run_cli('run', *SMALL, '--out', self.out)
        self.assertEqual(code, 0)
        run_dir = self.only_run_dir()
        self.assertEqual(len(run_dir.name), 12)
        for name in ('report.csv', 'events.csv', 'timing.csv', 'similarity.svg', 'enqueue_times.svg',
                     'brief_pattern.txt', 'effective_config.env'):
            self.assertTrue((run_dir / name).is_file(), name)
        self.assertIn(str(run_dir), stdout)

        report = pd.read_csv(run_dir / 'report.csv', keep_default_na=False)
        self.assertEqual(report['metric'].iloc[0], 'policy')
        events = pd.read_csv(run_dir / 'events.csv')
        self.assertEqual(sorted(events['frame_id']), list(range(20)))

    def test_run_is_reproducible(self):
        """Test repeated runs reuse the run id and give identical CSVs."""
        self.run_cli('run', *SMALL, '--policy', 'random', '--out', self.out)
        first = {name: (self.only_run_dir() / name).read_bytes() for name in ('report.csv', 'events.csv')}
        self.run_cli('run', *SMALL, '--policy', 'random', '--out', self.out)
        for name, data in first.items():
            self.assertEqual((self.only_run_dir() / name).read_bytes(), data)

    def test_unconstrained_link_drops_nothing(self):
        """Test a fast link without interruption keeps every frame."""
        config = load_run_config(flag_values={
            'width': '96', 'height': '72', 'n_frames': '20', 'capacity': '3', 'link_rate': '1e9',
            'intr_latency_ms': '0', 'intr_duration_frames': '0', 'out': self.out,
        })
        with contextlib.redirect_stdout(io.StringIO()):
            report = cmd_run(config)
        self.assertEqual(report.dropped_count, 0)
        self.assertEqual(report.received_ids, list(range(20)))
        self.assertEqual(report.extraction_count, 0)

    def test_config_file(self):
        """Test --config values reach the run."""
        config_path = os.path.join(self.test_dir, 'run.env')
        with open(config_path, 'w', encoding='utf-8') as f:
            f.write("policy = drop-youngest\n")
        code, stdout, _ = self.run_cli('run', *SMALL, '--config', config_path, '--out', self.out)
        self.assertEqual(code, 0)
        self.assertIn('drop-youngest', stdout)
        self.assertIn('policy = drop-youngest',
                      (self.only_run_dir() / 'effective_config.env').read_text(encoding='utf-8'))


class TestCompareAndStudy(CliTestCase):
    """Test compare and study subcommands."""

    def test_compare_identical_policies(self):
        """Test the same policy twice gives identical rows."""
        code, _, _ = self.run_cli('compare', *SMALL, '--policies', 'drop-oldest,drop-oldest', '--out', self.out)
        self.assertEqual(code, 0)
        table = pd.read_csv(self.only_run_dir() / 'compare.csv')
        self.assertEqual(len(table), 2)
        self.assertEqual(table.iloc[0].tolist(), table.iloc[1].tolist())

    def test_compare_needs_two_policies(self):
        """Test a single policy cannot be compared."""
        code, _, _ = self.run_cli('compare', *SMALL, '--policies', 'orbbuf', '--out', self.out)
        self.assertEqual(code, 1)

    def test_study_distance(self):
        """Test three frames give three pairs."""
        code, stdout, _ = self.run_cli('study', 'distance', '--n-frames', '3', '--width', '96', '--height', '72',
                                       '--lo', '0', '--hi', '2', '--out', self.out)
        self.assertEqual(code, 0)
        table = pd.read_csv(self.only_run_dir() / 'distance.csv')
        self.assertEqual(len(table), 3)
        self.assertIn('Спирмена', stdout)

    def test_study_loss(self):
        """Test the loss study writes one row per position."""
        code, _, _ = self.run_cli('study', 'loss', '--n-frames', '12', '--width', '96', '--height', '72',
                                  '--max-k', '3', '--out', self.out)
        self.assertEqual(code, 0)
        table = pd.read_csv(self.only_run_dir() / 'loss.csv')
        self.assertEqual(len(table), 12 - 3 - 1)

    def test_study_buffer_size(self):
        """Test the sweep writes one row per combination."""
        code, _, _ = self.run_cli('study', 'buffer-size', *SMALL, '--policies', 'drop-oldest,random',
                                  '--capacities', '2,4', '--seeds', '0,1', '--out', self.out)
        self.assertEqual(code, 0)
        run_dir = self.only_run_dir()
        self.assertEqual(len(pd.read_csv(run_dir / 'buffer_size.csv')), 8)
        self.assertTrue((run_dir / 'buffer_size.svg').is_file())


class TestExitCodes(CliTestCase):
    """Test error families map to exit codes."""

    def test_parser_knows_every_subcommand(self):
        """Test the parser accepts all subcommands."""
        parser = build_parser()
        self.assertEqual(parser.parse_args(['study', 'loss']).kind, 'loss')
        self.assertEqual(parser.parse_args(['run', '--fast-threshold', '30']).fast_threshold, '30')

    def test_usage_errors(self):
        """Test bad flags and values exit with 1."""
        self.assertEqual(self.run_cli('run', '--no-such-flag')[0], 1)
        self.assertEqual(self.run_cli()[0], 1)
        self.assertEqual(self.run_cli('study', 'nonsense')[0], 1)
        self.assertEqual(self.run_cli('run', '--capacity', '0', '--out', self.out)[0], 1)

    def test_data_error(self):
        """Test a missing sequence directory exits with 2."""
        code, _, err = self.run_cli('run', '--sequence-dir', os.path.join(self.test_dir, 'missing'),
                                    '--out', self.out)
        self.assertEqual(code, 2)
        self.assertTrue(err)

    def test_bad_frame_file(self):
        """Test a corrupt PGM exits with 2."""
        frames = os.path.join(self.test_dir, 'frames')
        os.makedirs(frames)
        Path(frames, '000000.pgm').write_bytes(b'P6\n2 2\n255\n' + bytes(12))
        code, _, _ = self.run_cli('run', '--sequence-dir', frames, '--out', self.out)
        self.assertEqual(code, 2)

    def test_simulation_error(self):
        """Test simulation failures exit with 3."""
        with patch('src.cli.simulate', side_effect=SimulationError('сбой')):
            code, _, err = self.run_cli('run', *SMALL, '--out', self.out)
        self.assertEqual(code, 3)
        self.assertIn('сбой', err)


if __name__ == '__main__':
    unittest.main()
