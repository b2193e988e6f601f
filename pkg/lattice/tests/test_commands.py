import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase


class SimulateCommandTests(SimpleTestCase):

    def test_snapshots_and_manifest(self):
        with tempfile.TemporaryDirectory() as tmp:
            call_command('simulate', '--t', '1', '--snapshot-every', '0.5', '--out', tmp, stdout=StringIO())
            out = Path(tmp)
            self.assertTrue((out / 'snapshot_t0.5.csv').exists())
            final = pd.read_csv(out / 'snapshot_t1.csv')
            manifest = (out / 'manifest.txt').read_text()
        self.assertEqual(list(final.columns), ['n', 'a', 'b'])
        self.assertIn(f"n_min={final['n'].iloc[0]}", manifest)
        self.assertIn('dt=0.01', manifest)

    def test_non_positive_time(self):
        with self.assertRaises(CommandError):
            call_command('simulate', '--t', '0', stdout=StringIO())
