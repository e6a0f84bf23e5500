import os
import unittest
import tempfile
import math
from pathlib import Path
from unittest import mock

from plv.config import (
    load_run_config, load_simulation_spec, discover_subjects, analysis_band, format_analysis_config,
    OUTPUT_DIR_VARIABLE)
from plv.exceptions import ConfigurationError
from plv.ingest.recording import DEFAULT_BANDS
from plv.preprocess.epochs import CLASS_LABELS, PARADIGMS, TASK, REST

CONFIGS = Path(__file__).resolve().parent.parent / 'configs'


class TestRunConfig(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)
        self.data = self.path / 'data'
        self.data.mkdir()
        for subject in ('S10', 'S2', 'S1'):
            for paradigm in PARADIGMS:
                (self.data / f"{subject}_{paradigm}.vhdr").touch()

    def tearDown(self):
        self.directory.cleanup()

    def write(self, text: str) -> Path:
        path = self.path / 'analyze.ini'
        path.write_text(text, encoding='utf-8')
        return path

    def test_defaults(self):
        config = load_run_config(self.write("[ingest]\ninput_dir = data\n"))
        self.assertEqual(config.input_format, 'brainvision')
        self.assertEqual(config.input_dir, self.data.resolve())
        self.assertEqual(config.subjects, ('S1', 'S2', 'S10'))
        self.assertEqual(config.paradigms, PARADIGMS)
        self.assertEqual(config.classes, CLASS_LABELS)
        self.assertEqual(config.bands, DEFAULT_BANDS)
        self.assertEqual(config.montage, 'default')
        self.assertEqual((config.edge_exclusion_s, config.alpha, config.correction, config.precision), (0.1, 0.05, 'none', 2))
        self.assertEqual(config.output_dir, self.path.resolve() / 'results')
        self.assertEqual(config.units[:2], [('S1', 'imagined_speech'), ('S1', 'visual_imagery')])
        self.assertEqual(config.labels[-1], ('REST', REST))
        self.assertEqual(config.missing_inputs(), [])

    def test_explicit_values(self):
        config = load_run_config(self.write(
            "[ingest]\ninput_dir = data\nsubjects = S2, S1\nparadigms = visual_imagery\n"
            "classes = help me, Ambulance ; words\nwindow_start_s = 0.5\nwindow_duration_s = 1.5\n"
            "[bands]\nalpha = 8, 13\nfilter_order = 2\n"
            "[stats]\nalpha = 0.01\ncorrection = holm\n"
            "[output]\ndirectory = out\nprecision = 3\n"))
        self.assertEqual(config.subjects, ('S2', 'S1'))
        self.assertEqual(config.paradigms, ('visual_imagery',))
        self.assertEqual(config.classes, ('Ambulance', 'Help me'))
        self.assertEqual(config.labels, [('Ambulance', TASK), ('Help me', TASK), ('REST', REST)])
        self.assertEqual((config.window.start_offset_s, config.window.duration_s), (0.5, 1.5))
        self.assertEqual([band.name for band in config.bands], ['alpha'])
        self.assertEqual(config.filter_order, 2)
        self.assertEqual((config.alpha, config.correction, config.precision), (0.01, 'holm', 3))
        self.assertEqual(config.output_dir, self.path.resolve() / 'out')

    def test_output_directory_override(self):
        override = self.path / 'elsewhere'
        with mock.patch.dict(os.environ, {OUTPUT_DIR_VARIABLE: str(override)}):
            config = load_run_config(self.write("[ingest]\ninput_dir = data\n[output]\ndirectory = out\n"))
        self.assertEqual(config.output_dir, override.resolve())

    def test_every_problem_is_reported(self):
        with self.assertRaises(ConfigurationError) as context:
            load_run_config(self.write(
                "[ingest]\ninput_dir = data\nclasses = Ambulance, Goodbye\n"
                "[bands]\nbroken = 13, 8\nalso = x\n"
                "[stats]\nalpha = 1.5\ncorrection = sidak\n"
                "[output]\nprecision = -1\n"))
        self.assertEqual(len(context.exception.problems), 6)
        self.assertIn("6 configuration problems", str(context.exception))

    def test_csv_needs_a_sampling_rate(self):
        (self.data / 'S1_imagined_speech_ambulance_task.csv').touch()
        (self.data / 'S2_imagined_speech_ambulance_task.csv').touch()
        with self.assertRaises(ConfigurationError) as context:
            load_run_config(self.write("[ingest]\nformat = csv\ninput_dir = data\nparadigms = imagined_speech\n"))
        self.assertEqual(len(context.exception.problems), 1)
        config = load_run_config(self.write(
            "[ingest]\nformat = csv\ninput_dir = data\nparadigms = imagined_speech\nsampling_rate = 250\n"))
        self.assertEqual(config.subjects, ('S1', 'S2'))
        self.assertEqual(config.sampling_rate, 250.0)
        self.assertEqual(config.epochs_path('S1', 'imagined_speech', 'Thank you', TASK).name,
                         'S1_imagined_speech_thank-you_task.csv')
        # twelve task classes and the rest class per subject, two of them present
        self.assertEqual(len(config.missing_inputs()), 2 * 13 - 2)

    def test_needs_two_subjects(self):
        with self.assertRaises(ConfigurationError):
            load_run_config(self.write("[ingest]\ninput_dir = data\nsubjects = S1\n"))

    def test_edge_exclusion_must_fit_the_window(self):
        with self.assertRaises(ConfigurationError):
            load_run_config(self.write("[ingest]\ninput_dir = data\nwindow_duration_s = 0.2\n[regions]\nedge_exclusion_s = 0.1\n"))

    def test_missing_paths(self):
        with self.assertRaises(ConfigurationError):
            load_run_config(self.path / 'absent.ini')
        with self.assertRaises(ConfigurationError):
            load_run_config(self.write("[ingest]\ninput_dir = nowhere\n"))
        with self.assertRaises(ConfigurationError):
            load_run_config(self.write("[ingest]\ninput_dir = data\n[regions]\nmontage = nowhere.csv\n"))
        with self.assertRaises(ConfigurationError):
            load_run_config(self.write("[ingest\ninput_dir = data\n"))

    def test_discover_subjects(self):
        self.assertEqual(discover_subjects(self.data, 'brainvision', ['visual_imagery']), ('S1', 'S2', 'S10'))
        self.assertEqual(discover_subjects(self.data, 'csv', PARADIGMS), ())


class TestSimulationSpec(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def write(self, text: str) -> Path:
        path = self.path / 'simulate.ini'
        path.write_text(text, encoding='utf-8')
        return path

    def test_shipped_specs(self):
        simulation = load_simulation_spec(CONFIGS / 'simulate_default.ini')
        self.assertEqual(len(simulation.channel_labels), 64)
        self.assertEqual(simulation.subjects, ('S1',))
        self.assertEqual(simulation.seed, 20211)
        self.assertEqual(simulation.conditions, (TASK,))
        pairs = {(pair.source, pair.target): pair.kappa for pair in simulation.task.pairs}
        self.assertEqual(pairs[('F7', 'T7')], 2.0)
        self.assertTrue(math.isinf(pairs[('Fp1', 'Fp2')]))
        study = load_simulation_spec(CONFIGS / 'simulate_study.ini')
        self.assertEqual(len(study.subjects), 16)
        self.assertEqual(study.subjects[-1], 'S16')
        self.assertEqual(study.paradigms, PARADIGMS)
        self.assertEqual(study.task.hub, 'Fz')
        self.assertEqual(dict(study.task.region_kappas), {'B': 0.7, 'A': 0.7})
        self.assertEqual(study.conditions, (TASK, REST))
        self.assertTrue(study.write_config)

    def test_custom_montage_and_channels(self):
        (self.path / 'montage.csv').write_text("B1,B\nB2,B\nV1,V\nV2,V\n", encoding='utf-8')
        simulation = load_simulation_spec(self.write(
            "[simulation]\nmontage = montage.csv\nsubjects = P1, P2\nclasses = Yes, tv\nformat = both\n"
            "[coupling.task]\npairs = B1-B2:1.5, V1-V2:inf\n"))
        self.assertEqual(simulation.channel_labels, ('B1', 'B2', 'V1', 'V2'))
        self.assertEqual(simulation.subjects, ('P1', 'P2'))
        self.assertEqual(simulation.classes, ('TV', 'Yes'))
        self.assertTrue(simulation.writes_brainvision and simulation.writes_csv)
        self.assertEqual(simulation.montage_source, str((self.path / 'montage.csv').resolve()))
        simulation = load_simulation_spec(self.write("[simulation]\nchannels = F7, T7, O1, O2\n"))
        self.assertEqual(simulation.channel_labels, ('F7', 'T7', 'O1', 'O2'))
        self.assertEqual(simulation.montage.region_of('F7'), 'B')

    def test_every_problem_is_reported(self):
        with self.assertRaises(ConfigurationError) as context:
            load_simulation_spec(self.write(
                "[simulation]\nn_trials = 1\nformat = edf\nsubjects = 0\n"
                "[coupling.task]\npairs = F7T7, F7-T7:x\ncolour = red\n"))
        self.assertEqual(len(context.exception.problems), 6)
        with self.assertRaises(ConfigurationError):
            load_simulation_spec(self.write("[coupling.task]\nhub = Fz\n"))
        with self.assertRaises(ConfigurationError):
            load_simulation_spec(self.write("[simulation]\nsampling_rate = 15\n"))
        with self.assertRaises(ConfigurationError):
            load_simulation_spec(self.write("[simulation]\n[coupling.task]\nhub = Nowhere\n"))

    def test_analysis_config_is_loadable(self):
        simulation = load_simulation_spec(self.write(
            "[simulation]\nsubjects = 2\nclasses = Yes, TV\nformat = csv\nduration_s = 1.5\n[coupling.rest]\nhub = Fz\n"))
        text = format_analysis_config(simulation)
        path = self.path / 'analyze.ini'
        path.write_text(text, encoding='utf-8')
        config = load_run_config(path)
        self.assertEqual(config.input_format, 'csv')
        self.assertEqual(config.subjects, ('S1', 'S2'))
        self.assertEqual(config.paradigms, ('imagined_speech',))
        self.assertEqual(config.classes, ('TV', 'Yes'))
        self.assertEqual(config.sampling_rate, 250.0)
        self.assertEqual(config.window.duration_s, 1.5)
        self.assertEqual([band.name for band in config.bands], ['alpha'])
        self.assertEqual(config.output_dir, self.path.resolve() / 'results')

    def test_analysis_band(self):
        self.assertEqual(analysis_band(10.0).name, 'alpha')
        self.assertEqual(analysis_band(6.0).name, 'theta')
        carrier = analysis_band(60.0)
        self.assertEqual((carrier.low_hz, carrier.high_hz), (58.0, 62.0))
