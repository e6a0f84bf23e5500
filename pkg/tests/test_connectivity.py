import unittest
import itertools

import numpy as np
import pandas as pd

from plv.connectivity import (
    plv_timeseries, plv_pair, plv_matrix, region_average, region_pair_mask, class_table, edge_exclusion_samples,
    pair_label, PlvMatrix, TIME_CHUNK, AVERAGE_ROW, STD_ROW,
    InsufficientTrialsError, EdgeExclusionError, EmptyRegionError, IncompleteGridError)
from plv.ingest.montage import Montage, ALL, REGIONS, REGION_PAIRS
from plv.preprocess.epochs import EpochSet, EpochWindow, PhaseEpochs
from plv.utils.formatting import round_half_up

from tests.test_stats import AMBULANCE, HELP_ME

# two channels per region, montage order
LABELS = tuple(f"{region}{index}" for region in REGIONS for index in (1, 2))
MAPPING = {label: label[0] for label in LABELS}


def random_phases(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, shape)


def naive_plv(phases: np.ndarray, i: int, k: int, edge_exclusion: int) -> float:
    n_trials, _, n_samples = phases.shape
    total = 0.0
    for t in range(edge_exclusion, n_samples - edge_exclusion):
        total += abs(sum(np.exp(1j * (phases[n, i, t] - phases[n, k, t])) for n in range(n_trials))) / n_trials
    return total / (n_samples - 2 * edge_exclusion)


class TestPlv(unittest.TestCase):

    def test_identical_and_opposite_phases(self):
        phases = np.zeros((2, 2, 10))
        phases[:, 1, :] = 0.7
        np.testing.assert_allclose(plv_timeseries(phases, 0, 1), 1.0)
        phases[1, 1, :] = 0.7 + np.pi
        np.testing.assert_allclose(plv_timeseries(phases, 0, 1), 0.0, atol=1e-12)

    def test_bounds_and_identities(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            n_trials, n_channels, n_samples = rng.integers(2, 6), rng.integers(2, 5), rng.integers(4, 17)
            phases = random_phases(rng, (n_trials, n_channels, n_samples))
            matrix = plv_matrix(phases, 1).values
            self.assertTrue(np.all((matrix >= 0) & (matrix <= 1)))
            self.assertTrue(np.array_equal(matrix, matrix.T))
            self.assertTrue(np.all(np.diag(matrix) == 1.0))
        phases = random_phases(rng, (5, 4, 16))
        rotated = phases + rng.uniform(-np.pi, np.pi)
        np.testing.assert_allclose(plv_matrix(rotated, 1).values, plv_matrix(phases, 1).values, atol=1e-12)

    def test_pair_identities(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n_trials, n_channels, n_samples = rng.integers(2, 8), rng.integers(2, 5), rng.integers(4, 40)
            phases = random_phases(rng, (n_trials, n_channels, n_samples))
            i, k = rng.choice(n_channels, 2, replace=False)
            self.assertEqual(plv_pair(phases, i, i, 1), 1.0)
            self.assertEqual(plv_pair(phases, i, k, 1), plv_pair(phases, k, i, 1))
            shuffled = phases[rng.permutation(n_trials)]
            self.assertAlmostEqual(plv_pair(shuffled, i, k, 1), plv_pair(phases, i, k, 1), delta=1e-12)
            np.testing.assert_allclose(plv_matrix(shuffled, 1).values, plv_matrix(phases, 1).values, atol=1e-12)

    def test_matrix_matches_naive_reference(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            n_trials, n_channels, n_samples = rng.integers(2, 6), rng.integers(2, 5), rng.integers(3, 17)
            edge_exclusion = int(rng.integers(0, (n_samples - 1) // 2 + 1))
            phases = random_phases(rng, (n_trials, n_channels, n_samples))
            matrix = plv_matrix(phases, edge_exclusion).values
            for i, k in itertools.combinations(range(n_channels), 2):
                self.assertAlmostEqual(matrix[i, k], naive_plv(phases, i, k, edge_exclusion), delta=1e-12)

    def test_matrix_spans_time_chunks(self):
        rng = np.random.default_rng(23)
        phases = random_phases(rng, (20, 5, 2 * TIME_CHUNK + 30))
        matrix = plv_matrix(phases, 10)
        self.assertEqual(matrix.n_pairs, 10)
        for i, k in itertools.combinations(range(5), 2):
            self.assertAlmostEqual(matrix.values[i, k], plv_pair(phases, i, k, 10), places=12)

    def test_independent_phases_are_unlocked(self):
        rng = np.random.default_rng(31)
        phases = random_phases(rng, (2000, 2, 20))
        self.assertLess(plv_pair(phases, 0, 1, 0), 0.05)

    def test_metadata_follows_phase_epochs(self):
        window = EpochWindow(0.0, 0.08)
        epochs = EpochSet(
            data=np.zeros((3, 2, 20)), sampling_rate=250.0, paradigm='visual_imagery', class_label='Water',
            condition='task', window=window, channel_labels=('Fz', 'Cz'))
        phases = PhaseEpochs(random_phases(np.random.default_rng(0), (3, 2, 20)), epochs)
        matrix = plv_matrix(phases, 2)
        self.assertEqual(matrix.channel_labels, ('Fz', 'Cz'))
        self.assertEqual((matrix.paradigm, matrix.class_label, matrix.condition), ('visual_imagery', 'Water', 'task'))

    def test_invalid_inputs(self):
        phases = np.zeros((1, 2, 20))
        with self.assertRaises(InsufficientTrialsError):
            plv_pair(phases, 0, 1, 0)
        phases = np.zeros((3, 2, 20))
        with self.assertRaises(EdgeExclusionError):
            plv_pair(phases, 0, 1, 10)
        with self.assertRaises(EdgeExclusionError):
            plv_matrix(phases, -1)
        with self.assertRaises(TypeError):
            plv_matrix(phases, 1.5)
        with self.assertRaises(ValueError):
            plv_matrix(np.zeros((3, 20)), 0)

    def test_edge_exclusion_samples(self):
        self.assertEqual(edge_exclusion_samples(0.1, 250), 25)
        self.assertEqual(edge_exclusion_samples(0.1, 256), 26)
        self.assertEqual(edge_exclusion_samples(0.0, 250), 0)


class TestRegionAverage(unittest.TestCase):

    def setUp(self):
        self.montage = Montage(LABELS, MAPPING)
        n = len(LABELS)
        values = np.arange(n * n, dtype=np.float64).reshape(n, n) / (n * n)
        values = np.triu(values, 1) + np.triu(values, 1).T
        np.fill_diagonal(values, 1.0)
        self.matrix = PlvMatrix(values=values, channel_labels=LABELS)

    def test_cross_region(self):
        result = region_average(self.matrix, self.montage, 'B', 'V')
        self.assertEqual(result.n_pairs, 4)
        self.assertEqual(result.label, 'B-V')
        expected = np.mean([self.matrix.values[i, k] for i in (0, 1) for k in (2, 3)])
        self.assertAlmostEqual(result.value, expected, places=12)

    def test_within_region_and_all(self):
        within = region_average(self.matrix, self.montage, 'M', 'M')
        self.assertEqual(within.n_pairs, 1)
        self.assertAlmostEqual(within.value, self.matrix.values[6, 7], places=12)
        everything = region_average(self.matrix, self.montage, ALL, ALL)
        self.assertEqual(everything.n_pairs, 66)
        self.assertAlmostEqual(everything.value, self.matrix.values[np.triu_indices(12, 1)].mean(), places=12)

    def test_mask_is_upper_triangle(self):
        for a, b in REGION_PAIRS:
            mask = region_pair_mask(self.montage, LABELS, a, b)
            self.assertFalse(np.tril(mask).any())
            self.assertEqual(int(mask.sum()), 4)

    def test_empty_region(self):
        mapping = {label: region for label, region in MAPPING.items() if region != 'S'}
        montage = Montage(LABELS, mapping)
        self.assertEqual(montage.region_of('S1'), 'NONE')
        with self.assertRaises(EmptyRegionError):
            region_average(self.matrix, montage, 'B', 'S')
        with self.assertRaises(ValueError):
            region_average(self.matrix, montage, 'B', 'X')


class TestClassTable(unittest.TestCase):

    def test_published_columns(self):
        subjects = [f"S{index}" for index in range(1, 17)]
        grid = pd.DataFrame({'Ambulance': AMBULANCE, 'Help me': HELP_ME}, index=subjects)
        table = class_table(grid)
        self.assertEqual(list(table.index), subjects + [AVERAGE_ROW, STD_ROW])
        self.assertEqual(table.index.name, 'subject')
        self.assertEqual(round_half_up(table.loc[AVERAGE_ROW, 'Ambulance'], 2), '0.28')
        self.assertEqual(round_half_up(table.loc[STD_ROW, 'Ambulance'], 2), '0.06')
        self.assertEqual(round_half_up(table.loc[AVERAGE_ROW, 'Help me'], 2), '0.30')
        self.assertEqual(round_half_up(table.loc[STD_ROW, 'Help me'], 2), '0.11')

    def test_identical_values(self):
        table = class_table({'S1': {'Yes': 0.25, 'TV': 0.4}, 'S2': {'Yes': 0.25, 'TV': 0.4}})
        self.assertEqual(round_half_up(table.loc[STD_ROW, 'Yes'], 2), '0.00')
        self.assertEqual(round_half_up(table.loc[STD_ROW, 'TV'], 2), '0.00')

    def test_missing_cell(self):
        with self.assertRaises(IncompleteGridError):
            class_table({'S1': {'Yes': 0.25, 'TV': 0.4}, 'S2': {'Yes': 0.25}})
        with self.assertRaises(IncompleteGridError):
            class_table(pd.DataFrame())

    def test_pair_label(self):
        self.assertEqual(pair_label(ALL, ALL), 'ALL-ALL')
