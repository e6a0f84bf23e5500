"""
Phase-locking value across trials, channel-pair matrices and their grand averages over region groups.
"""
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from plv.exceptions import ConfigurationError, DataError
from plv.ingest.montage import Montage, REGIONS, REGION_PAIRS, ALL
from plv.ingest.recording import FrequencyBand
from plv.preprocess.epochs import PhaseEpochs
from plv.stats import summarize
from plv.utils.iterable import chunk_ranges

# samples per batched matrix product in plv_matrix
TIME_CHUNK = 64
AVERAGE_ROW = 'Avg.'
STD_ROW = 'Std.'


class InsufficientTrialsError(DataError):
    pass


class EdgeExclusionError(ConfigurationError):
    pass


class EmptyRegionError(ConfigurationError):
    pass


class IncompleteGridError(DataError):
    pass


def pair_label(a: str, b: str) -> str:
    return f"{a}-{b}"


def edge_exclusion_samples(edge_exclusion_s: float, sampling_rate: float) -> int:
    """Number of samples dropped at each epoch edge before averaging over time."""
    return int(math.ceil(round(edge_exclusion_s * sampling_rate, 9)))


def _phase_tensor(phases: Union[PhaseEpochs, np.ndarray]) -> np.ndarray:
    if isinstance(phases, PhaseEpochs):
        tensor = phases.phase
    elif isinstance(phases, np.ndarray):
        tensor = phases
    else:
        raise TypeError(f"the 'phases' specified was of wrong type {type(phases)}, expected {PhaseEpochs} or {np.ndarray}.")
    if tensor.ndim != 3:
        raise ValueError(f"the 'phases' specified must be trials x channels x samples, got {tensor.ndim} dimensions.")
    if tensor.shape[0] < 2:
        raise InsufficientTrialsError(f"phase locking needs at least 2 trials, got {tensor.shape[0]}.")
    return tensor


def _interior(n_samples: int, edge_exclusion: int) -> slice:
    if not isinstance(edge_exclusion, (int, np.integer)):
        raise TypeError(f"the 'edge_exclusion' specified was of wrong type {type(edge_exclusion)}, expected {int}.")
    if edge_exclusion < 0:
        raise EdgeExclusionError(f"edge exclusion must not be negative, got {edge_exclusion}.")
    if 2 * edge_exclusion >= n_samples:
        raise EdgeExclusionError(
            f"an edge exclusion of {edge_exclusion} samples leaves nothing of {n_samples}-sample epochs.")
    return slice(edge_exclusion, n_samples - edge_exclusion)


def plv_timeseries(phases: Union[PhaseEpochs, np.ndarray], i: int, k: int) -> np.ndarray:
    """PLV(t) = |sum_n exp(j(phi_i(t, n) - phi_k(t, n)))| / N for every sample t."""
    tensor = _phase_tensor(phases)
    theta = tensor[:, i, :] - tensor[:, k, :]
    locking = np.hypot(np.cos(theta).sum(axis=0), np.sin(theta).sum(axis=0)) / tensor.shape[0]
    return np.minimum(locking, 1.0)


def plv_pair(phases: Union[PhaseEpochs, np.ndarray], i: int, k: int, edge_exclusion: int) -> float:
    """Mean of plv_timeseries over the samples left after dropping edge_exclusion samples at both ends."""
    tensor = _phase_tensor(phases)
    interior = _interior(tensor.shape[2], edge_exclusion)
    return float(plv_timeseries(tensor[:, :, interior], i, k).mean())


@dataclass(frozen=True)
class PlvMatrix:
    values: np.ndarray
    channel_labels: Tuple[str, ...]
    band: Optional[FrequencyBand] = None
    paradigm: Optional[str] = None
    class_label: Optional[str] = None
    condition: Optional[str] = None

    @property
    def n_pairs(self) -> int:
        n = len(self.channel_labels)
        return n * (n - 1) // 2


def plv_matrix(phases: Union[PhaseEpochs, np.ndarray], edge_exclusion: int) -> PlvMatrix:
    """
    plv_pair for every unordered channel pair at once. The trial sums are batched products of the unit phasors,
    one channels x channels product per sample. The upper triangle is mirrored and the diagonal is 1.
    """
    tensor = _phase_tensor(phases)
    n_trials, n_channels, n_samples = tensor.shape
    interior = _interior(n_samples, edge_exclusion)
    phasors = np.exp(1j * tensor[:, :, interior])
    n_interior = phasors.shape[2]
    total = np.zeros((n_channels, n_channels), dtype=np.float64)
    for start, stop in chunk_ranges(n_interior, TIME_CHUNK):
        # (samples, channels, trials)
        block = np.ascontiguousarray(phasors[:, :, start:stop].transpose(2, 1, 0))
        sums = block @ block.conj().transpose(0, 2, 1)
        total += np.abs(sums).sum(axis=0)
    values = np.clip(total / (n_trials * n_interior), 0.0, 1.0)
    upper = np.triu(values, k=1)
    values = upper + upper.T
    np.fill_diagonal(values, 1.0)
    if isinstance(phases, PhaseEpochs):
        return PlvMatrix(
            values=values, channel_labels=tuple(phases.channel_labels), band=phases.band,
            paradigm=phases.paradigm, class_label=phases.class_label, condition=phases.condition)
    return PlvMatrix(values=values, channel_labels=tuple(str(index) for index in range(n_channels)))


@dataclass(frozen=True)
class RegionConnectivity:
    pair: Tuple[str, str]
    value: float
    n_pairs: int

    @property
    def label(self) -> str:
        return pair_label(*self.pair)


def region_pair_mask(montage: Montage, channel_labels: Sequence[str], a: str, b: str) -> np.ndarray:
    """Upper-triangle mask of the unordered channel pairs (i, k), i != k, with one channel in a and the other in b."""
    in_a = montage.membership(a, channel_labels)
    in_b = montage.membership(b, channel_labels)
    mask = np.outer(in_a, in_b) | np.outer(in_b, in_a)
    return np.triu(mask, k=1)


def region_average(matrix: PlvMatrix, montage: Montage, a: str, b: str) -> RegionConnectivity:
    """Grand average of the matrix over all channel pairs within a (a == b) or between a and b."""
    if not isinstance(matrix, PlvMatrix):
        raise TypeError(f"the 'matrix' specified was of wrong type {type(matrix)}, expected {PlvMatrix}.")
    if not isinstance(montage, Montage):
        raise TypeError(f"the 'montage' specified was of wrong type {type(montage)}, expected {Montage}.")
    for region in (a, b):
        if region != ALL and region not in REGIONS:
            raise ValueError(f"unknown region '{region}', expected one of {REGIONS + (ALL,)}.")
        if not montage.membership(region, matrix.channel_labels).any():
            raise EmptyRegionError(f"region {region} has no channels in the matrix.")
    mask = region_pair_mask(montage, matrix.channel_labels, a, b)
    n_pairs = int(mask.sum())
    if n_pairs == 0:
        raise EmptyRegionError(f"regions {a} and {b} share no channel pair.")
    value = float(np.clip(matrix.values[mask].mean(), 0.0, 1.0))
    return RegionConnectivity(pair=(a, b), value=value, n_pairs=n_pairs)


def class_table(values: Union[pd.DataFrame, Mapping[str, Mapping[str, float]]]) -> pd.DataFrame:
    """
    Subjects x classes grid of per-subject connectivity, extended by an 'Avg.' row and an 'Std.' row
    holding the column mean and sample standard deviation. Every cell must be present.
    """
    if isinstance(values, pd.DataFrame):
        grid = values.copy()
    elif isinstance(values, Mapping):
        grid = pd.DataFrame.from_dict({subject: dict(row) for subject, row in values.items()}, orient='index')
    else:
        raise TypeError(f"the 'values' specified was of wrong type {type(values)}, expected {pd.DataFrame} or {Mapping}.")
    if grid.empty:
        raise IncompleteGridError("the class grid is empty.")
    grid = grid.astype(np.float64)
    missing = grid.isna()
    if missing.any().any():
        subject, class_label = next((row, column) for row, column in zip(*np.nonzero(missing.to_numpy())))
        raise IncompleteGridError(
            f"the class grid has no value for subject {grid.index[subject]}, class {grid.columns[class_label]}.")
    averages: Dict[str, float] = {}
    deviations: Dict[str, float] = {}
    for column in grid.columns:
        averages[column], deviations[column] = summarize(grid[column].to_numpy())
    table = pd.concat([grid, pd.DataFrame([averages, deviations], index=[AVERAGE_ROW, STD_ROW])])
    table.index.name = 'subject'
    return table
