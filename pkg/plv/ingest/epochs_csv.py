"""
Epoch interchange as long-format CSV: header trial,channel,sample,value_uv, one row per cell, UTF-8 with LF line endings.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from plv.exceptions import DataError
from plv.ingest.brainvision import ParseError, MissingFileError
from plv.preprocess.epochs import EpochSet, EpochWindow
from plv.utils.formatting import slugify

COLUMNS = ('trial', 'channel', 'sample', 'value_uv')


class DuplicateCellError(DataError):
    pass


class MissingCellError(DataError):
    pass


@dataclass(frozen=True)
class EpochLayout:
    """What an epoch CSV holds. A CSV carries cells only, so the metadata comes from here."""
    sampling_rate: float
    paradigm: str
    class_label: str
    condition: str
    channel_labels: Optional[Tuple[str, ...]] = None
    start_offset_s: float = 0.0


def _index_column(frame: pd.DataFrame, column: str, file_name: str) -> np.ndarray:
    values = frame[column].astype(np.float64).to_numpy()
    if not np.all(np.isfinite(values)) or not np.array_equal(values, np.round(values)):
        raise ParseError(column, f"{file_name} holds a {column} index that is not a whole number.")
    return values.astype(np.int64)


def load_epochs_csv(path: Union[Path, str], layout: EpochLayout) -> EpochSet:
    if not isinstance(path, (Path, str)):
        raise TypeError(f"the 'path' specified was of wrong type {type(path)}, expected {Path} or {str}.")
    if not isinstance(layout, EpochLayout):
        raise TypeError(f"the 'layout' specified was of wrong type {type(layout)}, expected {EpochLayout}.")
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"file not found: {path}")
    try:
        frame = pd.read_csv(
            path, dtype={'channel': str}, keep_default_na=False, encoding='utf-8',
            float_precision='round_trip')
    except (ValueError, pd.errors.ParserError) as exception:
        raise ParseError('csv', f"{path.name} could not be parsed: {exception}") from None
    if tuple(frame.columns) != COLUMNS:
        raise ParseError('header', f"{path.name} must have the header {','.join(COLUMNS)}, got {','.join(map(str, frame.columns))}.")
    if frame.empty:
        raise MissingCellError(f"{path.name} holds no cells.")
    try:
        trials = _index_column(frame, 'trial', path.name)
        samples = _index_column(frame, 'sample', path.name)
        values = frame['value_uv'].astype(np.float64).to_numpy()
    except (ValueError, TypeError) as exception:
        raise ParseError('value', f"{path.name} holds a non-numeric trial, sample or value: {exception}") from None
    channels = frame['channel'].to_numpy(dtype=object)
    keys = frame[['trial', 'channel', 'sample']]
    duplicated = keys.duplicated()
    if duplicated.any():
        trial, channel, sample = keys[duplicated].iloc[0]
        raise DuplicateCellError(f"{path.name} holds trial {trial}, channel '{channel}', sample {sample} more than once.")
    # dense tensor layout
    trial_ids = np.unique(trials)
    sample_ids = np.unique(samples)
    if sample_ids[0] != 0 or not np.array_equal(sample_ids, np.arange(len(sample_ids))):
        raise MissingCellError(f"{path.name} sample indices must run 0..T-1 without gaps.")
    if layout.channel_labels is not None:
        channel_labels = tuple(layout.channel_labels)
        unknown = sorted(set(channels) - set(channel_labels))
        if unknown:
            raise MissingCellError(f"{path.name} holds channels not in the layout: {unknown}.")
    else:
        channel_labels = tuple(pd.unique(channels))
    n_expected = len(trial_ids) * len(channel_labels) * len(sample_ids)
    if len(frame) != n_expected:
        raise MissingCellError(
            f"{path.name} holds {len(frame)} cells, a dense {len(trial_ids)} x {len(channel_labels)} x "
            f"{len(sample_ids)} tensor needs {n_expected}.")
    channel_index = {label: index for index, label in enumerate(channel_labels)}
    data = np.empty((len(trial_ids), len(channel_labels), len(sample_ids)), dtype=np.float64)
    data[np.searchsorted(trial_ids, trials), [channel_index[channel] for channel in channels], samples] = values
    window = EpochWindow(start_offset_s=layout.start_offset_s, duration_s=len(sample_ids) / layout.sampling_rate)
    return EpochSet(
        data=data, sampling_rate=layout.sampling_rate, paradigm=layout.paradigm,
        class_label=layout.class_label, condition=layout.condition, window=window,
        channel_labels=channel_labels)


def write_epochs_csv(epochs: EpochSet, path: Union[Path, str]) -> Path:
    if not isinstance(epochs, EpochSet):
        raise TypeError(f"the 'epochs' specified was of wrong type {type(epochs)}, expected {EpochSet}.")
    path = Path(path)
    trial, channel, sample = np.indices(epochs.data.shape).reshape(3, -1)
    frame = pd.DataFrame({
        'trial': trial,
        'channel': np.asarray(epochs.channel_labels, dtype=object)[channel],
        'sample': sample,
        'value_uv': epochs.data.reshape(-1)})
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    return path


def epoch_csv_name(subject: str, paradigm: str, class_label: str, condition: str) -> str:
    return f"{subject}_{paradigm}_{slugify(class_label)}_{condition}.csv"
