from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Optional, Any

import numpy as np

from plv.exceptions import ConfigurationError, DataError
from plv.utils.iterable import duplicates


class InvalidRecordingError(DataError):
    pass


class InvalidBandError(ConfigurationError):
    pass


@dataclass(frozen=True)
class Marker:
    """An event marker. sample is a 0-based index into the recording."""
    sample: int
    kind: str
    description: str


@dataclass(frozen=True)
class FrequencyBand:
    name: str
    low_hz: float
    high_hz: float

    def __str__(self) -> str:
        return f"{self.name} ({self.low_hz:g}-{self.high_hz:g} Hz)"

    def problems(self, sampling_rate: float = None) -> list:
        """Returns a list of everything wrong with the band, checked against the Nyquist frequency when a sampling rate is given."""
        found = []
        if not self.name:
            found.append("a frequency band has an empty name.")
        if not (math.isfinite(self.low_hz) and math.isfinite(self.high_hz)):
            found.append(f"the band '{self.name}' has non-finite edges.")
        elif self.low_hz <= 0:
            found.append(f"the band '{self.name}' must have a positive lower edge, got {self.low_hz:g} Hz.")
        elif self.low_hz >= self.high_hz:
            found.append(f"the band '{self.name}' must satisfy low < high, got {self.low_hz:g}-{self.high_hz:g} Hz.")
        elif sampling_rate is not None and self.high_hz >= sampling_rate / 2:
            found.append(
                f"the band '{self.name}' upper edge {self.high_hz:g} Hz is not below the Nyquist frequency "
                f"{sampling_rate / 2:g} Hz.")
        return found

    def validate(self, sampling_rate: float = None) -> None:
        found = self.problems(sampling_rate)
        if found:
            raise InvalidBandError(found)


DEFAULT_BANDS = (
    FrequencyBand('theta', 4.0, 8.0),
    FrequencyBand('alpha', 8.0, 13.0),
    FrequencyBand('beta', 13.0, 30.0),
    FrequencyBand('gamma', 30.0, 45.0))


class Recording(object):
    """Continuous multichannel EEG in microvolts, channels x samples."""

    def __init__(
            self, channel_labels: Sequence[str], sampling_rate: float, data: np.ndarray,
            markers: Sequence[Marker] = (), header: Optional[Any] = None):
        if not isinstance(channel_labels, (list, tuple)):
            raise TypeError(f"the 'channel_labels' specified was of wrong type {type(channel_labels)}, expected {list} or {tuple}.")
        if not all(isinstance(label, str) for label in channel_labels):
            raise TypeError(f"the 'channel_labels' specified must only contain strings.")
        if not isinstance(sampling_rate, (int, float)):
            raise TypeError(f"the 'sampling_rate' specified was of wrong type {type(sampling_rate)}, expected {float}.")
        if not isinstance(data, np.ndarray):
            raise TypeError(f"the 'data' specified was of wrong type {type(data)}, expected {np.ndarray}.")
        if not all(isinstance(marker, Marker) for marker in markers):
            raise TypeError(f"the 'markers' specified must only contain {Marker}.")
        if data.ndim != 2:
            raise InvalidRecordingError(f"recording data must be a channels x samples matrix, got {data.ndim} dimensions.")
        if data.shape[0] != len(channel_labels):
            raise InvalidRecordingError(
                f"recording has {data.shape[0]} data channels but {len(channel_labels)} channel labels.")
        repeated = duplicates(channel_labels)
        if repeated:
            raise InvalidRecordingError(f"recording channel labels are not unique: {repeated}.")
        if not sampling_rate > 0 or not math.isfinite(sampling_rate):
            raise InvalidRecordingError(f"recording sampling rate must be positive, got {sampling_rate}.")
        for marker in markers:
            if not 0 <= marker.sample < data.shape[1]:
                raise InvalidRecordingError(
                    f"marker '{marker.kind},{marker.description}' at sample {marker.sample} lies outside the "
                    f"recording of {data.shape[1]} samples.")
        self.channel_labels: Tuple[str, ...] = tuple(channel_labels)
        self.sampling_rate: float = float(sampling_rate)
        self.data: np.ndarray = np.asarray(data, dtype=np.float64)
        self.markers: Tuple[Marker, ...] = tuple(markers)
        # the parsed file header, kept so a reloaded recording is written back the same way
        self.header = header

    def __str__(self) -> str:
        return f"recording with {self.n_channels} channels, {self.n_samples} samples at {self.sampling_rate:g} Hz, {len(self.markers)} markers"

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]
