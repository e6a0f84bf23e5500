from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from plv.exceptions import DataError
from plv.ingest.recording import Recording, FrequencyBand
from plv.utils.formatting import slugify

IMAGINED_SPEECH = 'imagined_speech'
VISUAL_IMAGERY = 'visual_imagery'
PARADIGMS = (IMAGINED_SPEECH, VISUAL_IMAGERY)
TASK = 'task'
REST = 'rest'
CONDITIONS = (TASK, REST)
CLASS_LABELS = (
    'Ambulance', 'Clock', 'Hello', 'Help me', 'Light', 'Pain',
    'Stop', 'Thank you', 'Toilet', 'TV', 'Water', 'Yes')
REST_LABEL = 'REST'
STIMULUS = 'Stimulus'


class NoMatchingMarkersError(DataError):
    pass


class EpochBoundsError(DataError):
    pass


class InvalidEpochsError(DataError):
    pass


def canonical_class_label(text: str) -> str:
    """Maps 'help me', 'help-me' or 'Help me' onto 'Help me'. Raises KeyError for unknown classes."""
    slug = slugify(text)
    for label in CLASS_LABELS + (REST_LABEL,):
        if slugify(label) == slug:
            return label
    raise KeyError(f"unknown class label '{text}'.")


def condition_of(class_label: str) -> str:
    return REST if class_label == REST_LABEL else TASK


def format_marker_description(paradigm: str, class_label: str, condition: str) -> str:
    return f"{paradigm}/{class_label}/{condition}"


def parse_marker_description(description: str) -> Optional[Tuple[str, str, str]]:
    """Returns (paradigm, class label, condition) or None when the description does not describe an epoch."""
    parts = description.split('/')
    if len(parts) != 3:
        return None
    paradigm, class_label, condition = (part.strip() for part in parts)
    if paradigm not in PARADIGMS or condition.lower() not in CONDITIONS:
        return None
    try:
        class_label = canonical_class_label(class_label)
    except KeyError:
        return None
    return paradigm, class_label, condition.lower()


@dataclass(frozen=True)
class EpochWindow:
    """Epoch placement relative to the task onset marker."""
    start_offset_s: float = 0.0
    duration_s: float = 2.0

    def n_samples(self, sampling_rate: float) -> int:
        return int(round(self.duration_s * sampling_rate))

    def offset_samples(self, sampling_rate: float) -> int:
        return int(round(self.start_offset_s * sampling_rate))


def validate_labels(paradigm: str, class_label: str, condition: str) -> None:
    if paradigm not in PARADIGMS:
        raise ValueError(f"the 'paradigm' specified must be one of {PARADIGMS}, got '{paradigm}'.")
    if class_label not in CLASS_LABELS + (REST_LABEL,):
        raise ValueError(f"the 'class_label' specified must be one of {CLASS_LABELS + (REST_LABEL,)}, got '{class_label}'.")
    if condition not in CONDITIONS:
        raise ValueError(f"the 'condition' specified must be one of {CONDITIONS}, got '{condition}'.")


class EpochSet(object):
    """Trials x channels x samples in microvolts, all trials of one paradigm, class and condition."""

    def __init__(
            self, data: np.ndarray, sampling_rate: float, paradigm: str, class_label: str, condition: str,
            window: EpochWindow, channel_labels: Sequence[str], band: Optional[FrequencyBand] = None):
        if not isinstance(data, np.ndarray):
            raise TypeError(f"the 'data' specified was of wrong type {type(data)}, expected {np.ndarray}.")
        if not isinstance(window, EpochWindow):
            raise TypeError(f"the 'window' specified was of wrong type {type(window)}, expected {EpochWindow}.")
        if band is not None and not isinstance(band, FrequencyBand):
            raise TypeError(f"the 'band' specified was of wrong type {type(band)}, expected {FrequencyBand}.")
        validate_labels(paradigm, class_label, condition)
        if data.ndim != 3:
            raise InvalidEpochsError(f"epoch data must be trials x channels x samples, got {data.ndim} dimensions.")
        if data.shape[0] < 1:
            raise InvalidEpochsError("an epoch set needs at least one trial.")
        if data.shape[1] != len(channel_labels):
            raise InvalidEpochsError(f"epoch data has {data.shape[1]} channels but {len(channel_labels)} labels.")
        if not sampling_rate > 0 or not math.isfinite(sampling_rate):
            raise InvalidEpochsError(f"sampling rate must be positive, got {sampling_rate}.")
        if data.shape[2] != window.n_samples(sampling_rate):
            raise InvalidEpochsError(
                f"epochs have {data.shape[2]} samples, a {window.duration_s:g} s window at {sampling_rate:g} Hz "
                f"needs {window.n_samples(sampling_rate)}.")
        self.data: np.ndarray = data
        self.sampling_rate = float(sampling_rate)
        self.paradigm = paradigm
        self.class_label = class_label
        self.condition = condition
        self.window = window
        self.channel_labels: Tuple[str, ...] = tuple(channel_labels)
        self.band = band

    def __str__(self) -> str:
        return f"{self.paradigm}/{self.class_label}/{self.condition} epochs {self.data.shape}"

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    def with_data(self, data: np.ndarray, band: Optional[FrequencyBand] = None) -> EpochSet:
        return EpochSet(
            data=data, sampling_rate=self.sampling_rate, paradigm=self.paradigm, class_label=self.class_label,
            condition=self.condition, window=self.window, channel_labels=self.channel_labels,
            band=band if band is not None else self.band)

    def demeaned(self) -> EpochSet:
        return self.with_data(self.data - self.data.mean(axis=2, keepdims=True))


class PhaseEpochs(object):
    """Instantaneous phase in radians, wrapped to (-pi, pi], aligned with the EpochSet it came from."""

    def __init__(self, phase: np.ndarray, source: EpochSet):
        if not isinstance(phase, np.ndarray):
            raise TypeError(f"the 'phase' specified was of wrong type {type(phase)}, expected {np.ndarray}.")
        if not isinstance(source, EpochSet):
            raise TypeError(f"the 'source' specified was of wrong type {type(source)}, expected {EpochSet}.")
        if phase.shape != source.data.shape:
            raise InvalidEpochsError(f"phase shape {phase.shape} does not match epoch shape {source.data.shape}.")
        if phase.size and (phase.min() <= -np.pi or phase.max() > np.pi):
            raise InvalidEpochsError("phase values must lie in (-pi, pi].")
        self.phase = phase
        self.band = source.band
        self.sampling_rate = source.sampling_rate
        self.paradigm = source.paradigm
        self.class_label = source.class_label
        self.condition = source.condition
        self.window = source.window
        self.channel_labels = source.channel_labels

    @property
    def n_trials(self) -> int:
        return self.phase.shape[0]


def matching_markers(recording: Recording, paradigm: str, class_label: str, condition: str) -> list:
    wanted = (paradigm, class_label, condition)
    return sorted(
        (marker for marker in recording.markers
         if marker.kind == STIMULUS and parse_marker_description(marker.description) == wanted),
        key=lambda marker: marker.sample)


def extract_epochs(
        recording: Recording, paradigm: str, class_label: str, condition: str,
        window: EpochWindow = EpochWindow()) -> EpochSet:
    """Cuts one demeaned trial per matching Stimulus marker, ordered by time."""
    if not isinstance(recording, Recording):
        raise TypeError(f"the 'recording' specified was of wrong type {type(recording)}, expected {Recording}.")
    if not isinstance(window, EpochWindow):
        raise TypeError(f"the 'window' specified was of wrong type {type(window)}, expected {EpochWindow}.")
    validate_labels(paradigm, class_label, condition)
    markers = matching_markers(recording, paradigm, class_label, condition)
    if not markers:
        raise NoMatchingMarkersError(
            f"no '{format_marker_description(paradigm, class_label, condition)}' markers in the {recording}.")
    offset = window.offset_samples(recording.sampling_rate)
    length = window.n_samples(recording.sampling_rate)
    if length < 1:
        raise EpochBoundsError(f"the epoch window of {window.duration_s:g} s holds no samples.")
    trials = []
    for marker in markers:
        start = marker.sample + offset
        if start < 0 or start + length > recording.n_samples:
            raise EpochBoundsError(
                f"the {window.duration_s:g} s window of marker '{marker.description}' at sample {marker.sample} "
                f"exceeds the recording of {recording.n_samples} samples.")
        trials.append(recording.data[:, start:start + length])
    data = np.stack(trials)
    epochs = EpochSet(
        data=data, sampling_rate=recording.sampling_rate, paradigm=paradigm, class_label=class_label,
        condition=condition, window=window, channel_labels=recording.channel_labels)
    return epochs.demeaned()
