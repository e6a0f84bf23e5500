"""
Channel to region assignment. A montage file holds CHANNEL_LABEL,REGION_TAG lines, '#' starts a comment.
"""
from __future__ import annotations
import itertools
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from plv.exceptions import ConfigurationError
from plv.ingest.recording import Recording
from plv.utils.iterable import duplicates

# Broca/Wernicke, visual, auditory, motor, prefrontal, sensory
REGIONS: Tuple[str, ...] = ('B', 'V', 'A', 'M', 'P', 'S')
ALL = 'ALL'
NONE = 'NONE'
TAGS = REGIONS + (NONE,)
# B-V, B-A, ..., P-S
REGION_PAIRS: Tuple[Tuple[str, str], ...] = tuple(itertools.combinations(REGIONS, 2))
DEFAULT_MONTAGE = 'default'
DEFAULT_MONTAGE_PATH = Path(__file__).resolve().parent.parent / 'data' / 'default_montage.csv'


class MontageError(ConfigurationError):
    pass


class Montage(object):
    """Total map from channel label to region tag. Every populated region holds at least two channels."""

    def __init__(self, channel_labels: Sequence[str], channel_to_region: Mapping[str, str]):
        if not isinstance(channel_labels, (list, tuple)):
            raise TypeError(f"the 'channel_labels' specified was of wrong type {type(channel_labels)}, expected {list} or {tuple}.")
        if not isinstance(channel_to_region, Mapping):
            raise TypeError(f"the 'channel_to_region' specified was of wrong type {type(channel_to_region)}, expected {Mapping}.")
        problems = montage_problems(channel_labels, channel_to_region)
        if problems:
            raise MontageError(problems)
        self.channel_labels: Tuple[str, ...] = tuple(channel_labels)
        self.channel_to_region: Dict[str, str] = {
            label: channel_to_region.get(label, NONE) for label in self.channel_labels}

    def __str__(self) -> str:
        sizes = ', '.join(f"{region}={len(self.channels(region))}" for region in REGIONS)
        return f"montage of {len(self.channel_labels)} channels ({sizes})"

    def region_of(self, label: str) -> str:
        return self.channel_to_region[label]

    def channels(self, region: str) -> Tuple[str, ...]:
        """Channel labels of a region in montage order. ALL holds every channel."""
        if region == ALL:
            return self.channel_labels
        if region not in TAGS:
            raise ValueError(f"unknown region '{region}', expected one of {TAGS + (ALL,)}.")
        return tuple(label for label in self.channel_labels if self.channel_to_region[label] == region)

    def membership(self, region: str, channel_labels: Sequence[str]) -> np.ndarray:
        """Boolean vector over channel_labels telling which channels belong to region."""
        members = set(self.channels(region))
        return np.array([label in members for label in channel_labels], dtype=bool)

    @property
    def populated_regions(self) -> Tuple[str, ...]:
        return tuple(region for region in REGIONS if self.channels(region))

    @property
    def empty_regions(self) -> Tuple[str, ...]:
        return tuple(region for region in REGIONS if not self.channels(region))


def montage_problems(channel_labels: Sequence[str], channel_to_region: Mapping[str, str]) -> List[str]:
    problems = []
    known = set(channel_labels)
    for label, region in channel_to_region.items():
        if label not in known:
            problems.append(f"montage channel '{label}' is not in the recording.")
        if region not in TAGS:
            problems.append(f"montage channel '{label}' has unknown region '{region}', expected one of {TAGS}.")
    for region in REGIONS:
        size = sum(1 for label in channel_labels if channel_to_region.get(label) == region)
        if size == 1:
            problems.append(f"region {region} holds a single channel, a region needs at least two.")
    return problems


def read_montage_file(path: Union[Path, str]) -> List[Tuple[str, str]]:
    """Reads the (label, tag) rows of a montage file."""
    path = Path(path)
    if not path.is_file():
        raise MontageError(f"montage file not found: {path}")
    try:
        frame = pd.read_csv(
            path, header=None, names=['channel', 'region'], comment='#', dtype=str,
            skipinitialspace=True, skip_blank_lines=True, keep_default_na=False, encoding='utf-8')
    except (ValueError, pd.errors.ParserError) as exception:
        raise MontageError(f"montage file {path.name} could not be parsed: {exception}") from None
    rows = []
    frame = frame.fillna('')
    for channel, region in zip(frame['channel'], frame['region']):
        channel, region = channel.strip(), region.strip().upper()
        if not channel or not region:
            raise MontageError(f"montage file {path.name} has an incomplete line for channel '{channel}'.")
        rows.append((channel, region))
    return rows


def _labels_of(recording: Union[Recording, Sequence[str]]) -> Tuple[str, ...]:
    if isinstance(recording, Recording):
        return recording.channel_labels
    if isinstance(recording, (list, tuple)):
        return tuple(recording)
    raise TypeError(f"the 'recording' specified was of wrong type {type(recording)}, expected {Recording} or a label sequence.")


def load_montage(path: Union[Path, str], recording: Union[Recording, Sequence[str]]) -> Montage:
    """
    Loads a montage file and validates it against the recording's channels. Unmapped channels are NONE.
    The name 'default' selects the shipped 64-channel montage, restricted to the channels the recording has.
    """
    if not isinstance(path, (Path, str)):
        raise TypeError(f"the 'path' specified was of wrong type {type(path)}, expected {Path} or {str}.")
    labels = _labels_of(recording)
    if str(path) == DEFAULT_MONTAGE:
        return default_montage(labels)
    rows = read_montage_file(path)
    problems = [f"montage channel '{label}' is listed more than once." for label in duplicates(label for label, _ in rows)]
    mapping = dict(rows)
    problems += montage_problems(labels, mapping)
    if problems:
        raise MontageError(problems)
    return Montage(labels, mapping)


def default_channel_labels() -> Tuple[str, ...]:
    """The 64 channels of the default montage in file order."""
    return tuple(label for label, _ in read_montage_file(DEFAULT_MONTAGE_PATH))


def default_montage(channel_labels: Sequence[str] = None) -> Montage:
    rows = read_montage_file(DEFAULT_MONTAGE_PATH)
    labels = tuple(channel_labels) if channel_labels is not None else tuple(label for label, _ in rows)
    present = set(labels)
    return Montage(labels, {label: region for label, region in rows if label in present})
