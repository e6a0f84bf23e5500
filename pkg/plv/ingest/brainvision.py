"""
Reader and writer for the BrainVision exchange format: a .vhdr text header, a .vmrk text marker
file and a raw little-endian .eeg binary file.
"""
from __future__ import annotations
import re
import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from plv.exceptions import DataError
from plv.ingest.recording import Recording, Marker
from plv.utils.formatting import format_number


class ParseError(DataError):
    """Raised when a header or marker file lacks a mandatory entry or holds an unreadable value."""

    def __init__(self, key: str, message: str = None):
        self.key = key
        super().__init__(message or f"missing or invalid entry '{key}'.")


class UnsupportedFormatError(DataError):
    pass


class TruncationError(DataError):
    pass


class MissingFileError(DataError):
    pass


class EncodingRangeError(DataError):
    pass


class UnencodableTextError(DataError):
    """Raised for a label or marker text that would not read back as written."""
    pass


HEADER_IDENTIFICATIONS = (
    "Brain Vision Data Exchange Header File Version 1.0",
    "BrainVision Data Exchange Header File Version 1.0",
    "Brain Vision Data Exchange Header File Version 2.0",
    "BrainVision Data Exchange Header File Version 2.0")
MARKER_IDENTIFICATIONS = (
    "Brain Vision Data Exchange Marker File, Version 1.0",
    "BrainVision Data Exchange Marker File Version 1.0",
    "Brain Vision Data Exchange Marker File, Version 2.0",
    "BrainVision Data Exchange Marker File Version 2.0")

BINARY_FORMATS: Dict[str, str] = {'INT_16': '<i2', 'IEEE_FLOAT_32': '<f4'}
ORIENTATIONS = ('MULTIPLEXED', 'VECTORIZED')
# microvolts per unit
UNITS: Dict[str, float] = {'µV': 1.0, 'μV': 1.0, 'uV': 1.0, 'nV': 1e-3, 'mV': 1e3, 'V': 1e6}
# comma inside a name or description
ESCAPED_COMMA = "\\1"


@dataclass(frozen=True)
class HeaderDescription:
    data_file: str
    marker_file: Optional[str]
    orientation: str
    binary_format: str
    sampling_interval_us: float
    channel_labels: Tuple[str, ...]
    resolutions_uv: Tuple[float, ...]
    codepage: str = 'UTF-8'

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)

    @property
    def sampling_rate(self) -> float:
        return 1e6 / self.sampling_interval_us

    @property
    def sample_size(self) -> int:
        return np.dtype(BINARY_FORMATS[self.binary_format]).itemsize


def _strip_identification(text: str, identifications: Sequence[str], kind: str) -> str:
    text = text.lstrip('\ufeff')
    first_line, _, rest = text.partition('\n')
    if first_line.strip() not in identifications:
        raise ParseError('identification', f"the {kind} does not start with a BrainVision identification line.")
    return rest


def _drop_section(text: str, section: str) -> str:
    """Removes a free-text section such as [Comment], which is not key-value content."""
    kept, skipping = [], False
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith('[') and stripped.endswith(']'):
            skipping = stripped[1:-1].strip().lower() == section.lower()
        if not skipping:
            kept.append(line)
    return '\n'.join(kept)


def _read_ini(text: str, kind: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=('=',), comment_prefixes=(';',),
        inline_comment_prefixes=None, strict=True, empty_lines_in_values=False)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exception:
        raise ParseError('syntax', f"the {kind} could not be parsed: {exception}") from None
    return parser


def _require(parser: configparser.ConfigParser, section: str, key: str) -> str:
    if not parser.has_section(section):
        raise ParseError(section, f"the header has no [{section}] section.")
    if not parser.has_option(section, key):
        raise ParseError(key, f"the header has no '{key}' entry in [{section}].")
    value = parser.get(section, key).strip()
    if not value:
        raise ParseError(key, f"the header entry '{key}' in [{section}] is empty.")
    return value


def _number(value: str, key: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ParseError(key, f"the header entry '{key}' is not a valid number: '{value}'.") from None


def parse_brainvision_header(header_text: str) -> HeaderDescription:
    """Parses the text of a .vhdr file into a HeaderDescription."""
    if not isinstance(header_text, str):
        raise TypeError(f"the 'header_text' specified was of wrong type {type(header_text)}, expected {str}.")
    body = _drop_section(_strip_identification(header_text, HEADER_IDENTIFICATIONS, 'header'), 'Comment')
    parser = _read_ini(body, 'header')
    data_file = _require(parser, 'Common Infos', 'DataFile')
    marker_file = parser.get('Common Infos', 'MarkerFile', fallback='').strip() or None
    data_format = _require(parser, 'Common Infos', 'DataFormat').upper()
    if data_format != 'BINARY':
        raise UnsupportedFormatError(f"unsupported DataFormat '{data_format}', only BINARY is supported.")
    orientation = _require(parser, 'Common Infos', 'DataOrientation').upper()
    if orientation not in ORIENTATIONS:
        raise UnsupportedFormatError(f"unsupported DataOrientation '{orientation}', expected one of {ORIENTATIONS}.")
    n_channels = _number(_require(parser, 'Common Infos', 'NumberOfChannels'), 'NumberOfChannels', int)
    if n_channels < 1:
        raise ParseError('NumberOfChannels', f"the header declares {n_channels} channels.")
    sampling_interval = _number(_require(parser, 'Common Infos', 'SamplingInterval'), 'SamplingInterval')
    if not 0 < sampling_interval < float('inf'):
        raise ParseError('SamplingInterval', f"the sampling interval must be positive, got {sampling_interval}.")
    binary_format = _require(parser, 'Binary Infos', 'BinaryFormat').upper()
    if binary_format not in BINARY_FORMATS:
        raise UnsupportedFormatError(
            f"unsupported BinaryFormat '{binary_format}', expected one of {tuple(BINARY_FORMATS)}.")
    labels: List[str] = []
    resolutions: List[float] = []
    for number in range(1, n_channels + 1):
        key = f"Ch{number}"
        fields = _require(parser, 'Channel Infos', key).split(',')
        name = fields[0].replace(ESCAPED_COMMA, ',').strip()
        if not name:
            raise ParseError(key, f"channel {number} has no name.")
        resolution_text = fields[2].strip() if len(fields) > 2 else ''
        resolution = _number(resolution_text, key) if resolution_text else 1.0
        unit = fields[3].strip() if len(fields) > 3 and fields[3].strip() else 'µV'
        if unit not in UNITS:
            raise UnsupportedFormatError(f"channel '{name}' has unsupported unit '{unit}'.")
        labels.append(name)
        resolutions.append(resolution * UNITS[unit])
    return HeaderDescription(
        data_file=data_file, marker_file=marker_file, orientation=orientation, binary_format=binary_format,
        sampling_interval_us=sampling_interval, channel_labels=tuple(labels), resolutions_uv=tuple(resolutions),
        codepage=parser.get('Common Infos', 'Codepage', fallback='UTF-8').strip() or 'UTF-8')


def _check_text(text: str, what: str, allow_empty: bool = True) -> None:
    # entries are stripped and split on lines when read, and the escape sequence stands for a comma
    if not text and not allow_empty:
        raise UnencodableTextError(f"the {what} is empty.")
    if text != text.strip() or not text.isprintable() or ESCAPED_COMMA in text:
        raise UnencodableTextError(
            f"the {what} {text!r} has surrounding whitespace, a control character or '{ESCAPED_COMMA}'.")


def format_brainvision_header(header: HeaderDescription) -> str:
    """Serializes a HeaderDescription. The output is deterministic."""
    lines = [
        HEADER_IDENTIFICATIONS[0],
        "",
        "[Common Infos]",
        "Codepage=UTF-8",
        f"DataFile={header.data_file}"]
    if header.marker_file:
        lines.append(f"MarkerFile={header.marker_file}")
    lines += [
        "DataFormat=BINARY",
        f"; Data orientation: {'MULTIPLEXED=ch1,pt1, ch2,pt1 ...' if header.orientation == 'MULTIPLEXED' else 'VECTORIZED=ch1,pt1, ch1,pt2 ...'}",
        f"DataOrientation={header.orientation}",
        f"NumberOfChannels={header.n_channels}",
        "; Sampling interval in microseconds",
        f"SamplingInterval={format_number(header.sampling_interval_us)}",
        "",
        "[Binary Infos]",
        f"BinaryFormat={header.binary_format}",
        "",
        "[Channel Infos]",
        "; Each entry: Ch<Channel number>=<Name>,<Reference channel name>,",
        "; <Resolution in \"Unit\">,<Unit>, Future extensions..",
        "; Fields are delimited by commas, some fields might be omitted (empty).",
        "; Commas in channel names are coded as \"\\1\"."]
    for label in header.channel_labels:
        _check_text(label, 'channel label', allow_empty=False)
    for number, (label, resolution) in enumerate(zip(header.channel_labels, header.resolutions_uv), start=1):
        lines.append(f"Ch{number}={label.replace(',', ESCAPED_COMMA)},,{format_number(resolution)},µV")
    return "\n".join(lines) + "\n"


def parse_brainvision_markers(marker_text: str) -> List[Marker]:
    """Parses the text of a .vmrk file. Positions are 1-based on disk and 0-based in the returned markers."""
    if not isinstance(marker_text, str):
        raise TypeError(f"the 'marker_text' specified was of wrong type {type(marker_text)}, expected {str}.")
    body = _drop_section(_strip_identification(marker_text, MARKER_IDENTIFICATIONS, 'marker file'), 'Comment')
    parser = _read_ini(body, 'marker file')
    if not parser.has_section('Marker Infos'):
        return []
    entries = []
    for key, value in parser.items('Marker Infos'):
        match = re.fullmatch(r"Mk(\d+)", key.strip())
        if not match:
            raise ParseError(key, f"unexpected marker entry '{key}'.")
        fields = value.split(',')
        if len(fields) < 3:
            raise ParseError(key, f"marker entry '{key}' has fewer than three fields.")
        position = _number(fields[2].strip(), key, int)
        if position < 1:
            raise ParseError(key, f"marker entry '{key}' has position {position}, positions start at 1.")
        kind = fields[0].replace(ESCAPED_COMMA, ',')
        description = fields[1].replace(ESCAPED_COMMA, ',')
        entries.append((int(match.group(1)), Marker(sample=position - 1, kind=kind, description=description)))
    return [marker for _, marker in sorted(entries, key=lambda entry: entry[0])]


def format_brainvision_markers(markers: Sequence[Marker], data_file: str) -> str:
    lines = [
        MARKER_IDENTIFICATIONS[0],
        "",
        "[Common Infos]",
        "Codepage=UTF-8",
        f"DataFile={data_file}",
        "",
        "[Marker Infos]",
        "; Each entry: Mk<Marker number>=<Type>,<Description>,<Position in data points>,",
        "; <Size in data points>, <Channel number (0 = marker is related to all channels)>",
        "; Fields are delimited by commas, some fields might be omitted (empty).",
        "; Commas in type or description text are coded as \"\\1\"."]
    for number, marker in enumerate(markers, start=1):
        _check_text(marker.kind, 'marker type')
        _check_text(marker.description, 'marker description')
        kind = marker.kind.replace(',', ESCAPED_COMMA)
        description = marker.description.replace(',', ESCAPED_COMMA)
        lines.append(f"Mk{number}={kind},{description},{marker.sample + 1},1,0")
    return "\n".join(lines) + "\n"


def _read_text(path: Path) -> str:
    if not path.is_file():
        raise MissingFileError(f"file not found: {path}")
    raw = path.read_bytes()
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError:
        return raw.decode('latin-1')


def decode_samples(raw: bytes, header: HeaderDescription) -> np.ndarray:
    """Decodes raw .eeg bytes into a channels x samples matrix in microvolts."""
    frame_size = header.n_channels * header.sample_size
    if len(raw) % frame_size != 0:
        raise TruncationError(
            f"data length of {len(raw)} bytes is not a multiple of {header.n_channels} channels x "
            f"{header.sample_size} bytes.")
    stored = np.frombuffer(raw, dtype=BINARY_FORMATS[header.binary_format])
    if header.orientation == 'MULTIPLEXED':
        stored = stored.reshape(-1, header.n_channels).T
    else:
        stored = stored.reshape(header.n_channels, -1)
    return stored.astype(np.float64) * np.asarray(header.resolutions_uv, dtype=np.float64)[:, None]


def encode_samples(data: np.ndarray, header: HeaderDescription) -> bytes:
    """Inverse of decode_samples."""
    resolutions = np.asarray(header.resolutions_uv, dtype=np.float64)[:, None]
    scaled = data / resolutions
    if header.binary_format == 'INT_16':
        scaled = np.rint(scaled)
        limits = np.iinfo(np.int16)
        if scaled.size and (scaled.min() < limits.min or scaled.max() > limits.max):
            raise EncodingRangeError(
                f"values exceed the INT_16 range at the given resolution, largest stored value {np.abs(scaled).max():g}.")
    stored = scaled.astype(BINARY_FORMATS[header.binary_format])
    if header.orientation == 'MULTIPLEXED':
        stored = stored.T
    return np.ascontiguousarray(stored).tobytes()


def read_header(header_path: Union[Path, str]) -> HeaderDescription:
    """Parses a .vhdr file without touching the data it references."""
    return parse_brainvision_header(_read_text(Path(header_path)))


def load_recording(header_path: Union[Path, str]) -> Recording:
    """Loads the BrainVision triplet referenced by a .vhdr file."""
    if not isinstance(header_path, (Path, str)):
        raise TypeError(f"the 'header_path' specified was of wrong type {type(header_path)}, expected {Path} or {str}.")
    header_path = Path(header_path)
    header = read_header(header_path)
    data_path = Path(header_path.parent, header.data_file)
    if not data_path.is_file():
        raise MissingFileError(f"data file referenced by {header_path.name} not found: {data_path}")
    data = decode_samples(data_path.read_bytes(), header)
    markers = []
    if header.marker_file:
        markers = parse_brainvision_markers(_read_text(Path(header_path.parent, header.marker_file)))
    return Recording(
        channel_labels=header.channel_labels, sampling_rate=header.sampling_rate,
        data=data, markers=markers, header=header)


def describe_recording(
        recording: Recording, stem: str, binary_format: str = None, resolution: float = None) -> HeaderDescription:
    """Builds the header a recording is written with. Settings of a loaded recording are reused unless overridden."""
    previous: Optional[HeaderDescription] = recording.header
    if previous is not None and previous.channel_labels != recording.channel_labels:
        previous = None
    if binary_format is None:
        binary_format = previous.binary_format if previous else 'IEEE_FLOAT_32'
    if binary_format not in BINARY_FORMATS:
        raise UnsupportedFormatError(f"unsupported BinaryFormat '{binary_format}', expected one of {tuple(BINARY_FORMATS)}.")
    if resolution is not None:
        resolutions = (float(resolution),) * recording.n_channels
    elif previous is not None:
        resolutions = previous.resolutions_uv
    else:
        resolutions = (1.0 if binary_format == 'IEEE_FLOAT_32' else 0.1,) * recording.n_channels
    if previous is not None and previous.sampling_rate == recording.sampling_rate:
        sampling_interval = previous.sampling_interval_us
    else:
        sampling_interval = 1e6 / recording.sampling_rate
    return HeaderDescription(
        data_file=f"{stem}.eeg", marker_file=f"{stem}.vmrk",
        orientation=previous.orientation if previous else 'MULTIPLEXED',
        binary_format=binary_format, sampling_interval_us=sampling_interval,
        channel_labels=recording.channel_labels, resolutions_uv=tuple(resolutions))


def write_brainvision(
        recording: Recording, header_path: Union[Path, str],
        binary_format: str = None, resolution: float = None) -> HeaderDescription:
    """Writes the recording as a .vhdr/.vmrk/.eeg triplet next to header_path."""
    if not isinstance(recording, Recording):
        raise TypeError(f"the 'recording' specified was of wrong type {type(recording)}, expected {Recording}.")
    if not isinstance(header_path, (Path, str)):
        raise TypeError(f"the 'header_path' specified was of wrong type {type(header_path)}, expected {Path} or {str}.")
    header_path = Path(header_path)
    header = describe_recording(recording, header_path.stem, binary_format=binary_format, resolution=resolution)
    # nothing is written unless every part encodes
    header_text = format_brainvision_header(header)
    marker_text = format_brainvision_markers(recording.markers, header.data_file)
    payload = encode_samples(recording.data, header)
    header_path.parent.mkdir(parents=True, exist_ok=True)
    Path(header_path.parent, header.data_file).write_bytes(payload)
    Path(header_path.parent, header.marker_file).write_bytes(marker_text.encode('utf-8'))
    header_path.write_bytes(header_text.encode('utf-8'))
    return header
