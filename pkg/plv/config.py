"""
INI configuration of analysis runs and simulations. Every problem found while loading is collected and raised
at once as a single ConfigurationError.
"""
from __future__ import annotations
import io
import os
import math
import configparser
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from plv.exceptions import ConfigurationError
from plv.ingest.brainvision import BINARY_FORMATS
from plv.ingest.montage import Montage, MontageError, DEFAULT_MONTAGE, load_montage, read_montage_file, default_montage, default_channel_labels
from plv.ingest.recording import FrequencyBand, DEFAULT_BANDS
from plv.ingest.epochs_csv import epoch_csv_name
from plv.preprocess.epochs import (
    EpochWindow, PARADIGMS, CLASS_LABELS, REST_LABEL, TASK, REST, canonical_class_label)
from plv.stats import CORRECTIONS
from plv.synthgen import ChannelCoupling, ConditionCoupling, SimulationSpec, OUTPUT_FORMATS
from plv.utils.formatting import natural_key, format_number
from plv.utils.iterable import duplicates

OUTPUT_DIR_VARIABLE = 'PLV_OUTPUT_DIR'
INPUT_FORMATS = ('brainvision', 'csv')
AUTO = 'auto'
ALL_CLASSES = 'all'
FILTER_ORDER_KEY = 'filter_order'


class _Reader(object):
    """Typed access to an INI parser that records problems instead of raising on the first one."""

    def __init__(self, parser: configparser.ConfigParser, source: str):
        self.parser = parser
        self.source = source
        self.problems: List[str] = []

    def report(self, message: str) -> None:
        self.problems.append(f"{self.source}: {message}")

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def text(self, section: str, key: str, default: Optional[str] = None) -> Optional[str]:
        if not self.has(section, key):
            return default
        return self.parser.get(section, key).strip()

    def required(self, section: str, key: str) -> Optional[str]:
        value = self.text(section, key)
        if not value:
            self.report(f"[{section}] {key} is required.")
            return None
        return value

    def number(self, section: str, key: str, default, kind=float, minimum=None, exclusive: bool = False):
        value = self.text(section, key)
        if value is None or value == '':
            return default
        try:
            number = kind(value)
        except ValueError:
            self.report(f"[{section}] {key} = '{value}' is not a valid {kind.__name__}.")
            return default
        if kind is float and math.isnan(number):
            self.report(f"[{section}] {key} must be a number, got '{value}'.")
            return default
        if minimum is not None and (number < minimum or (exclusive and number == minimum)):
            relation = 'greater than' if exclusive else 'at least'
            self.report(f"[{section}] {key} must be {relation} {minimum}, got {value}.")
            return default
        return number

    def boolean(self, section: str, key: str, default: bool) -> bool:
        if not self.has(section, key):
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            self.report(f"[{section}] {key} = '{self.text(section, key)}' is not a boolean.")
            return default

    def choice(self, section: str, key: str, choices: Sequence[str], default: str) -> str:
        value = self.text(section, key, default) or default
        if value not in choices:
            self.report(f"[{section}] {key} must be one of {tuple(choices)}, got '{value}'.")
            return default
        return value

    def items(self, section: str, key: str) -> List[str]:
        value = self.text(section, key, '') or ''
        return [item.strip() for item in value.split(',') if item.strip()]


def _read_parser(path: Path) -> configparser.ConfigParser:
    if not path.is_file():
        raise ConfigurationError(f"configuration file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(';', '#'))
    try:
        with path.open('r', encoding='utf-8') as file:
            parser.read_file(file)
    except configparser.Error as exception:
        raise ConfigurationError(f"{path.name} could not be parsed: {exception}") from None
    return parser


def _resolve(path: str, base: Path) -> Path:
    candidate = Path(path).expanduser()
    return candidate if candidate.is_absolute() else (base / candidate)


def _paradigms(reader: _Reader, section: str) -> Tuple[str, ...]:
    paradigms = reader.items(section, 'paradigms')
    for paradigm in paradigms:
        if paradigm not in PARADIGMS:
            reader.report(f"[{section}] paradigms holds unknown paradigm '{paradigm}', expected {PARADIGMS}.")
    for paradigm in duplicates(paradigms):
        reader.report(f"[{section}] paradigms lists '{paradigm}' more than once.")
    return tuple(paradigm for paradigm in paradigms if paradigm in PARADIGMS)


def _classes(reader: _Reader, section: str) -> Tuple[str, ...]:
    value = reader.text(section, 'classes', ALL_CLASSES)
    if not value or value.lower() == ALL_CLASSES:
        return CLASS_LABELS
    classes = []
    for item in reader.items(section, 'classes'):
        try:
            label = canonical_class_label(item)
        except KeyError:
            reader.report(f"[{section}] classes holds unknown class '{item}', expected {CLASS_LABELS}.")
            continue
        if label == REST_LABEL:
            reader.report(f"[{section}] classes must not list {REST_LABEL}, the rest condition is analysed on its own.")
            continue
        classes.append(label)
    for label in duplicates(classes):
        reader.report(f"[{section}] classes lists '{label}' more than once.")
    # canonical order keeps the table columns stable
    return tuple(label for label in CLASS_LABELS if label in classes)


def _bands(reader: _Reader) -> Tuple[Tuple[FrequencyBand, ...], int]:
    order = reader.number('bands', FILTER_ORDER_KEY, 4, kind=int, minimum=1)
    if not reader.parser.has_section('bands'):
        return DEFAULT_BANDS, order
    bands = []
    for name, value in reader.parser.items('bands'):
        if name == FILTER_ORDER_KEY:
            continue
        edges = [edge.strip() for edge in value.split(',')]
        try:
            low, high = (float(edge) for edge in edges)
        except ValueError:
            reader.report(f"[bands] {name} = '{value}' must be two frequencies 'low, high'.")
            continue
        band = FrequencyBand(name, low, high)
        for problem in band.problems():
            reader.report(f"[bands] {problem}")
        bands.append(band)
    if not bands and not any(name != FILTER_ORDER_KEY for name, _ in reader.parser.items('bands')):
        reader.report("[bands] must define at least one band.")
    return tuple(bands), order


@dataclass(frozen=True)
class RunConfig:
    input_format: str
    input_dir: Path
    subjects: Tuple[str, ...]
    paradigms: Tuple[str, ...]
    classes: Tuple[str, ...]
    window: EpochWindow
    bands: Tuple[FrequencyBand, ...]
    montage: str
    output_dir: Path
    sampling_rate: Optional[float] = None
    filter_order: int = 4
    edge_exclusion_s: float = 0.1
    alpha: float = 0.05
    correction: str = 'none'
    precision: int = 2
    source: Optional[Path] = None

    @property
    def units(self) -> List[Tuple[str, str]]:
        """(subject, paradigm) analysis units in report order."""
        return [(subject, paradigm) for subject in self.subjects for paradigm in self.paradigms]

    @property
    def labels(self) -> List[Tuple[str, str]]:
        """(class label, condition) analysed within a unit: every task class then the rest class."""
        return [(class_label, TASK) for class_label in self.classes] + [(REST_LABEL, REST)]

    def recording_path(self, subject: str, paradigm: str) -> Path:
        return self.input_dir / f"{subject}_{paradigm}.vhdr"

    def epochs_path(self, subject: str, paradigm: str, class_label: str, condition: str) -> Path:
        return self.input_dir / epoch_csv_name(subject, paradigm, class_label, condition)

    def unit_inputs(self, subject: str, paradigm: str) -> List[Path]:
        if self.input_format == 'brainvision':
            return [self.recording_path(subject, paradigm)]
        return [self.epochs_path(subject, paradigm, class_label, condition) for class_label, condition in self.labels]

    def missing_inputs(self) -> List[Path]:
        return [path for subject, paradigm in self.units for path in self.unit_inputs(subject, paradigm) if not path.is_file()]


def discover_subjects(input_dir: Path, input_format: str, paradigms: Sequence[str]) -> Tuple[str, ...]:
    """Subject names found in the input file names, in natural order (S1, S2, ..., S10)."""
    subjects = set()
    for paradigm in paradigms:
        if input_format == 'brainvision':
            suffix = f"_{paradigm}.vhdr"
            subjects.update(path.name[:-len(suffix)] for path in input_dir.glob(f"*{suffix}"))
        else:
            infix = f"_{paradigm}_"
            subjects.update(path.name.split(infix)[0] for path in input_dir.glob(f"*{infix}*.csv"))
    return tuple(sorted((subject for subject in subjects if subject), key=natural_key))


def load_run_config(path: Union[Path, str]) -> RunConfig:
    """Loads and validates an analysis config. The PLV_OUTPUT_DIR environment variable overrides [output] directory."""
    if not isinstance(path, (Path, str)):
        raise TypeError(f"the 'path' specified was of wrong type {type(path)}, expected {Path} or {str}.")
    path = Path(path).resolve()
    reader = _Reader(_read_parser(path), path.name)
    base = path.parent
    # ingest
    input_format = reader.choice('ingest', 'format', INPUT_FORMATS, 'brainvision')
    input_dir_text = reader.required('ingest', 'input_dir')
    input_dir = _resolve(input_dir_text, base) if input_dir_text else base
    if input_dir_text and not input_dir.is_dir():
        reader.report(f"[ingest] input_dir {input_dir} is not a directory.")
    paradigms = _paradigms(reader, 'ingest') if reader.has('ingest', 'paradigms') else PARADIGMS
    if reader.has('ingest', 'paradigms') and not reader.items('ingest', 'paradigms'):
        reader.report("[ingest] paradigms must name at least one paradigm.")
    classes = _classes(reader, 'ingest')
    if not classes:
        reader.report("[ingest] classes must name at least one class.")
    n_problems = len(reader.problems)
    sampling_rate = reader.number('ingest', 'sampling_rate', None, minimum=0, exclusive=True)
    if input_format == 'csv' and sampling_rate is None and len(reader.problems) == n_problems:
        reader.report("[ingest] sampling_rate is required for csv input.")
    window = EpochWindow(
        start_offset_s=reader.number('ingest', 'window_start_s', 0.0),
        duration_s=reader.number('ingest', 'window_duration_s', 2.0, minimum=0, exclusive=True))
    subjects_text = reader.text('ingest', 'subjects', AUTO) or AUTO
    if subjects_text.lower() == AUTO:
        subjects = discover_subjects(input_dir, input_format, paradigms) if input_dir.is_dir() else ()
        if input_dir.is_dir() and not subjects:
            reader.report(f"[ingest] no {input_format} input files were found in {input_dir}.")
    else:
        subjects = tuple(reader.items('ingest', 'subjects'))
        for subject in duplicates(subjects):
            reader.report(f"[ingest] subjects lists '{subject}' more than once.")
    if 0 < len(subjects) < 2:
        reader.report(f"[ingest] the paired statistics need at least 2 subjects, got {len(subjects)}.")
    # bands, regions, stats, output
    bands, filter_order = _bands(reader)
    montage_text = reader.text('regions', 'montage', DEFAULT_MONTAGE) or DEFAULT_MONTAGE
    montage = montage_text if montage_text == DEFAULT_MONTAGE else str(_resolve(montage_text, base))
    if montage != DEFAULT_MONTAGE and not Path(montage).is_file():
        reader.report(f"[regions] montage file {montage} does not exist.")
    edge_exclusion_s = reader.number('regions', 'edge_exclusion_s', 0.1, minimum=0)
    if edge_exclusion_s * 2 >= window.duration_s:
        reader.report(f"[regions] edge_exclusion_s of {edge_exclusion_s:g} s leaves nothing of a {window.duration_s:g} s window.")
    alpha = reader.number('stats', 'alpha', 0.05, minimum=0, exclusive=True)
    if alpha >= 1:
        reader.report(f"[stats] alpha must lie in (0, 1), got {alpha:g}.")
    correction = reader.choice('stats', 'correction', CORRECTIONS, 'none')
    precision = reader.number('output', 'precision', 2, kind=int, minimum=0)
    output_text = os.environ.get(OUTPUT_DIR_VARIABLE) or reader.text('output', 'directory', 'results') or 'results'
    output_dir = Path(output_text).expanduser().resolve() if os.environ.get(OUTPUT_DIR_VARIABLE) else _resolve(output_text, base)
    if reader.problems:
        raise ConfigurationError(reader.problems)
    return RunConfig(
        input_format=input_format, input_dir=input_dir, subjects=subjects, paradigms=paradigms, classes=classes,
        window=window, bands=bands, montage=montage, output_dir=output_dir, sampling_rate=sampling_rate,
        filter_order=filter_order, edge_exclusion_s=edge_exclusion_s, alpha=alpha, correction=correction,
        precision=precision, source=path)


def _parse_pairs(reader: _Reader, section: str) -> Tuple[ChannelCoupling, ...]:
    pairs = []
    for item in reader.items(section, 'pairs'):
        try:
            channels, kappa = item.rsplit(':', 1)
            source, target = (label.strip() for label in channels.split('-'))
            pairs.append(ChannelCoupling(source=source, target=target, kappa=float(kappa)))
        except ValueError:
            reader.report(f"[{section}] pairs entry '{item}' must look like A-B:kappa.")
    return tuple(pairs)


def _parse_coupling(reader: _Reader, condition: str) -> Optional[ConditionCoupling]:
    section = f"coupling.{condition}"
    if not reader.parser.has_section(section):
        return None
    region_kappas = []
    for key, _ in reader.parser.items(section):
        if key.startswith('kappa.'):
            region = key.split('.', 1)[1].upper()
            region_kappas.append((region, reader.number(section, key, 0.0)))
    unknown = [key for key, _ in reader.parser.items(section)
               if key not in ('pairs', 'hub', 'kappa') and not key.startswith('kappa.')]
    for key in unknown:
        reader.report(f"[{section}] holds the unknown key '{key}'.")
    if not reader.has(section, 'pairs') and not reader.has(section, 'hub'):
        reader.report(f"[{section}] needs either pairs or hub.")
    return ConditionCoupling(
        pairs=_parse_pairs(reader, section), hub=reader.text(section, 'hub'),
        kappa=reader.number(section, 'kappa', 0.0), region_kappas=tuple(region_kappas))


def _simulation_montage(reader: _Reader, base: Path) -> Tuple[Optional[Montage], str]:
    source = reader.text('simulation', 'montage', DEFAULT_MONTAGE) or DEFAULT_MONTAGE
    labels = reader.items('simulation', 'channels')
    for label in duplicates(labels):
        reader.report(f"[simulation] channels lists '{label}' more than once.")
    try:
        if source == DEFAULT_MONTAGE:
            return default_montage(tuple(labels) if labels else default_channel_labels()), source
        path = _resolve(source, base)
        labels = labels or [label for label, _ in read_montage_file(path)]
        return load_montage(path, tuple(labels)), str(path)
    except MontageError as exception:
        for problem in exception.problems:
            reader.report(f"[simulation] {problem}")
        return None, source


def _subjects(reader: _Reader) -> Tuple[str, ...]:
    value = reader.text('simulation', 'subjects', '1') or '1'
    if value.isdigit():
        if int(value) < 1:
            reader.report("[simulation] subjects must be at least 1.")
            return ()
        return tuple(f"S{index}" for index in range(1, int(value) + 1))
    subjects = tuple(reader.items('simulation', 'subjects'))
    for subject in duplicates(subjects):
        reader.report(f"[simulation] subjects lists '{subject}' more than once.")
    return subjects


def load_simulation_spec(path: Union[Path, str]) -> SimulationSpec:
    if not isinstance(path, (Path, str)):
        raise TypeError(f"the 'path' specified was of wrong type {type(path)}, expected {Path} or {str}.")
    path = Path(path).resolve()
    reader = _Reader(_read_parser(path), path.name)
    if not reader.parser.has_section('simulation'):
        raise ConfigurationError(f"{path.name}: the [simulation] section is missing.")
    montage, montage_source = _simulation_montage(reader, path.parent)
    binary_format = reader.choice('simulation', 'binary_format', tuple(BINARY_FORMATS), 'IEEE_FLOAT_32')
    paradigms = _paradigms(reader, 'simulation') if reader.has('simulation', 'paradigms') else (PARADIGMS[0],)
    options = dict(
        seed=reader.number('simulation', 'seed', 0, kind=int, minimum=0),
        sampling_rate=reader.number('simulation', 'sampling_rate', 250.0, minimum=0, exclusive=True),
        n_trials=reader.number('simulation', 'n_trials', 50, kind=int, minimum=2),
        duration_s=reader.number('simulation', 'duration_s', 2.0, minimum=0, exclusive=True),
        carrier_hz=reader.number('simulation', 'carrier_hz', 10.0, minimum=0, exclusive=True),
        amplitude_uv=reader.number('simulation', 'amplitude_uv', 10.0, minimum=0),
        noise_sigma=reader.number('simulation', 'noise_sigma', 0.0, minimum=0),
        trial_jitter=reader.boolean('simulation', 'trial_jitter', False),
        jitter_hz=reader.number('simulation', 'jitter_hz', 0.5, minimum=0),
        output_format=reader.choice('simulation', 'format', OUTPUT_FORMATS, 'brainvision'),
        binary_format=binary_format,
        resolution=reader.number('simulation', 'resolution', None, minimum=0, exclusive=True),
        subjects=_subjects(reader),
        paradigms=paradigms,
        classes=_classes(reader, 'simulation'),
        subject_kappa_sd=reader.number('simulation', 'subject_kappa_sd', 0.0, minimum=0),
        task=_parse_coupling(reader, TASK) or ConditionCoupling(),
        rest=_parse_coupling(reader, REST),
        include_rest=reader.boolean('simulation', 'include_rest', False),
        write_config=reader.boolean('simulation', 'write_config', False),
        montage_source=montage_source)
    if montage is None or reader.problems:
        raise ConfigurationError(reader.problems)
    spec = SimulationSpec(montage=montage, **options)
    problems = spec.problems()
    if problems:
        raise ConfigurationError([f"{path.name}: {problem}" for problem in problems])
    return spec


def analysis_band(carrier_hz: float) -> FrequencyBand:
    """The default band holding the carrier, or a 4 Hz band centred on it."""
    for band in DEFAULT_BANDS:
        if band.low_hz < carrier_hz < band.high_hz:
            return band
    return FrequencyBand('carrier', max(carrier_hz - 2.0, carrier_hz / 2), carrier_hz + 2.0)


def format_analysis_config(simulation: SimulationSpec, montage_path: Optional[str] = None) -> str:
    """Analysis config text for a simulated study, with paths relative to the directory it is written to."""
    parser = configparser.ConfigParser(interpolation=None)
    band = analysis_band(simulation.carrier_hz)
    input_format = 'csv' if simulation.output_format == 'csv' else 'brainvision'
    parser['ingest'] = {
        'format': input_format,
        'input_dir': '.',
        'subjects': ', '.join(simulation.subjects),
        'paradigms': ', '.join(simulation.paradigms),
        'classes': ALL_CLASSES if simulation.classes == CLASS_LABELS else ', '.join(simulation.classes),
        'window_start_s': '0',
        'window_duration_s': format_number(simulation.duration_s)}
    if input_format == 'csv':
        parser['ingest']['sampling_rate'] = format_number(simulation.sampling_rate)
    parser['bands'] = {band.name: f"{format_number(band.low_hz)}, {format_number(band.high_hz)}"}
    parser['regions'] = {'montage': montage_path or DEFAULT_MONTAGE, 'edge_exclusion_s': '0.1'}
    parser['stats'] = {'alpha': '0.05', 'correction': 'none'}
    parser['output'] = {'directory': 'results', 'precision': '2'}
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()
