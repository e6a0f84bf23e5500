from __future__ import annotations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from plv.analyze import Analyzer, UnitResult, RegionValue
from plv.config import RunConfig, format_analysis_config
from plv.connectivity import plv_matrix, region_average, edge_exclusion_samples, EmptyRegionError
from plv.database import Database
from plv.exceptions import ConfigurationError
from plv.ingest.brainvision import MissingFileError, ParseError, read_header, load_recording, write_brainvision
from plv.ingest.epochs_csv import EpochLayout, load_epochs_csv, write_epochs_csv, epoch_csv_name
from plv.ingest.montage import Montage, MontageError, ALL, REGION_PAIRS, DEFAULT_MONTAGE, load_montage
from plv.preprocess.epochs import EpochSet, extract_epochs
from plv.preprocess.filter import bandpass, design_bandpass, padding_length
from plv.preprocess.phase import analytic_phase
from plv.synthgen import SimulationSpec, SimulatedUnit, simulate_unit
from plv.utils.formatting import get_datetime_string, format_number
from plv.utils.iterable import ordered_unique
from plv.worker_pool import WorkerPool

MANIFEST_FILE = 'manifest.csv'
ANALYSIS_CONFIG_FILE = 'analyze.ini'


class Controller(object):
    """Runs a fan-out of units on a worker pool and reports progress on the console and in the log files."""

    def __init__(self, database: Database, n_jobs: int = 1, verbose: int = 1, logging: bool = False):
        if not isinstance(database, Database):
            raise TypeError(f"the 'database' specified was of wrong type {type(database)}, expected {Database}.")
        if not isinstance(n_jobs, int):
            raise TypeError(f"the 'n_jobs' specified was of wrong type {type(n_jobs)}, expected {int}.")
        if not isinstance(verbose, int):
            raise TypeError(f"the 'verbose' specified was of wrong type {type(verbose)}, expected {int}.")
        if not isinstance(logging, bool):
            raise TypeError(f"the 'logging' specified was of wrong type {type(logging)}, expected {bool}.")
        self.database = database
        self.verbose = verbose
        self.logging = logging
        self._worker_pool = WorkerPool(n_jobs=n_jobs, verbose=verbose - 2)
        self.__n_done = 0
        self.__n_units = 0

    def _print_prefix(self) -> Optional[str]:
        if self.__n_units:
            return f"({self.__n_done}/{self.__n_units})"
        return None

    def __create_message(self, message: str) -> str:
        prefixes = ' '.join(prefix for prefix in (get_datetime_string(), self._print_prefix()) if prefix is not None)
        return f"{prefixes}: {message}"

    def _say(self, message: str) -> None:
        """Prints the provided controller message in the appropriate syntax if verbosity level is above 0."""
        self.__register(message=message, verbosity=0)

    def _whisper(self, message: str) -> None:
        """Prints the provided controller message in the appropriate syntax if verbosity level is above 1."""
        self.__register(message=message, verbosity=1)

    def __register(self, message: str, verbosity: int) -> None:
        file_tag = self.__class__.__name__
        full_message = self.__create_message(message)
        self.__print(message=full_message, verbosity=verbosity)
        self.__log_to_file(message=full_message, tag=file_tag)

    def __print(self, message: str, verbosity: int) -> None:
        if self.verbose > verbosity:
            print(message)

    def __log_to_file(self, message: str, tag: str) -> None:
        if not self.logging:
            return
        with self.database.create_file(tag='logs', file_name=f"{tag}_log.txt").open('a+', encoding='utf-8') as file:
            file.write(message + '\n')

    def _run_units(self, function, units: Sequence) -> List:
        """Maps function over units on the worker pool, results in unit order."""
        self.__n_done = 0
        self.__n_units = len(units)
        results = []
        with self._worker_pool:
            for result in self._worker_pool.imap(function, list(units)):
                self.__n_done += 1
                self._say(f"{result.subject} {result.paradigm} done.")
                results.append(result)
        self.__n_units = 0
        return results

    def start(self):
        try:
            self._say("starting...")
            return self._run()
        except KeyboardInterrupt:
            self._say("interupted.")
            raise
        except Exception as exception:
            self._say(f"stopped by {exception.__class__.__name__}.")
            raise
        finally:
            self._say("finished.")

    def _run(self):
        raise NotImplementedError


class AnalysisUnit(object):
    """Computes the region connectivity of one (subject, paradigm) over every class, condition and band."""

    def __init__(self, config: RunConfig):
        self.config = config

    def epoch_sets(self, subject: str, paradigm: str) -> List[EpochSet]:
        config = self.config
        if config.input_format == 'brainvision':
            recording = load_recording(config.recording_path(subject, paradigm))
            return [
                extract_epochs(recording, paradigm, class_label, condition, config.window)
                for class_label, condition in config.labels]
        sets = []
        for class_label, condition in config.labels:
            layout = EpochLayout(
                sampling_rate=config.sampling_rate, paradigm=paradigm, class_label=class_label,
                condition=condition, start_offset_s=config.window.start_offset_s)
            sets.append(load_epochs_csv(config.epochs_path(subject, paradigm, class_label, condition), layout).demeaned())
        return sets

    def __call__(self, unit: Tuple[str, str, Montage]) -> UnitResult:
        subject, paradigm, montage = unit
        result = UnitResult(subject=subject, paradigm=paradigm)
        for epochs in self.epoch_sets(subject, paradigm):
            edge_exclusion = edge_exclusion_samples(self.config.edge_exclusion_s, epochs.sampling_rate)
            for band in self.config.bands:
                phases = analytic_phase(bandpass(epochs, band, self.config.filter_order))
                matrix = plv_matrix(phases, edge_exclusion)
                for a, b in ((ALL, ALL),) + REGION_PAIRS:
                    connectivity = region_average(matrix, montage, a, b)
                    result.values.append(RegionValue(
                        class_label=epochs.class_label, condition=epochs.condition, band=band.name,
                        pair=connectivity.pair, value=connectivity.value))
        return result


class AnalysisController(Controller):
    def __init__(self, config: RunConfig, database: Database, **kwargs):
        super().__init__(database=database, **kwargs)
        if not isinstance(config, RunConfig):
            raise TypeError(f"the 'config' specified was of wrong type {type(config)}, expected {RunConfig}.")
        self.config = config

    def _unit_layout(self, subject: str, paradigm: str) -> Tuple[Tuple[str, ...], float]:
        """Channel labels and sampling rate of a unit, read without loading any samples."""
        config = self.config
        if config.input_format == 'brainvision':
            header = read_header(config.recording_path(subject, paradigm))
            return header.channel_labels, header.sampling_rate
        first = config.epochs_path(subject, paradigm, *config.labels[0])
        try:
            channels = pd.read_csv(first, usecols=['channel'], dtype=str, keep_default_na=False)['channel']
        except (ValueError, pd.errors.ParserError) as exception:
            raise ParseError('header', f"{first.name} has no readable channel column: {exception}") from None
        return tuple(pd.unique(channels)), config.sampling_rate

    def plan(self) -> List[Tuple[str, str, Montage]]:
        """Checks every input, montage and band before any numeric work. All problems are raised together."""
        config = self.config
        missing = config.missing_inputs()
        if missing:
            listing = '\n'.join(f"  - {path}" for path in missing)
            raise MissingFileError(f"{len(missing)} input files are missing:\n{listing}")
        problems: List[str] = []
        montages: Dict[Tuple[str, ...], Optional[Montage]] = {}
        units = []
        for subject, paradigm in config.units:
            labels, sampling_rate = self._unit_layout(subject, paradigm)
            if labels not in montages:
                montages[labels] = self._montage(labels, problems)
            problems += self._signal_problems(subject, paradigm, sampling_rate)
            units.append((subject, paradigm, montages[labels]))
        if problems:
            raise ConfigurationError(ordered_unique(problems))
        return units

    def _montage(self, labels: Tuple[str, ...], problems: List[str]) -> Optional[Montage]:
        try:
            montage = load_montage(self.config.montage, labels)
        except MontageError as exception:
            problems += exception.problems
            return None
        if montage.empty_regions:
            problems.append(str(EmptyRegionError(
                f"regions {', '.join(montage.empty_regions)} have no channels, every region needs at least two.")))
        return montage

    def _signal_problems(self, subject: str, paradigm: str, sampling_rate: float) -> List[str]:
        config = self.config
        problems = []
        n_samples = config.window.n_samples(sampling_rate)
        edge_exclusion = edge_exclusion_samples(config.edge_exclusion_s, sampling_rate)
        if 2 * edge_exclusion >= n_samples:
            problems.append(
                f"an edge exclusion of {edge_exclusion} samples leaves nothing of the {n_samples}-sample epochs "
                f"of {subject} {paradigm}.")
        for band in config.bands:
            band_problems = band.problems(sampling_rate)
            problems += band_problems
            if not band_problems and n_samples <= padding_length(design_bandpass(band, sampling_rate, config.filter_order)):
                problems.append(f"{n_samples}-sample epochs are too short for the order {config.filter_order} {band} filter.")
        return problems

    def _run(self) -> List[Path]:
        config = self.config
        self._say(f"planning {len(config.units)} units of {len(config.subjects)} subjects...")
        units = self.plan()
        self._whisper(f"bands: {', '.join(str(band) for band in config.bands)}")
        results = self._run_units(AnalysisUnit(config), units)
        self._whisper("writing reports...")
        analyzer = Analyzer(
            database=self.database, subjects=config.subjects, classes=config.classes,
            bands=[band.name for band in config.bands], precision=config.precision, alpha=config.alpha,
            correction=config.correction, verbose=self.verbose > 2)
        paths = analyzer.create_reports(results)
        self._say(f"wrote {len(paths)} reports to {self.database.path}.")
        return paths


class SimulationUnit(object):
    """Simulates one (subject, paradigm) and writes its recording and/or epoch files."""

    def __init__(self, simulation: SimulationSpec, database: Database):
        self.simulation = simulation
        self.database = database

    def __call__(self, unit: Tuple[int, str]) -> SimulatedUnit:
        subject_index, paradigm = unit
        simulation = self.simulation
        simulated = simulate_unit(simulation, subject_index, paradigm)
        if simulation.writes_brainvision:
            write_brainvision(
                simulated.recording(), self.database.file_path(f"{simulated.subject}_{paradigm}.vhdr"),
                binary_format=simulation.binary_format, resolution=simulation.resolution)
        if simulation.writes_csv:
            for epochs in simulated.epoch_sets:
                write_epochs_csv(epochs, self.database.file_path(
                    epoch_csv_name(simulated.subject, paradigm, epochs.class_label, epochs.condition)))
        # the samples are on disk, only the manifest travels back
        simulated.epoch_sets = []
        return simulated


class SimulationController(Controller):
    def __init__(self, simulation: SimulationSpec, database: Database, **kwargs):
        super().__init__(database=database, **kwargs)
        if not isinstance(simulation, SimulationSpec):
            raise TypeError(f"the 'simulation' specified was of wrong type {type(simulation)}, expected {SimulationSpec}.")
        self.simulation = simulation

    def manifest(self, units: Sequence[SimulatedUnit]) -> pd.DataFrame:
        rows = [
            (row.subject, row.paradigm, row.class_label, row.condition, row.channel_a, row.channel_b,
             format_number(row.kappa), f"{row.expected_plv:.6f}")
            for unit in units for row in unit.manifest]
        return pd.DataFrame(rows, columns=[
            'subject', 'paradigm', 'class', 'condition', 'channel_a', 'channel_b', 'kappa', 'expected_plv'])

    def _run(self) -> List[Path]:
        simulation = self.simulation
        units = [(index, paradigm) for index in range(len(simulation.subjects)) for paradigm in simulation.paradigms]
        self._say(
            f"simulating {len(units)} units of {len(simulation.channel_labels)} channels, "
            f"{simulation.n_trials} trials per class...")
        simulated = self._run_units(SimulationUnit(simulation, self.database), units)
        paths = [self.database.write_table(self.manifest(simulated), MANIFEST_FILE)]
        if simulation.write_config:
            montage = None if simulation.montage_source == DEFAULT_MONTAGE else simulation.montage_source
            paths.append(self.database.write_text(format_analysis_config(simulation, montage), ANALYSIS_CONFIG_FILE))
        self._say(f"wrote the simulation to {self.database.path}.")
        return paths
