from pathlib import Path
from typing import List

import pandas as pd

from plv.analyze import INDEX_FILE, PARADIGM_COMPARISON_FILE, expected_outputs, class_table_name, region_report_name
from plv.config import load_run_config, load_simulation_spec
from plv.controller import AnalysisController, SimulationController
from plv.database import Database, ReadOnlyDatabase, AnalysisOutputError
from plv.preprocess.epochs import PARADIGMS
from plv.stats import SIGNIFICANT


def _check_run_arguments(threads: int, verbose: int, logging: bool) -> None:
    if not isinstance(threads, int):
        raise TypeError(f"the 'threads' specified was of wrong type {type(threads)}, expected {int}.")
    if threads < 1:
        raise ValueError(f"the 'threads' specified was less than 1.")
    if not isinstance(verbose, int):
        raise TypeError(f"the 'verbose' specified was of wrong type {type(verbose)}, expected {int}.")
    if not isinstance(logging, bool):
        raise TypeError(f"the 'logging' specified was of wrong type {type(logging)}, expected {bool}.")


def cmd_simulate(spec: str, out: str, threads: int = 1, verbose: int = 1, logging: bool = False) -> List[Path]:
    """Simulates the study described by the spec file into out, with a ground-truth manifest."""
    if not isinstance(spec, (str, Path)):
        raise TypeError(f"the 'spec' path specified was of wrong type {type(spec)}, expected {str}.")
    if not isinstance(out, (str, Path)):
        raise TypeError(f"the 'out' path specified was of wrong type {type(out)}, expected {str}.")
    if not str(out):
        raise ValueError(f"the 'out' path specified was empty.")
    _check_run_arguments(threads, verbose, logging)
    simulation = load_simulation_spec(spec)
    database = Database(out)
    info = [
        f"Spec: {Path(spec).resolve()}",
        f"Output directory: {database.path}",
        f"Subjects: {len(simulation.subjects)}",
        f"Paradigms: {', '.join(simulation.paradigms)}",
        f"Channels: {len(simulation.channel_labels)}",
        f"Classes: {len(simulation.classes)}, conditions: {', '.join(simulation.conditions)}",
        f"Trials per class: {simulation.n_trials}",
        f"Sampling rate: {simulation.sampling_rate:g} Hz, epoch length: {simulation.duration_s:g} s",
        f"Seed: {simulation.seed}",
        f"Threads: {threads}"]
    if verbose > 0:
        print("\n".join(info), "\n")
    controller = SimulationController(
        simulation=simulation, database=database, n_jobs=threads, verbose=verbose, logging=logging)
    return controller.start()


def cmd_analyze(config: str, threads: int = 1, verbose: int = 1, logging: bool = False) -> List[Path]:
    """Runs the analysis described by the config file and writes the report tables."""
    if not isinstance(config, (str, Path)):
        raise TypeError(f"the 'config' path specified was of wrong type {type(config)}, expected {str}.")
    _check_run_arguments(threads, verbose, logging)
    run_config = load_run_config(config)
    database = Database(run_config.output_dir)
    info = [
        f"Config: {run_config.source}",
        f"Input: {run_config.input_format} files in {run_config.input_dir}",
        f"Subjects: {', '.join(run_config.subjects)}",
        f"Paradigms: {', '.join(run_config.paradigms)}",
        f"Bands: {', '.join(str(band) for band in run_config.bands)}",
        f"Montage: {run_config.montage}",
        f"Output directory: {database.path}",
        f"Threads: {threads}"]
    if verbose > 0:
        print("\n".join(info), "\n")
    if logging:
        database.create_file(tag='logs', file_name='information.txt').write_text("\n".join(info) + "\n", encoding='utf-8')
    controller = AnalysisController(
        config=run_config, database=database, n_jobs=threads, verbose=verbose, logging=logging)
    return controller.start()


def _index(database: ReadOnlyDatabase) -> pd.DataFrame:
    if not database.exists or INDEX_FILE not in database:
        expected = '\n'.join(f"  - {name}" for name in expected_outputs(PARADIGMS, ['<band>']))
        raise AnalysisOutputError(
            f"{database.path} holds no analysis output. An analysis directory contains:\n{expected}")
    index = database.read_table(INDEX_FILE)
    if list(index.columns) != ['key', 'value']:
        raise AnalysisOutputError(f"{INDEX_FILE} in {database.path} is corrupt.")
    return index


def _values(index: pd.DataFrame, key: str) -> List[str]:
    return index.loc[index['key'] == key, 'value'].tolist()


def _check_significance(report: pd.DataFrame, file_name: str) -> pd.DataFrame:
    if 'pair' not in report.columns or 'significant' not in report.columns:
        raise AnalysisOutputError(f"{file_name} is corrupt, it has no pair or significant column.")
    if not report['significant'].isin([SIGNIFICANT, '']).all():
        raise AnalysisOutputError(f"{file_name} is corrupt, its significant column holds unknown marks.")
    return report


def cmd_report(directory: str) -> str:
    """Renders the report tables of an analysis directory as text, with the significance marks set at analysis time."""
    if not isinstance(directory, (str, Path)):
        raise TypeError(f"the 'directory' path specified was of wrong type {type(directory)}, expected {str}.")
    database = ReadOnlyDatabase(directory)
    index = _index(database)
    paradigms = _values(index, 'paradigm')
    bands = _values(index, 'band')
    try:
        alpha = float(_values(index, 'alpha')[0])
    except (IndexError, ValueError):
        raise AnalysisOutputError(f"{INDEX_FILE} in {database.path} holds no valid alpha.") from None
    missing = database.missing(expected_outputs(paradigms, bands))
    if missing:
        listing = '\n'.join(f"  - {name}" for name in missing)
        raise AnalysisOutputError(f"{database.path} is missing {len(missing)} analysis outputs:\n{listing}")
    sections = []
    for paradigm in paradigms:
        table = database.read_table(class_table_name(paradigm))
        report = _check_significance(
            database.read_table(region_report_name(paradigm)), region_report_name(paradigm))
        sections.append(f"{paradigm}: average connectivity of each class, mean over {', '.join(bands)}")
        sections.append(table.to_string(index=False))
        sections.append('')
        sections.append(f"{paradigm}: task versus rest by region pair ({SIGNIFICANT} p < {alpha:g})")
        sections.append(report.to_string(index=False))
        sections.append('')
    if PARADIGM_COMPARISON_FILE in database:
        sections.append(f"{' versus '.join(paradigms)} by class")
        sections.append(database.read_table(PARADIGM_COMPARISON_FILE).to_string(index=False))
        sections.append('')
    text = '\n'.join(sections)
    print(text)
    return text
