"""
Report tables built from per-unit region connectivity: class tables, task-versus-rest region reports, the long
table of every region value, the paradigm comparison and the index the report command reads.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from plv.connectivity import class_table, pair_label
from plv.database import Database
from plv.ingest.montage import ALL, REGION_PAIRS
from plv.preprocess.epochs import TASK, REST, REST_LABEL, PARADIGMS
from plv.stats import region_report, format_region_report, paradigm_comparison, format_paradigm_comparison
from plv.utils.formatting import round_half_up, format_number

ALL_PAIR = pair_label(ALL, ALL)
INDEX_FILE = 'index.csv'
REGION_VALUES_FILE = 'region_values.csv'
PARADIGM_COMPARISON_FILE = 'paradigm_comparison.csv'
VALUE_COLUMNS = ['subject', 'paradigm', 'class', 'condition', 'band', 'pair', 'value']


def class_table_name(paradigm: str, band: str = None) -> str:
    return f"{paradigm}_class_table.csv" if band is None else f"{paradigm}_{band}_class_table.csv"


def region_report_name(paradigm: str, band: str = None) -> str:
    return f"{paradigm}_region_report.csv" if band is None else f"{paradigm}_{band}_region_report.csv"


def expected_outputs(paradigms: Sequence[str], bands: Sequence[str]) -> List[str]:
    """Every file an analysis writes for the given paradigms and band names, index first."""
    names = [INDEX_FILE, REGION_VALUES_FILE]
    for paradigm in paradigms:
        names += [class_table_name(paradigm), region_report_name(paradigm)]
        for band in bands:
            names += [class_table_name(paradigm, band), region_report_name(paradigm, band)]
    if len(paradigms) == 2:
        names.append(PARADIGM_COMPARISON_FILE)
    return names


@dataclass(frozen=True)
class RegionValue:
    class_label: str
    condition: str
    band: str
    pair: Tuple[str, str]
    value: float


@dataclass
class UnitResult:
    """Region connectivity of one subject and paradigm over every analysed class, condition and band."""
    subject: str
    paradigm: str
    values: List[RegionValue] = field(default_factory=list)


class Analyzer(object):
    def __init__(
            self, database: Database, subjects: Sequence[str], classes: Sequence[str], bands: Sequence[str],
            precision: int = 2, alpha: float = 0.05, correction: str = 'none', verbose: bool = False):
        if not isinstance(database, Database):
            raise TypeError(f"the 'database' specified was of wrong type {type(database)}, expected {Database}.")
        if not isinstance(precision, int):
            raise TypeError(f"the 'precision' specified was of wrong type {type(precision)}, expected {int}.")
        self.database = database
        self.subjects = list(subjects)
        self.classes = list(classes)
        self.bands = list(bands)
        self.precision = precision
        self.alpha = alpha
        self.correction = correction
        self.verbose = verbose

    def __print(self, message: str):
        if self.verbose:
            print(f"Analyzer: {message}")

    def values_frame(self, results: Sequence[UnitResult]) -> pd.DataFrame:
        rows = [
            (result.subject, result.paradigm, value.class_label, value.condition, value.band,
             pair_label(*value.pair), value.value)
            for result in results for value in result.values]
        return pd.DataFrame(rows, columns=VALUE_COLUMNS)

    def _select(self, frame: pd.DataFrame, paradigm: str, band: Optional[str]) -> pd.DataFrame:
        rows = frame[frame['paradigm'] == paradigm]
        if band is not None:
            return rows[rows['band'] == band]
        # band average
        return rows.groupby(['subject', 'class', 'condition', 'pair'], sort=False)['value'].mean().reset_index()

    def class_grid(self, frame: pd.DataFrame, paradigm: str, band: str = None) -> pd.DataFrame:
        """Subjects x classes of the task-condition ALL-ALL connectivity."""
        rows = self._select(frame, paradigm, band)
        rows = rows[(rows['pair'] == ALL_PAIR) & (rows['condition'] == TASK)]
        grid = rows.pivot(index='subject', columns='class', values='value')
        return grid.reindex(index=self.subjects, columns=self.classes)

    def region_grids(self, frame: pd.DataFrame, paradigm: str, band: str = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """Subjects x region pairs for the task condition, averaged over the classes, and for the rest condition."""
        rows = self._select(frame, paradigm, band)
        rows = rows[rows['pair'] != ALL_PAIR]
        labels = [pair_label(*pair) for pair in REGION_PAIRS]
        task = rows[rows['condition'] == TASK].groupby(['subject', 'pair'], sort=False)['value'].mean().reset_index()
        rest = rows[(rows['condition'] == REST) & (rows['class'] == REST_LABEL)]
        grids = tuple(
            values.pivot(index='subject', columns='pair', values='value').reindex(index=self.subjects, columns=labels)
            for values in (task, rest))
        return grids

    def create_class_table(self, frame: pd.DataFrame, paradigm: str, band: str = None) -> Path:
        table = class_table(self.class_grid(frame, paradigm, band))
        display = table.map(lambda value: round_half_up(value, self.precision))
        self.__print(f"writing {class_table_name(paradigm, band)}...")
        return self.database.write_table(display, class_table_name(paradigm, band), index=True)

    def create_region_report(self, frame: pd.DataFrame, paradigm: str, band: str = None) -> Path:
        task, rest = self.region_grids(frame, paradigm, band)
        results = region_report(task, rest, correction=self.correction)
        self.__print(f"writing {region_report_name(paradigm, band)}...")
        return self.database.write_table(
            format_region_report(results, self.precision, self.alpha), region_report_name(paradigm, band))

    def create_paradigm_comparison(self, frame: pd.DataFrame) -> Path:
        first, second = PARADIGMS
        comparisons = paradigm_comparison(self.class_grid(frame, first), self.class_grid(frame, second))
        self.__print(f"writing {PARADIGM_COMPARISON_FILE}...")
        return self.database.write_table(
            format_paradigm_comparison(comparisons, names=(first, second), precision=self.precision),
            PARADIGM_COMPARISON_FILE)

    def create_index(self, paradigms: Sequence[str]) -> Path:
        rows = [('paradigm', paradigm) for paradigm in paradigms]
        rows += [('band', band) for band in self.bands]
        rows += [
            ('precision', str(self.precision)),
            ('alpha', format_number(self.alpha)),
            ('correction', self.correction)]
        return self.database.write_table(pd.DataFrame(rows, columns=['key', 'value']), INDEX_FILE)

    def create_reports(self, results: Sequence[UnitResult]) -> List[Path]:
        """Writes every report file. Rows follow the subject order given, columns the class and pair order."""
        frame = self.values_frame(results)
        paradigms = [paradigm for paradigm in PARADIGMS if paradigm in set(frame['paradigm'])]
        paths = [self.database.write_table(frame, REGION_VALUES_FILE, float_format='%.6f')]
        for paradigm in paradigms:
            paths.append(self.create_class_table(frame, paradigm))
            paths.append(self.create_region_report(frame, paradigm))
            for band in self.bands:
                paths.append(self.create_class_table(frame, paradigm, band))
                paths.append(self.create_region_report(frame, paradigm, band))
        if len(paradigms) == 2:
            paths.append(self.create_paradigm_comparison(frame))
        # written last, so an index only exists next to a complete set of reports
        paths.append(self.create_index(paradigms))
        return paths
