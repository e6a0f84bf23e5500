"""
Paired task-versus-rest statistics and descriptive summaries.
"""
import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import betainc
from statsmodels.stats.multitest import multipletests

from plv.exceptions import NumericError, DataError
from plv.ingest.montage import REGION_PAIRS
from plv.utils.formatting import round_half_up

CORRECTIONS = ('none', 'bonferroni', 'holm', 'fdr_bh')
SIGNIFICANT = '*'


class DegenerateVarianceError(NumericError):
    pass


class IncompleteValuesError(DataError):
    pass


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int


@dataclass(frozen=True)
class RegionPairResult:
    pair: Tuple[str, str]
    mean_task: float
    mean_rest: float
    t: float
    p: float
    df: int
    p_adjusted: Optional[float] = None

    @property
    def label(self) -> str:
        return f"{self.pair[0]}-{self.pair[1]}"

    def is_significant(self, alpha: float) -> bool:
        p = self.p if self.p_adjusted is None else self.p_adjusted
        return p < alpha


@dataclass(frozen=True)
class ParadigmComparison:
    class_label: str
    mean_first: float
    mean_second: float
    t: float
    p: float
    df: int


def _vector(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1:
        raise ValueError(f"the '{name}' specified must be one-dimensional, got {array.ndim} dimensions.")
    if not np.all(np.isfinite(array)):
        raise IncompleteValuesError(f"the '{name}' specified holds missing or non-finite values.")
    return array


def student_t_two_tailed(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom, via the regularized incomplete beta function."""
    if df < 1:
        raise ValueError(f"the 'df' specified was less than 1.")
    if math.isinf(t):
        return 0.0
    p = betainc(df / 2.0, 0.5, df / (df + t * t))
    return float(min(max(p, 0.0), 1.0))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed paired Student t-test of a against b over matched observations."""
    a, b = _vector(a, 'a'), _vector(b, 'b')
    if len(a) != len(b):
        raise ValueError(f"paired samples must have equal length, got {len(a)} and {len(b)}.")
    if len(a) < 2:
        raise ValueError(f"a paired t-test needs at least 2 pairs, got {len(a)}.")
    n = len(a)
    df = n - 1
    differences = a - b
    mean = differences.mean()
    sd = differences.std(ddof=1)
    # differences that agree up to rounding count as having no spread
    tolerance = 16 * np.finfo(np.float64).eps * max(np.abs(a).max(), np.abs(b).max(), np.finfo(np.float64).tiny)
    if sd <= tolerance:
        if abs(mean) <= tolerance:
            return TTestResult(t=0.0, p=1.0, df=df)
        raise DegenerateVarianceError(
            f"the paired differences are constant ({mean:g}) and have no variance, t is undefined.")
    t = float(mean / (sd / math.sqrt(n)))
    return TTestResult(t=t, p=student_t_two_tailed(t, df), df=df)


def sample_std(values: Sequence[float]) -> float:
    values = _vector(values, 'values')
    if len(values) < 2:
        raise ValueError(f"the sample standard deviation needs at least 2 values, got {len(values)}.")
    return float(values.std(ddof=1))


def summarize(values: Sequence[float]) -> Tuple[float, float]:
    """Arithmetic mean and sample standard deviation. A single value has an undefined (NaN) deviation."""
    values = _vector(values, 'values')
    if len(values) == 0:
        raise ValueError("cannot summarize an empty sequence.")
    if len(values) == 1:
        warnings.warn("the standard deviation of a single value is undefined.")
        return float(values[0]), float('nan')
    return float(values.mean()), sample_std(values)


def adjust_p_values(p_values: Sequence[float], method: str = 'none') -> List[float]:
    """Family-wise or false-discovery-rate adjustment of a family of p-values."""
    if method not in CORRECTIONS:
        raise ValueError(f"the 'method' specified must be one of {CORRECTIONS}, got '{method}'.")
    p_values = [float(p) for p in p_values]
    if method == 'none' or not p_values:
        return p_values
    _, adjusted, _, _ = multipletests(p_values, method=method)
    return [float(p) for p in adjusted]


def _complete_grid(grid: pd.DataFrame, name: str) -> pd.DataFrame:
    if not isinstance(grid, pd.DataFrame):
        raise TypeError(f"the '{name}' specified was of wrong type {type(grid)}, expected {pd.DataFrame}.")
    grid = grid.astype(np.float64)
    if grid.isna().any().any():
        raise IncompleteValuesError(f"the '{name}' grid has missing cells.")
    return grid


def region_report(
        task_values: pd.DataFrame, rest_values: pd.DataFrame,
        pairs: Sequence[Tuple[str, str]] = None, correction: str = 'none') -> List[RegionPairResult]:
    """
    One paired task-versus-rest test per region pair. Both grids are subjects x pair labels ('B-V', ...),
    with identical subjects.
    """
    pairs = REGION_PAIRS if pairs is None else tuple(pairs)
    task_values = _complete_grid(task_values, 'task_values')
    rest_values = _complete_grid(rest_values, 'rest_values')
    if list(task_values.index) != list(rest_values.index):
        raise IncompleteValuesError("the task and rest grids must hold the same subjects in the same order.")
    tests = []
    for pair in pairs:
        label = f"{pair[0]}-{pair[1]}"
        if label not in task_values.columns or label not in rest_values.columns:
            raise IncompleteValuesError(f"the region pair {label} is missing from the grids.")
        task, rest = task_values[label].to_numpy(), rest_values[label].to_numpy()
        tests.append((pair, float(task.mean()), float(rest.mean()), paired_t_test(task, rest)))
    adjusted = adjust_p_values([test.p for *_, test in tests], correction)
    return [
        RegionPairResult(
            pair=pair, mean_task=mean_task, mean_rest=mean_rest, t=test.t, p=test.p, df=test.df,
            p_adjusted=p_adjusted if correction != 'none' else None)
        for (pair, mean_task, mean_rest, test), p_adjusted in zip(tests, adjusted)]


def paradigm_comparison(first: pd.DataFrame, second: pd.DataFrame) -> List[ParadigmComparison]:
    """Per class paired test between two paradigms. Both grids are subjects x classes over the same subjects."""
    first = _complete_grid(first, 'first')
    second = _complete_grid(second, 'second')
    if list(first.index) != list(second.index):
        raise IncompleteValuesError("both paradigms must hold the same subjects in the same order.")
    comparisons = []
    for class_label in first.columns:
        if class_label not in second.columns:
            raise IncompleteValuesError(f"class {class_label} is missing from the second paradigm.")
        a, b = first[class_label].to_numpy(), second[class_label].to_numpy()
        test = paired_t_test(a, b)
        comparisons.append(ParadigmComparison(
            class_label=class_label, mean_first=float(a.mean()), mean_second=float(b.mean()),
            t=test.t, p=test.p, df=test.df))
    return comparisons


def format_p(p: float, decimals: int = 3) -> str:
    """p-values below the display resolution print as zero."""
    if p < 10 ** -decimals:
        return f"{0:.{decimals}f}"
    return round_half_up(p, decimals)


def format_region_report(
        results: Sequence[RegionPairResult], precision: int = 2, alpha: Optional[float] = None) -> pd.DataFrame:
    """
    Display table: means at the report precision, t and p at 3 decimals, ASCII minus.
    Given an alpha, a significant column marks the rows whose unrounded p (adjusted when present) is below it.
    """
    rows = []
    for result in results:
        row = {
            'pair': result.label,
            'task': round_half_up(result.mean_task, precision),
            'rest': round_half_up(result.mean_rest, precision),
            't': round_half_up(result.t, 3),
            'p': format_p(result.p),
            'df': str(result.df)}
        if result.p_adjusted is not None:
            row['p_adjusted'] = format_p(result.p_adjusted)
        if alpha is not None:
            row['significant'] = SIGNIFICANT if result.is_significant(alpha) else ''
        rows.append(row)
    return pd.DataFrame(rows, columns=list(rows[0].keys()) if rows else ['pair', 'task', 'rest', 't', 'p', 'df'])


def format_paradigm_comparison(
        comparisons: Sequence[ParadigmComparison], names: Tuple[str, str], precision: int = 2) -> pd.DataFrame:
    rows = [{
        'class': comparison.class_label,
        names[0]: round_half_up(comparison.mean_first, precision),
        names[1]: round_half_up(comparison.mean_second, precision),
        't': round_half_up(comparison.t, 3),
        'p': format_p(comparison.p),
        'df': str(comparison.df)} for comparison in comparisons]
    return pd.DataFrame(rows, columns=['class', names[0], names[1], 't', 'p', 'df'])
