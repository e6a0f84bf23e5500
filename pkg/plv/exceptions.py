from typing import Iterable, Union


class PlvError(Exception):
    """Base class of every error raised by the toolkit. The exit code is used by main.py."""
    exit_code = 1


class ConfigurationError(PlvError):
    """Raised when a configuration, montage or band definition is invalid. Holds every problem found."""
    exit_code = 2

    def __init__(self, problems: Union[str, Iterable[str]]):
        self.problems = [problems] if isinstance(problems, str) else list(problems)
        if len(self.problems) == 1:
            message = self.problems[0]
        else:
            message = f"{len(self.problems)} configuration problems:\n" + "\n".join(f"  - {problem}" for problem in self.problems)
        super().__init__(message)


class DataError(PlvError):
    """Raised when input data is missing, malformed or inconsistent."""
    exit_code = 3


class NumericError(PlvError):
    """Raised when a computation is numerically degenerate."""
    exit_code = 4
