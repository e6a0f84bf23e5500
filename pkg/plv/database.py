from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd

from plv.exceptions import DataError


class AnalysisOutputError(DataError):
    pass


class OutputDirectoryError(DataError):
    pass


class ReadOnlyDatabase(object):
    """A directory of CSV result tables."""

    def __init__(self, database_path: Union[Path, str], extension: str = "csv"):
        if not isinstance(database_path, (Path, str)):
            raise TypeError(f"the 'database_path' specified was of wrong type {type(database_path)}, expected {Path} or {str}.")
        if not isinstance(extension, str):
            raise TypeError(f"the 'extension' specified was of wrong type {type(extension)}, expected {str}.")
        self.extension = extension
        self.path = Path(database_path)

    @property
    def exists(self) -> bool:
        return self.path.is_dir()

    def __len__(self) -> int:
        return len(list(self.path.glob(f'*.{self.extension}'))) if self.exists else 0

    def __contains__(self, file_name: str) -> bool:
        return Path(self.path, file_name).is_file()

    def file_path(self, file_name: str) -> Path:
        return Path(self.path, file_name)

    def missing(self, file_names: Iterable[str]) -> List[str]:
        """The file names that are not in the database, in the order given."""
        return [file_name for file_name in file_names if file_name not in self]

    def read_table(self, file_name: str) -> pd.DataFrame:
        """ Reads a table with every cell kept as the text it was written as. """
        path = self.file_path(file_name)
        if not path.is_file():
            raise AnalysisOutputError(f"the analysis output {file_name} is missing from {self.path}.")
        try:
            return pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
        except (ValueError, pd.errors.ParserError) as exception:
            raise AnalysisOutputError(f"the analysis output {file_name} is corrupt: {exception}") from None


class Database(ReadOnlyDatabase):
    def __init__(self, directory_path: Union[Path, str], database_name: str = None, extension: str = "csv"):
        if not isinstance(directory_path, (Path, str)):
            raise TypeError(f"the 'directory_path' specified was of wrong type {type(directory_path)}, expected {Path} or {str}.")
        if database_name is not None and not isinstance(database_name, str):
            raise TypeError(f"the 'database_name' specified was of wrong type {type(database_name)}, expected {str}.")
        database_path = Path(directory_path, database_name) if database_name else Path(directory_path)
        if database_path.exists() and not database_path.is_dir():
            raise FileExistsError(f"Database path is occupied by a file: {database_path}")
        super().__init__(database_path=database_path, extension=extension)
        # create database directory
        try:
            self.path.mkdir(parents=True, exist_ok=True)
        except OSError as exception:
            raise OutputDirectoryError(f"the output directory {self.path} could not be created: {exception}") from None

    def create_file(self, tag: str, file_name: str) -> Path:
        """ Create a new file in a folder named after the specified tag-string, which is located in the database directory. """
        file_path = Path(self.path, tag, file_name)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        return file_path

    def write_table(self, table: pd.DataFrame, file_name: str, index: bool = False, float_format: str = None) -> Path:
        """ Writes the table as UTF-8 CSV with LF line endings, replacing any previous version. """
        path = self.file_path(file_name)
        table.to_csv(path, index=index, encoding='utf-8', lineterminator='\n', float_format=float_format)
        return path

    def write_text(self, text: str, file_name: str) -> Path:
        path = self.file_path(file_name)
        with path.open('w', encoding='utf-8', newline='\n') as file:
            file.write(text)
        return path
