import traceback
from dataclasses import dataclass
from typing import Any, Callable, Generator, Sequence
from multiprocessing.pool import ThreadPool


@dataclass
class FailMessage(object):
    sender_id: int
    text: str
    exception: BaseException = None


class _Task(object):
    """Runs function on one indexed parameter and turns any exception into a FailMessage."""

    def __init__(self, function: Callable[[Any], Any]):
        self.function = function

    def __call__(self, indexed: tuple):
        index, parameter = indexed
        try:
            return self.function(parameter)
        except Exception as exception:
            return FailMessage(sender_id=index, text=traceback.format_exc(limit=3), exception=exception)


class WorkerPool(object):
    """
    Maps a function over parameters on a pool of threads. The numeric kernels release the GIL inside numpy and
    scipy, so threads share the input data without copies. Results come back in submission order.
    """

    def __init__(self, n_jobs: int = 1, verbose: int = 0):
        if not isinstance(n_jobs, int):
            raise TypeError(f"the 'n_jobs' specified was of wrong type {type(n_jobs)}, expected {int}.")
        if n_jobs < 1:
            raise ValueError(f"the 'n_jobs' specified was less than 1.")
        if not isinstance(verbose, int):
            raise TypeError(f"the 'verbose' specified was of wrong type {type(verbose)}, expected {int}.")
        self.n_jobs = n_jobs
        self.verbose = verbose
        self._pool: ThreadPool = None

    def _print(self, message: str) -> None:
        if self.verbose < 1:
            return
        print(f"{self.__class__.__name__}: {message}")

    def _on_fail_message(self, message: FailMessage) -> None:
        self._print(f"fail message received from task {message.sender_id}: {message.text}")

    def start(self) -> None:
        if self._pool is not None:
            raise Exception("service is already running. Consider calling stop() when service is not in use.")
        self._pool = ThreadPool(processes=self.n_jobs)

    def stop(self) -> None:
        if self._pool is None:
            return
        self._pool.close()
        self._pool.join()
        self._pool = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *args) -> None:
        self.stop()

    def imap(self, function: Callable[[Any], Any], parameters: Sequence[Any]) -> Generator[Any, None, None]:
        """Yields function(parameter) in the order of parameters. The first failure is re-raised in the caller."""
        if not callable(function):
            raise TypeError("'function' is not callable")
        if not isinstance(parameters, (list, tuple)):
            raise TypeError("'parameters' is not a sequence")
        if self._pool is None:
            raise Exception("service is not running. Consider calling start() first.")
        self._print(f"queuing {len(parameters)} parameters...")
        n_returned = 0
        for result in self._pool.imap(_Task(function), list(enumerate(parameters))):
            if isinstance(result, FailMessage):
                self._on_fail_message(result)
                raise result.exception
            n_returned += 1
            yield result
        self._print(f"all {n_returned} parameters were executed successfully.")
