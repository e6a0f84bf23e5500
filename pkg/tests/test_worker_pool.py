import time
import unittest

from plv.worker_pool import WorkerPool


def slow_square(value: int) -> int:
    # later tasks finish first
    time.sleep(0.001 * (10 - value % 10))
    return value * value


def fail_on_seven(value: int) -> int:
    if value == 7:
        raise ArithmeticError("seven")
    return value


class TestWorkerPool(unittest.TestCase):

    def test_results_keep_submission_order(self):
        with WorkerPool(n_jobs=4) as pool:
            self.assertEqual(list(pool.imap(slow_square, list(range(30)))), [value * value for value in range(30)])

    def test_failure_is_raised_in_the_caller(self):
        with WorkerPool(n_jobs=4) as pool:
            with self.assertRaises(ArithmeticError):
                list(pool.imap(fail_on_seven, list(range(20))))

    def test_single_worker(self):
        with WorkerPool(n_jobs=1) as pool:
            self.assertEqual(list(pool.imap(str, (1, 2, 3))), ['1', '2', '3'])

    def test_not_started(self):
        pool = WorkerPool(n_jobs=2)
        with self.assertRaises(Exception):
            list(pool.imap(str, [1]))
        pool.start()
        with self.assertRaises(Exception):
            pool.start()
        pool.stop()
        pool.stop()

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            WorkerPool(n_jobs=0)
        with self.assertRaises(TypeError):
            WorkerPool(n_jobs=2.0)
        with WorkerPool(n_jobs=2) as pool:
            with self.assertRaises(TypeError):
                list(pool.imap(str, {1, 2}))
            with self.assertRaises(TypeError):
                list(pool.imap(None, [1]))
