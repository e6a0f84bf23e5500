import unittest

if __name__ == '__main__':
    from tests.test_utils import TestFormatting, TestIterable
    from tests.test_brainvision import TestHeader, TestMarkers, TestRecordingFiles
    from tests.test_epochs_csv import TestEpochsCsv
    from tests.test_montage import TestMontage
    from tests.test_preprocess import TestBandpass, TestPhase, TestEpochs
    from tests.test_connectivity import TestPlv, TestRegionAverage, TestClassTable
    from tests.test_stats import TestPairedTTest, TestSummaries, TestCorrections, TestRegionReport, TestParadigmComparison
    from tests.test_synthgen import (
        TestExpectedPlv, TestSeeding, TestCouplingSpec, TestCoupledEpochs, TestPinkNoise, TestRecordingAssembly,
        TestSimulation)
    from tests.test_config import TestRunConfig, TestSimulationSpec
    from tests.test_database import TestDatabase
    from tests.test_worker_pool import TestWorkerPool
    from tests.test_main import TestMain, TestDefaultMontageStudy, TestReportSignificance
    print("unit tests running...")
    unittest.main()
    print("unit tests completed.")
