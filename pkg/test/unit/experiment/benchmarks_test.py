import os
import unittest

from lrsens.errors import AcceptanceError, UsageError
from lrsens.experiment import bench_linear, bench_twogene, BENCHMARKS, BenchmarkResult, Check
from lrsens.experiment.benchmarks import TWOGENE_SIGNS
from lrsens.io.modelfile import load_model
from .report_test import report

SLOW = os.environ.get("LRSENS_SLOW") == "1"

class TestBenchmarkResult(unittest.TestCase):
    def test_failures(self):
        result = BenchmarkResult("demo", "desk", report([]), [
            Check("first", True, 0.5, "<= 1"),
            Check("second", False, 2.0, "<= 1"),
        ], {})
        self.assertFalse(result.passed)
        self.assertEqual(result.table()[1],
                         {"name": "second", "passed": False, "value": 2.0, "threshold": "<= 1"})
        with self.assertRaises(AcceptanceError):
            result.raise_for_failures()

    def test_passed(self):
        result = BenchmarkResult("demo", "desk", report([]), [Check("only", True, 0.0, "")], {})
        self.assertTrue(result.passed)
        result.raise_for_failures()


class TestBenchmarkSetup(unittest.TestCase):
    def test_registry(self):
        self.assertEqual(sorted(BENCHMARKS), ["linear", "twogene"])

    def test_unknown_scale(self):
        with self.assertRaises(UsageError):
            bench_linear("huge")
        with self.assertRaises(UsageError):
            bench_twogene("huge")

    def test_sign_pattern_names(self):
        self.assertEqual(set(TWOGENE_SIGNS), set(load_model("twogene").network.parameter_names))


@unittest.skipUnless(SLOW, "set LRSENS_SLOW=1 to run the Monte Carlo benchmarks")
class TestBenchmarks(unittest.TestCase):
    def test_linear(self):
        result = bench_linear("desk", seed=0, progress=False)
        self.assertTrue(result.passed, result.table())

    def test_twogene(self):
        result = bench_twogene("desk", seed=0, progress=False)
        self.assertTrue(result.passed, result.table())
