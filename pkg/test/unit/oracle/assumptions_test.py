import unittest

import numpy as np

from lrsens.errors import ModelError
from lrsens.io.modelfile import load_model
from lrsens.oracle import (
    box,
    check_growth,
    check_lyapunov,
    dynkin_martingale,
    solve_poisson,
    stationary_distribution,
    truncation_error_bound
)
from lrsens.oracle.assumptions import NUMERICAL_FLOOR
from lrsens.simulation import RngStream, simulate

class TestLyapunov(unittest.TestCase):
    def setUp(self):
        self.model = load_model("birth_death")
        self.trunc = self.model.build_truncation()

    def test_birth_death_drift(self):
        report = check_lyapunov(self.model.network, [1.0, 1.0], [1.0], 0.5, self.trunc)
        self.assertEqual(report["holds_outside"], [(0,), (1,), (2,)])
        self.assertAlmostEqual(report["alpha2"], 1.5)
        self.assertEqual(report["worst_state"], (0,))
        self.assertFalse(report["inconclusive"])
        self.assertFalse(report["finite_space_trivial"])
        self.assertTrue(report["boundary_drift_negative"])

    def test_closed_surface(self):
        model = load_model("linear")
        report = check_lyapunov(model.network, model.network.nominal_parameters, [1.0, 1.0, 1.0],
                                0.1, model.build_truncation())
        self.assertTrue(report["finite_space_trivial"])
        self.assertEqual(len(report["holds_outside"]), 66)
        self.assertAlmostEqual(report["alpha2"], 1.1)

    def test_validation(self):
        with self.assertRaises(ValueError):
            check_lyapunov(self.model.network, [1.0, 1.0], [0.0], 0.5, self.trunc)
        with self.assertRaises(ValueError):
            check_lyapunov(self.model.network, [1.0, 1.0], [1.0], 0.0, self.trunc)


class TestGrowth(unittest.TestCase):
    def test_birth_death(self):
        model = load_model("birth_death")
        report = check_growth(model.network, [1.0, 1.0], model.build_truncation(),
                              model.observables[0], [1.0], "k")
        self.assertAlmostEqual(report["intensity_ratio"], 40.0/np.sqrt(41.0))
        self.assertAlmostEqual(report["observable_ratio"], 40.0/np.sqrt(41.0))
        self.assertAlmostEqual(report["regularity"], 3.0)
        self.assertEqual(report["increment_bound"], 1.0)


class TestTruncationError(unittest.TestCase):
    def test_closed_surface_is_floored(self):
        model = load_model("linear")
        solution = solve_poisson(model.network, model.network.nominal_parameters,
                                 model.build_truncation(), model.observables[0])
        self.assertEqual(truncation_error_bound(solution), NUMERICAL_FLOOR)

    def test_grows_with_leak(self):
        model = load_model("birth_death")
        net = model.network
        tight = stationary_distribution(net, [1.0, 1.0], box(net, model.initial_state, [3]))
        values = tight.truncation.states[:, 0].astype(float)
        self.assertGreater(truncation_error_bound(tight, values), 1e-3)
        self.assertGreater(tight.mass_leak_rate, 0.0)


class TestDynkinMartingale(unittest.TestCase):
    def setUp(self):
        self.model = load_model("isomerization")
        self.solution = solve_poisson(self.model.network, [1.0, 2.0], self.model.build_truncation(),
                                      self.model.observables[0])

    def test_mean_zero(self):
        values = []
        for i in range(200):
            record = simulate(self.model.network, [1.0, 2.0], self.model.initial_state, 20.0, [5.0],
                              self.model.observables, [0], rng=RngStream(11, i))
            values.append(dynkin_martingale(self.solution, record, self.model.initial_state))
        values = np.array(values)
        self.assertEqual(values.shape, (200, 2))
        se = values.std(axis=0, ddof=1)/np.sqrt(len(values))
        self.assertTrue((np.abs(values.mean(axis=0)) < 5.0*se).all())
        # Per-unit-time variance 4/27 for this chain.
        self.assertAlmostEqual(values[:, 1].var()/20.0, 4.0/27.0, delta=0.05)

    def test_outside_truncation(self):
        record = simulate(self.model.network, [1.0, 2.0], self.model.initial_state, 1.0,
                          observables=self.model.observables, params_of_interest=[0],
                          rng=RngStream(0))
        with self.assertRaises(ModelError):
            dynkin_martingale(self.solution, record, np.array([3, 0]))
