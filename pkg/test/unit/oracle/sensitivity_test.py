import unittest

import numpy as np

from lrsens.errors import ModelError, NumericalError
from lrsens.io.modelfile import load_model
from lrsens.observables import SpeciesCount
from lrsens.oracle import (
    asymptotic_covariance,
    AsymptoticCovariance,
    linear_moment_sensitivity,
    linear_moment_steady_state,
    sample_limit_distributions,
    sensitivity_direct,
    sensitivity_fd,
    solve_poisson,
    stationary_expectation
)
from lrsens.simulation import RngStream

class TestIsomerization(unittest.TestCase):
    def setUp(self):
        self.model = load_model("isomerization")
        self.net = self.model.network
        self.trunc = self.model.build_truncation()
        self.f = self.model.observables[0]

    def test_sensitivities(self):
        self.assertAlmostEqual(sensitivity_direct(self.net, [1.0, 2.0], self.trunc, self.f, 0),
                               -2.0/9.0, places=12)
        self.assertAlmostEqual(sensitivity_direct(self.net, [1.0, 2.0], self.trunc, self.f, "c2"),
                               1.0/9.0, places=12)

    def test_reuses_poisson_solution(self):
        solution = solve_poisson(self.net, [1.0, 2.0], self.trunc, self.f)
        self.assertAlmostEqual(
            sensitivity_direct(self.net, [1.0, 2.0], self.trunc, self.f, 0, solution),
            -2.0/9.0, places=12)

    def test_covariance(self):
        cov = asymptotic_covariance(self.net, [1.0, 1.0], self.trunc, self.f, 0)
        self.assertAlmostEqual(cov.sigma11_rate, 0.25, places=12)
        self.assertAlmostEqual(cov.sigma12_rate, -0.25, places=12)
        self.assertAlmostEqual(cov.sigma22_rate, 0.5, places=12)
        self.assertAlmostEqual(cov.clr_limit_variance, 0.1875, places=12)
        self.assertAlmostEqual(cov.pi_f, 0.5, places=12)
        self.assertTrue(cov.is_positive_semidefinite())

    def test_score_rate(self):
        cov = asymptotic_covariance(self.net, [2.0, 1.0], self.trunc, self.f, 0)
        self.assertAlmostEqual(cov.sigma22_rate, 1.0/6.0, places=12)

    def test_unknown_parameter(self):
        with self.assertRaises(ModelError):
            sensitivity_direct(self.net, [1.0, 2.0], self.trunc, self.f, "c9")


class TestLinearNetwork(unittest.TestCase):
    def setUp(self):
        self.model = load_model("linear")
        self.net = self.model.network
        self.c = self.net.nominal_parameters
        self.trunc = self.model.build_truncation()
        self.f = self.model.observables[0]

    def test_reference_values(self):
        solution = solve_poisson(self.net, self.c, self.trunc, self.f)
        self.assertAlmostEqual(solution.pi_f, 40.0/9.0, places=9)
        self.assertAlmostEqual(
            sensitivity_direct(self.net, self.c, self.trunc, self.f, "c3", solution), -49.3827,
            places=3)
        self.assertAlmostEqual(
            sensitivity_direct(self.net, self.c, self.trunc, self.f, "c4", solution), 74.0741,
            places=3)

    def test_matches_moment_equations(self):
        moments = linear_moment_sensitivity(self.net, self.c, self.f, self.model.initial_state)
        solution = solve_poisson(self.net, self.c, self.trunc, self.f)
        for k in range(self.net.num_parameters):
            direct = sensitivity_direct(self.net, self.c, self.trunc, self.f, k, solution)
            self.assertAlmostEqual(direct, moments[k], delta=1e-8*max(1.0, abs(moments[k])))

    def test_matches_finite_differences(self):
        direct = sensitivity_direct(self.net, self.c, self.trunc, self.f, 2)
        fd = sensitivity_fd(self.net, self.c, self.trunc, self.f, 2)
        self.assertAlmostEqual(direct, fd, delta=1e-4*abs(direct))

    def test_moment_steady_state(self):
        np.testing.assert_allclose(
            linear_moment_steady_state(self.net, self.c, self.model.initial_state),
            [40.0/9.0, 20.0/9.0, 30.0/9.0])
        with self.assertRaises(ModelError):
            linear_moment_steady_state(self.net, self.c)

    def test_stationary_expectation(self):
        x2 = SpeciesCount.of(1, 3, "x2")
        self.assertAlmostEqual(stationary_expectation(self.net, self.c, self.trunc, x2), 20.0/9.0,
                               places=9)

    def test_fd_step(self):
        with self.assertRaises(ValueError):
            sensitivity_fd(self.net, self.c, self.trunc, self.f, 2, h_rel=1.5)


class TestBirthDeath(unittest.TestCase):
    def test_sensitivities(self):
        model = load_model("birth_death")
        net, trunc, f = model.network, model.build_truncation(), model.observables[0]
        self.assertAlmostEqual(sensitivity_direct(net, [1.0, 1.0], trunc, f, "k"), 1.0, places=8)
        self.assertAlmostEqual(sensitivity_direct(net, [1.0, 1.0], trunc, f, "gamma"), -1.0,
                               places=8)
        np.testing.assert_allclose(linear_moment_sensitivity(net, [1.0, 1.0], f), [1.0, -1.0])

    def test_nonaffine_network(self):
        model = load_model("twogene")
        with self.assertRaises(ModelError):
            linear_moment_steady_state(model.network, model.network.nominal_parameters,
                                       model.initial_state)


class TestLimitDistributions(unittest.TestCase):
    def setUp(self):
        self.cov = AsymptoticCovariance(0.25, -0.25, 0.5, pi_f=0.5)

    def test_moments(self):
        samples = sample_limit_distributions(self.cov, 100, 20_000, RngStream(7))
        self.assertEqual(samples.clr.shape, (20_000,))
        self.assertAlmostEqual(samples.clr.mean(), -0.25, delta=0.02)
        self.assertAlmostEqual(samples.clr.var(), 0.1875, delta=0.1*0.1875)
        self.assertAlmostEqual(samples.lr.var(), 0.125, delta=0.1*0.125)
        self.assertAlmostEqual(samples.int_lr.var(), 0.125/3.0, delta=0.1*0.125/3.0)
        self.assertAlmostEqual(samples.int_clr.mean(), -0.25, delta=0.02)

    def test_integrated_limit_halves_variance(self):
        samples = sample_limit_distributions(self.cov, 100, 100_000, RngStream(17))
        clr_var = samples.clr.var()
        self.assertAlmostEqual(clr_var, self.cov.clr_limit_variance, delta=0.05*0.1875)
        self.assertLessEqual(samples.int_clr.var(), 0.55*clr_var)

    def test_reproducible(self):
        first = sample_limit_distributions(self.cov, 100, 1000, RngStream(3), batch_size=300)
        second = sample_limit_distributions(self.cov, 100, 1000, RngStream(3), batch_size=300)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_validation(self):
        with self.assertRaises(ValueError):
            sample_limit_distributions(self.cov, 10, 100, RngStream(0))
        with self.assertRaises(NumericalError):
            sample_limit_distributions(AsymptoticCovariance(1.0, 2.0, 1.0), 100, 10, RngStream(0))
