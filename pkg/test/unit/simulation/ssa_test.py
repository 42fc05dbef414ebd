import os
import unittest

import numpy as np
from scipy import stats

from lrsens.errors import SimulationError
from lrsens.io.modelfile import load_model
from lrsens.network import Hill, Reaction, ReactionNetwork
from lrsens.observables import constant, SpeciesCount
from lrsens.simulation import (
    checkpoint_grid,
    event_stream,
    replay,
    RngStream,
    simulate
)

SLOW = os.environ.get("LRSENS_SLOW") == "1"

class TestCheckpointGrid(unittest.TestCase):
    def test_appends_t_end(self):
        np.testing.assert_array_equal(checkpoint_grid(10.0, [2.0, 5.0]), [2.0, 5.0, 10.0])
        np.testing.assert_array_equal(checkpoint_grid(10.0), [10.0])

    def test_sorts_and_deduplicates(self):
        np.testing.assert_array_equal(checkpoint_grid(4.0, [3.0, 1.0, 3.0, 4.0]), [1.0, 3.0, 4.0])

    def test_rejects_invalid(self):
        with self.assertRaises(ValueError):
            checkpoint_grid(0.0)
        with self.assertRaises(ValueError):
            checkpoint_grid(5.0, [6.0])
        with self.assertRaises(ValueError):
            checkpoint_grid(5.0, [0.0, 1.0])


class TestRngStream(unittest.TestCase):
    def test_reproducible(self):
        a = RngStream(7, 3).generator().random(5)
        b = RngStream(7, 3).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(7, 3).generator().random(5)
        b = RngStream(7, 4).generator().random(5)
        self.assertFalse(np.array_equal(a, b))


class TestSimulate(unittest.TestCase):
    def setUp(self):
        self.model = load_model("linear")
        self.net = self.model.network
        self.c = self.net.nominal_parameters
        self.x1 = SpeciesCount.of(0, 3, "x1")

    def run_linear(self, stream=0, **kwargs):
        return simulate(
            self.net, self.c, self.model.initial_state, 20.0, [1.0, 5.0, 10.0], [self.x1],
            [0, 1, 2, 3], rng=RngStream(11, stream), **kwargs)

    def test_checkpoints(self):
        record = self.run_linear()
        np.testing.assert_array_equal(record.times, [1.0, 5.0, 10.0, 20.0])
        self.assertEqual(record.acc.shape, (4, record.layout.size))
        self.assertFalse(record.absorbed)

    def test_conservation_and_non_negativity(self):
        record = self.run_linear()
        self.assertTrue((record.states >= 0).all())
        np.testing.assert_array_equal(record.states.sum(axis=1), 10)

    def test_deterministic(self):
        a = self.run_linear(stream=2)
        b = self.run_linear(stream=2)
        np.testing.assert_array_equal(a.acc, b.acc)
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_streams_differ(self):
        a = self.run_linear(stream=2)
        b = self.run_linear(stream=3)
        self.assertFalse(np.array_equal(a.acc, b.acc))

    def test_reduced_weights_match_general_form(self):
        for stream in range(5):
            record = simulate(
                self.net, self.c, self.model.initial_state, 1000.0, [10.0, 100.0, 500.0],
                [self.x1], [0, 1, 2, 3], rng=RngStream(11, stream))
            general = record.weights()
            scale = max(1.0, float(np.abs(general).max()))
            np.testing.assert_allclose(
                record.reduced_weights(), general, rtol=1e-12, atol=1e-12*scale)

    def test_counts_are_monotone(self):
        record = self.run_linear()
        self.assertTrue((np.diff(record.counts, axis=0) >= 0).all())
        self.assertTrue((np.diff(record.acc[:, record.layout.int_a], axis=0) >= 0).all())

    def test_constant_observable_integrals(self):
        f = constant(3.0, 3)
        record = simulate(self.net, self.c, self.model.initial_state, 20.0, [5.0, 10.0], [f],
                          [2], rng=RngStream(0))
        layout = record.layout
        np.testing.assert_allclose(record.acc[:, layout.int_f][:, 0], 3.0*record.times)
        np.testing.assert_allclose(
            record.acc[:, layout.int_fz][:, 0], 3.0*record.acc[:, layout.int_z][:, 0],
            rtol=1e-9, atol=1e-9)

    def test_online_centering(self):
        record = self.run_linear(centering=[40.0/9.0])
        layout = record.layout
        int_fz = record.acc[:, layout.int_fz]
        expected = int_fz - (40.0/9.0)*record.acc[:, layout.int_z]
        scale = np.abs(int_fz).max()
        np.testing.assert_allclose(record.acc[:, layout.int_fcz], expected, atol=1e-9*scale)
        np.testing.assert_array_equal(record.centering, [40.0/9.0])

    def test_accumulator_snapshot(self):
        record = self.run_linear()
        acc = record.accumulators(1)
        self.assertEqual(acc.int_fZ.shape, (1, 4))
        np.testing.assert_array_equal(acc.R, record.counts[1])
        self.assertIsNone(acc.centering)

    def test_non_mass_action_reduced_weights(self):
        model = load_model("twogene")
        net = model.network
        record = simulate(net, net.nominal_parameters, model.initial_state, 50.0,
                          params_of_interest=[0, 2], rng=RngStream(1))
        reduced = record.reduced_weights()
        self.assertTrue(np.isnan(reduced[:, 0]).all())
        general = record.weights()[:, 1]
        np.testing.assert_allclose(reduced[:, 1], general, rtol=1e-12,
                                   atol=1e-12*max(1.0, float(np.abs(general).max())))


class TestAbsorption(unittest.TestCase):
    def test_pure_death_is_absorbed(self):
        model = load_model("pure_death")
        net = model.network
        with self.assertLogs("lrsens.simulation.ssa", level="WARNING"):
            record = simulate(net, net.nominal_parameters, model.initial_state, 200.0,
                              [50.0, 100.0], model.observables, [0], rng=RngStream(5))
        self.assertTrue(record.absorbed)
        np.testing.assert_array_equal(record.states[-1], [0])
        self.assertEqual(record.counts[-1, 0], 10)

    def test_non_finite_intensity(self):
        net = ReactionNetwork(
            species_names=("S",),
            reactions=(Reaction([0], [1], Hill(0, 1.0, 0)),),
            parameter_names=("K",),
            parameter_values=(0.0,))
        with self.assertRaises(SimulationError) as cm:
            simulate(net, net.nominal_parameters, [0], 1.0, rng=RngStream(0))
        self.assertEqual(cm.exception.time, 0.0)


class TestReplay(unittest.TestCase):
    def test_replay_is_bit_exact(self):
        model = load_model("linear")
        net = model.network
        c = net.nominal_parameters
        rng = RngStream(3, 9)
        events = event_stream(net, c, model.initial_state, 30.0, rng)
        self.assertTrue(all(e1.time < e2.time for e1, e2 in zip(events, events[1:])))
        observables = list(model.observables)
        direct = simulate(net, c, model.initial_state, 30.0, [10.0, 20.0], observables,
                          [0, 1, 2, 3], rng=rng)
        replayed = replay(net, c, model.initial_state, events, 30.0, [10.0, 20.0], observables,
                          [0, 1, 2, 3])
        np.testing.assert_array_equal(direct.acc, replayed.acc)
        np.testing.assert_array_equal(direct.states, replayed.states)

    def test_events_carry_pre_jump_state(self):
        model = load_model("linear")
        net = model.network
        events = event_stream(net, net.nominal_parameters, model.initial_state, 5.0,
                              RngStream(0))
        np.testing.assert_array_equal(events[0].state, model.initial_state)
        for before, after in zip(events, events[1:]):
            np.testing.assert_array_equal(before.state + net.stoichiometry[before.reaction],
                                          after.state)


class TestHoldingTimes(unittest.TestCase):
    def test_first_holding_time_is_exponential(self):
        model = load_model("linear")
        net = model.network
        c = net.nominal_parameters
        x0 = model.initial_state
        total = float(net.intensities(x0, c).sum())
        self.assertAlmostEqual(total, 150.15, places=9)
        first = np.array([
            event_stream(net, c, x0, 1.0, RngStream(21, i))[0].time for i in range(2000)])
        result = stats.kstest(first, "expon", args=(0.0, 1.0/total))
        self.assertGreater(result.pvalue, 0.01)


@unittest.skipUnless(SLOW, "set LRSENS_SLOW=1 to run the Monte Carlo checks")
class TestWeightQuadraticVariation(unittest.TestCase):
    def test_second_moment_rate(self):
        model = load_model("isomerization")
        net = model.network
        t_end = 500.0
        z = np.array([
            simulate(net, [2.0, 1.0], model.initial_state, t_end, params_of_interest=[0],
                     rng=RngStream(13, i)).weights()[-1, 0]
            for i in range(10_000)])
        self.assertAlmostEqual(np.mean(z**2)/t_end, 1.0/6.0, delta=0.05/6.0)
        self.assertLess(abs(z.mean()), 3.0*z.std(ddof=1)/np.sqrt(len(z)))
