import unittest

from hypothesis import given, settings
import hypothesis.strategies as st
import numpy as np

from lrsens.errors import CenteringError
from lrsens.estimators import (
    clr_estimate,
    collect_estimates,
    estimate,
    EstimatorKind,
    int_clr_estimate,
    int_lr_estimate,
    lr_estimate,
    merge_all,
    Moments,
    reconstruct_int_clr,
    record_estimates
)
from lrsens.io.modelfile import load_model
from lrsens.simulation import RngStream, SensitivityAccumulators, simulate

def snapshot(centering=(2.0,)) -> SensitivityAccumulators:
    return SensitivityAccumulators(
        Z=np.array([2.0]),
        int_Z=np.array([3.0]),
        R=np.array([4]),
        int_a=np.array([4.5]),
        int_f=np.array([10.0]),
        int_fZ=np.array([[7.0]]),
        int_fcZ=np.array([[1.0]]),
        centering=None if centering is None else np.array(centering))

class TestEstimatorKind(unittest.TestCase):
    def test_parse(self):
        self.assertEqual(EstimatorKind.parse("int-CLR"), EstimatorKind.INT_CLR)
        self.assertEqual(EstimatorKind.parse("IntLR"), EstimatorKind.INT_LR)
        with self.assertRaises(ValueError):
            EstimatorKind.parse("sclr")

    def test_parse_list_keeps_canonical_order(self):
        self.assertEqual(EstimatorKind.parse_list("intclr,lr"),
                         (EstimatorKind.LR, EstimatorKind.INT_CLR))
        with self.assertRaises(ValueError):
            EstimatorKind.parse_list(" , ")

    def test_labels(self):
        self.assertEqual([k.label for k in EstimatorKind], ["LR", "CLR", "intLR", "intCLR"])
        self.assertTrue(EstimatorKind.CLR.needs_centering)
        self.assertFalse(EstimatorKind.INT_LR.needs_centering)


class TestSnapshotEstimators(unittest.TestCase):
    def test_lr(self):
        np.testing.assert_allclose(lr_estimate(snapshot(), 5.0), [[4.0]])

    def test_clr(self):
        np.testing.assert_allclose(clr_estimate(snapshot(), 5.0, 2.0), [[0.0]])
        np.testing.assert_allclose(clr_estimate(snapshot(), 5.0, 1.0), [[2.0]])

    def test_int_lr(self):
        np.testing.assert_allclose(int_lr_estimate(snapshot(), 5.0), [[1.4]])

    def test_int_clr_online(self):
        np.testing.assert_allclose(int_clr_estimate(snapshot(), 5.0), [[0.2]])
        np.testing.assert_allclose(int_clr_estimate(snapshot(), 5.0, 2.0), [[0.2]])

    def test_int_clr_reconstruction(self):
        np.testing.assert_allclose(reconstruct_int_clr(snapshot(), 5.0, 2.0), [[0.2]])
        np.testing.assert_allclose(int_clr_estimate(snapshot(), 5.0, 1.0), [[0.8]])
        np.testing.assert_allclose(int_clr_estimate(snapshot(None), 5.0, 1.0), [[0.8]])

    def test_dispatch(self):
        acc = snapshot()
        np.testing.assert_allclose(estimate(EstimatorKind.CLR, acc, 5.0), [[0.0]])
        np.testing.assert_allclose(estimate(EstimatorKind.LR, acc, 5.0), [[4.0]])

    def test_centering_required(self):
        with self.assertRaises(CenteringError):
            estimate(EstimatorKind.CLR, snapshot(None), 5.0)
        with self.assertRaises(CenteringError):
            int_clr_estimate(snapshot(None), 5.0)

    def test_positive_time(self):
        for kind in EstimatorKind:
            with self.assertRaises(ValueError):
                estimate(kind, snapshot(), 0.0)


class TestRecordEstimates(unittest.TestCase):
    def setUp(self):
        model = load_model("linear")
        net = model.network
        self.record = simulate(
            net, net.nominal_parameters, model.initial_state, 50.0, [10.0, 25.0],
            model.observables, [2, 3], centering=[40.0/9.0], rng=RngStream(4))

    def test_matches_snapshots(self):
        values = record_estimates(self.record, tuple(EstimatorKind))
        for i, t in enumerate(self.record.times):
            acc = self.record.accumulators(i)
            for kind in EstimatorKind:
                np.testing.assert_allclose(values[kind][i], estimate(kind, acc, t), rtol=1e-12)

    def test_shapes(self):
        values = record_estimates(self.record, (EstimatorKind.LR,))
        self.assertEqual(values[EstimatorKind.LR].shape, (3, 1, 2))

    def test_foreign_centering_reconstructs(self):
        online = record_estimates(self.record, (EstimatorKind.INT_CLR,))[EstimatorKind.INT_CLR]
        rebuilt = record_estimates(
            self.record, (EstimatorKind.INT_CLR,), [40.0/9.0 + 1e-3])[EstimatorKind.INT_CLR]
        self.assertFalse(np.array_equal(online, rebuilt))
        for i, t in enumerate(self.record.times):
            expected = reconstruct_int_clr(self.record.accumulators(i), t, 40.0/9.0 + 1e-3)
            np.testing.assert_allclose(rebuilt[i], expected, rtol=1e-12, atol=1e-12)

    def test_collect(self):
        estimate_ = collect_estimates([self.record, self.record], EstimatorKind.LR, 1)
        self.assertEqual(estimate_.parameter, 3)
        self.assertEqual(estimate_.t, 50.0)
        self.assertEqual(estimate_.variance, 0.0)


class TestMoments(unittest.TestCase):
    @given(
        st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=2, max_size=40),
        st.integers(min_value=1, max_value=39))
    @settings(max_examples=50)
    def test_merge_matches_direct(self, values, split):
        values = np.array(values)
        split = min(split, len(values) - 1)
        merged = Moments.of(values[:split]).merge(Moments.of(values[split:]))
        direct = Moments.of(values)
        self.assertEqual(merged.count, direct.count)
        np.testing.assert_allclose(merged.mean, direct.mean, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(merged.m2, direct.m2, rtol=1e-7, atol=1e-6)

    def test_statistics(self):
        m = Moments.of(np.array([1.0, 2.0, 3.0, 4.0]))
        self.assertAlmostEqual(float(m.variance), 5.0/3.0)
        self.assertAlmostEqual(float(m.standard_error), np.sqrt(5.0/12.0))
        lo, hi = m.confidence_interval()
        self.assertAlmostEqual(float(hi - lo), 2*1.96*np.sqrt(5.0/12.0))

    def test_empty_merge(self):
        m = Moments.of(np.array([[1.0, 2.0]]))
        self.assertIs(Moments.empty((2,)).merge(m), m)
        self.assertTrue(np.isnan(m.variance).all())

    def test_merge_all_order(self):
        chunks = [Moments.of(np.arange(i, i + 3, dtype=float)) for i in range(0, 12, 3)]
        self.assertEqual(merge_all(chunks).count, 12)
        self.assertAlmostEqual(float(merge_all(chunks).mean), 5.5)
