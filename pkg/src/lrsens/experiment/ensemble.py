"""
Ensemble orchestration: trajectories run in fixed-size chunks on a worker pool and their moments
are merged in trajectory-index order, so the report never depends on the degree of parallelism.
"""
from concurrent.futures import as_completed, ProcessPoolExecutor
from dataclasses import dataclass
import logging
import multiprocessing
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .config import EnsembleConfig
from .report import EnsembleReport, EstimateRow, SlopeFit, sort_key, variance_slope
from .. import __version__
from ..errors import CenteringError, NumericalError, ReducibleError, SingularSystemError
from ..estimators import EstimatorKind, merge_all, Moments, record_estimates, Z_95
from ..lazy import tqdm
from ..oracle import sensitivity_direct, solve_poisson, stationary_distribution
from ..simulation.ssa import make_plan, RngStream, run_plan, SimulationPlan

logger = logging.getLogger(__name__)

WORKERS_ENV = "LRSENS_WORKERS"
PRERUN_BATCHES = 20
PRERUN_STREAM = 2**62

# Pools are created on the command thread, so forking would copy a multi-threaded process.
POOL_START_METHOD = "spawn"

# Workers ------------------------------------------------------------------------------------------

def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning("Ignoring invalid %s=%r", WORKERS_ENV, value)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ChunkResult:
    start: int
    stop: int
    absorbed: int
    estimates: Dict[EstimatorKind, Moments]
    weights: Moments
    compensated: Moments


def run_chunk(
    plan: SimulationPlan,
    seed: int,
    start: int,
    stop: int,
    kinds: Tuple[EstimatorKind, ...]
) -> ChunkResult:
    """
    Simulate trajectories `start..stop - 1` and reduce them to moments.
    """
    values: Dict[EstimatorKind, List[np.ndarray]] = {k: [] for k in kinds}
    weights, compensated = [], []
    absorbed = 0
    for index in range(start, stop):
        record = run_plan(plan, RngStream(seed, index))
        if record.absorbed:
            absorbed += 1
            continue
        for kind, array in record_estimates(record, kinds).items():
            values[kind].append(array)
        weights.append(record.weights())
        compensated.append(record.compensated())
    C = len(plan.checkpoints)
    O = len(plan.tables.offsets)
    K = len(plan.parameters)
    m = len(plan.compiled.kinds)
    return ChunkResult(
        start=start,
        stop=stop,
        absorbed=absorbed,
        estimates={
            k: Moments.of(np.array(v)) if v else Moments.empty((C, O, K))
            for k, v in values.items()
        },
        weights=Moments.of(np.array(weights)) if weights else Moments.empty((C, K)),
        compensated=Moments.of(np.array(compensated)) if compensated else Moments.empty((C, m)))


def _chunks(samples: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(s, min(s + chunk_size, samples)) for s in range(0, samples, chunk_size)]


def _execute(
    plan: SimulationPlan,
    cfg: EnsembleConfig,
    kinds: Tuple[EstimatorKind, ...],
    workers: int,
    progress: bool
) -> List[ChunkResult]:
    chunks = _chunks(cfg.samples, cfg.chunk_size)
    bar = tqdm(total=cfg.samples, desc=cfg.name or "ensemble", unit="traj", disable=not progress)
    results: Dict[int, ChunkResult] = {}
    try:
        if workers <= 1 or len(chunks) == 1:
            for i, (start, stop) in enumerate(chunks):
                results[i] = run_chunk(plan, cfg.seed, start, stop, kinds)
                bar.update(stop - start)
        else:
            with ProcessPoolExecutor(
                max_workers=min(workers, len(chunks)),
                mp_context=multiprocessing.get_context(POOL_START_METHOD)
            ) as executor:
                futures = {
                    executor.submit(run_chunk, plan, cfg.seed, start, stop, kinds): i
                    for i, (start, stop) in enumerate(chunks)
                }
                for future in as_completed(futures):
                    result = future.result()
                    results[futures[future]] = result
                    bar.update(result.stop - result.start)
    finally:
        bar.close()
    return [results[i] for i in range(len(chunks))]

# Centering ----------------------------------------------------------------------------------------

def _oracle_centering(cfg: EnsembleConfig) -> Tuple[np.ndarray, Dict[str, Any], Dict[str, float]]:
    net = cfg.network
    trunc = cfg.centering.resolve_truncation(net, cfg.x0)
    base = stationary_distribution(net, cfg.c, trunc)
    values = []
    oracle: Dict[str, float] = {}
    for f in cfg.observables:
        solution = solve_poisson(net, cfg.c, trunc, f, base)
        values.append(solution.pi_f)
        oracle[f"pi_f[{f.name}]"] = solution.pi_f
        for k in cfg.params_of_interest:
            name = net.parameter_names[k]
            oracle[f"sensitivity[{name}][{f.name}]"] = sensitivity_direct(
                net, cfg.c, trunc, f, k, solution)
    provenance = {
        "source": "oracle",
        "values": [float(v) for v in values],
        "states": len(trunc),
        "mass_leak_rate": base.mass_leak_rate,
    }
    return np.array(values), provenance, oracle


def prerun_centering(cfg: EnsembleConfig) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    Estimate pi(f) from one long ergodic run of length `length_factor * t_end`. The half-width is a
    95% batch-means interval.
    """
    length = cfg.centering.length_factor*cfg.t_end
    batches = np.linspace(0.0, length, PRERUN_BATCHES + 1)[1:]
    plan = make_plan(cfg.network, cfg.c, cfg.x0, length, batches.tolist(), cfg.observables)
    record = run_plan(plan, RngStream(cfg.seed, PRERUN_STREAM))
    if record.absorbed:
        raise CenteringError("the centering pre-run was absorbed")
    int_f = record.acc[:, record.layout.int_f]
    batch_means = np.diff(np.vstack([np.zeros(int_f.shape[1]), int_f]), axis=0)/(
        length/PRERUN_BATCHES)
    values = int_f[-1]/length
    half_width = Z_95*batch_means.std(axis=0, ddof=1)/np.sqrt(PRERUN_BATCHES)
    for name, value, hw in zip(cfg.observable_names, values, half_width):
        logger.warning("Centering %s from a pre-run: %.6g +/- %.2g; the centering error biases "
                       "CLR variances", name, value, hw)
    provenance = {
        "source": "prerun",
        "values": [float(v) for v in values],
        "half_width": [float(h) for h in half_width],
        "length": length,
    }
    return values, provenance


def resolve_centering(
    cfg: EnsembleConfig
) -> Tuple[Optional[np.ndarray], Dict[str, Any], Dict[str, float]]:
    """
    The centering constants, their provenance and any oracle reference values.
    """
    source = cfg.centering
    if source.kind == "value":
        values = np.array(source.values, dtype=np.float64)
        return values, {"source": "value", "values": [float(v) for v in values]}, {}
    if source.kind == "prerun":
        values, provenance = prerun_centering(cfg)
        return values, provenance, {}
    if source.kind == "oracle":
        try:
            return _oracle_centering(cfg)
        except (ReducibleError, SingularSystemError) as e:
            if not source.allow_prerun:
                raise CenteringError(f"oracle centering failed: {e}") from e
            logger.warning("Oracle centering failed (%s); falling back to a pre-run", e)
            values, provenance = prerun_centering(cfg)
            return values, provenance, {}
    if any(k.needs_centering for k in cfg.estimators):
        raise CenteringError("centered estimators were requested without a centering source")
    return None, {"source": "none"}, {}

# Health -------------------------------------------------------------------------------------------

def _null_check(moments: Moments) -> Tuple[bool, float]:
    """
    Whether every mean lies within 3 standard errors of zero, and the largest |mean| / SE.
    """
    se = moments.standard_error
    ratio = np.divide(np.abs(moments.mean), se, out=np.zeros_like(se), where=se > 0.0)
    exact_zero = (se == 0.0) & (moments.mean != 0.0)
    worst = float(ratio.max()) if ratio.size else 0.0
    return bool(worst <= 3.0 and not exact_zero.any()), worst

# Ensemble -----------------------------------------------------------------------------------------

def run_ensemble(
    cfg: EnsembleConfig,
    workers: Optional[int] = None,
    progress: bool = True
) -> EnsembleReport:
    """
    Run `cfg.samples` independent trajectories (stream indices 0..N-1) and aggregate every selected
    estimator at every checkpoint.
    """
    workers = default_workers() if workers is None else workers
    centering, provenance, oracle = resolve_centering(cfg)
    plan = make_plan(
        cfg.network,
        cfg.c,
        cfg.x0,
        cfg.t_end,
        cfg.checkpoints,
        cfg.observables,
        cfg.params_of_interest,
        None if centering is None else centering)
    logger.info("Running %d trajectories to t=%g on %d worker(s)", cfg.samples, cfg.t_end, workers)
    results = _execute(plan, cfg, cfg.estimators, workers, progress)

    absorbed = sum(r.absorbed for r in results)
    used = cfg.samples - absorbed
    if used == 0:
        raise NumericalError("every trajectory was absorbed")
    if absorbed:
        logger.warning("Excluded %d absorbed trajectories from the report", absorbed)

    times = plan.checkpoints
    rows: List[EstimateRow] = []
    for kind in cfg.estimators:
        moments = merge_all(r.estimates[kind] for r in results)
        variance = moments.variance
        se = moments.standard_error
        lo, hi = moments.confidence_interval()
        for c_i, t in enumerate(times):
            for o, observable in enumerate(cfg.observable_names):
                for p, parameter in enumerate(cfg.parameter_names):
                    rows.append(EstimateRow(
                        estimator=kind.label,
                        parameter=parameter,
                        observable=observable,
                        t=float(t),
                        mean=float(moments.mean[c_i, o, p]),
                        var=float(variance[c_i, o, p]),
                        se=float(se[c_i, o, p]),
                        ci_lo=float(lo[c_i, o, p]),
                        ci_hi=float(hi[c_i, o, p]),
                        n=moments.count))
    rows.sort(key=sort_key)

    z_ok, z_worst = _null_check(merge_all(r.weights for r in results))
    y_ok, y_worst = _null_check(merge_all(r.compensated for r in results))
    health = {
        "weight_mean_null": z_ok,
        "weight_mean_max_z": z_worst,
        "compensated_mean_null": y_ok,
        "compensated_mean_max_z": y_worst,
    }
    if not z_ok:
        logger.warning("Mean weight process is %.1f standard errors from 0", z_worst)
    if not y_ok:
        logger.warning("Mean compensated counter is %.1f standard errors from 0", y_worst)

    report = EnsembleReport(
        name=cfg.name,
        config=cfg.to_dict(),
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        version=__version__,
        samples=cfg.samples,
        used=used,
        absorbed=absorbed,
        burn_in_fraction=cfg.burn_in_fraction,
        centering=provenance,
        estimates=rows,
        oracle=oracle,
        health=health)
    report.slopes = _slopes(report, cfg)
    return report


def _slopes(report: EnsembleReport, cfg: EnsembleConfig) -> List[SlopeFit]:
    fits = []
    for kind in cfg.estimators:
        for parameter in cfg.parameter_names:
            for observable in cfg.observable_names:
                try:
                    fits.append(variance_slope(
                        report, kind.label, cfg.burn_in_fraction, parameter, observable))
                except (ValueError, NumericalError) as e:
                    logger.debug("No variance slope for %s/%s/%s: %s", kind.label, parameter,
                                 observable, e)
    return fits
