"""
Numerical diagnostics of the ergodicity and growth conditions on a truncation. These report and
never throw: a truncation cannot certify behaviour at infinity.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple, TypedDict

import numpy as np

from .fsp import assemble, FspSolution, increments, intensity_tables
from .truncation import Truncation
from ..errors import ModelError
from ..network import apply_generator, ParameterVector, ReactionNetwork, State
from ..observables import LinearCombination, Observable
from ..simulation.ssa import TrajectoryRecord

logger = logging.getLogger(__name__)

StateKey = Tuple[int, ...]

NUMERICAL_FLOOR = 1e-12

# Foster-Lyapunov Drift ----------------------------------------------------------------------------

class LyapunovReport(TypedDict):
    holds_outside: List[StateKey]
    alpha1: float
    alpha2: float
    violations: Dict[StateKey, float]
    finite_space_trivial: bool
    boundary_drift_negative: bool
    inconclusive: bool
    worst_state: Optional[StateKey]


def check_lyapunov(
    net: ReactionNetwork,
    c: ParameterVector,
    v: Sequence[float],
    alpha1: float,
    trunc: Truncation,
    V: Optional[Observable] = None
) -> LyapunovReport:
    """
    Scan the drift inequality LV(x) <= -alpha1 V(x) with V(x) = 1 + <v, x> (or a supplied V).

    The set D of states where it fails is reported together with
    alpha2 = max over D of LV(x) + alpha1 V(x), so that LV <= -alpha1 V + alpha2 1_D holds on the
    truncation.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (net.num_species,) or (v <= 0.0).any():
        raise ValueError("v must be a positive vector with one entry per species")
    if not alpha1 > 0.0:
        raise ValueError("alpha1 must be positive")
    if V is None:
        V = LinearCombination(tuple(v), 1.0, "V")
    c = np.asarray(c, dtype=np.float64)
    values = V.tabulate(trunc.states)
    drift = np.array([apply_generator(net, V, x, c) for x in trunc.states])
    excess = drift + alpha1*values
    failing = np.flatnonzero(excess > 0.0)
    keys = [tuple(int(u) for u in x) for x in trunc.states]
    _, leak = assemble(net, c, trunc)
    boundary = leak > 0.0
    worst = int(np.argmax(excess))
    inconclusive = (not trunc.closed) and bool(boundary[worst])
    if inconclusive:
        logger.warning("Worst drift margin occurs on the truncation boundary at %s; the "
                       "truncation is inconclusive", keys[worst])
    return LyapunovReport(
        holds_outside=[keys[i] for i in failing],
        alpha1=float(alpha1),
        alpha2=float(excess[failing].max()) if len(failing) else 0.0,
        violations={keys[i]: float(excess[i]) for i in failing},
        finite_space_trivial=trunc.closed,
        boundary_drift_negative=bool((drift[boundary] < 0.0).all()),
        inconclusive=inconclusive,
        worst_state=keys[worst])

# Growth Conditions --------------------------------------------------------------------------------

class GrowthReport(TypedDict):
    intensity_ratio: float
    regularity: float
    observable_ratio: float
    increment_bound: float


def check_growth(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable,
    v: Sequence[float],
    k: int
) -> GrowthReport:
    """
    Sup ratios over the truncation for the growth conditions, with V(x) = 1 + <v, x>:

        intensity_ratio:  sup_j,x a_j(x) / sqrt(V(x))
        regularity:       sup_x sum_{j of c_k} |d a_j / d c_k|(x) (V(x + nu_j) / V(x) + 1)
        observable_ratio: sup_x |f(x)| / sqrt(V(x))
        increment_bound:  sup_j,x |f(x + nu_j) - f(x)| over transitions inside the truncation
    """
    k = net.parameter_index(k)
    v = np.asarray(v, dtype=np.float64)
    V = 1.0 + trunc.states @ v
    a, da = intensity_tables(net, c, trunc)
    root = np.sqrt(V)
    targets = trunc.states[:, None, :] + net.stoichiometry[None, :, :]
    V_next = 1.0 + targets @ v
    f_values = f.tabulate(trunc.states)
    delta, inside = increments(net, trunc, f_values)
    regularity = (np.abs(da[:, :, k])*(V_next/V[:, None] + 1.0)).sum(axis=1)
    return GrowthReport(
        intensity_ratio=float((a/root[:, None]).max()),
        regularity=float(regularity.max()),
        observable_ratio=float((np.abs(f_values)/root).max()),
        increment_bound=float(np.abs(delta[inside]).max()) if inside.any() else 0.0)

# Truncation Error ---------------------------------------------------------------------------------

def truncation_error_bound(solution: FspSolution, f_values: Optional[np.ndarray] = None) -> float:
    """
    A heuristic bound on the error of pi(f) caused by dropping the outflow of the truncation:
    span(f) * mass_leak_rate * longest mean holding time, floored at a numerical tolerance.
    """
    if f_values is None:
        assert solution.f_values is not None, "no observable tabulated"
        f_values = solution.f_values
    exit_rates = -solution.generator.diagonal() + solution.leak
    positive = exit_rates > 0.0
    holding = float((1.0/exit_rates[positive]).max()) if positive.any() else 0.0
    span = float(np.ptp(f_values))
    return max(span*solution.mass_leak_rate*holding, NUMERICAL_FLOOR)

# Dynkin Martingale --------------------------------------------------------------------------------

def dynkin_martingale(
    solution: FspSolution,
    record: TrajectoryRecord,
    x0: State,
    observable_index: int = 0
) -> np.ndarray:
    """
    M(t) = f_hat(X(t)) - f_hat(X(0)) + int_0^t (f - pi(f)) ds at every checkpoint of a trajectory.
    """
    assert solution.f_hat is not None, "Poisson equation not solved"
    trunc = solution.truncation
    try:
        start = solution.f_hat[trunc.index(x0)]
        ends = np.array([solution.f_hat[trunc.index(x)] for x in record.states])
    except KeyError as e:
        raise ModelError(f"trajectory left the truncation: {e}") from None
    int_f = record.acc[:, record.layout.int_f][:, observable_index]
    return ends - start + int_f - solution.pi_f*record.times
