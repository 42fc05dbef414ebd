"""
Exact steady-state sensitivities and asymptotic covariances on a truncation.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
from typing import NamedTuple, Optional, Union

import numpy as np

from .fsp import FspSolution, increments, intensity_tables, solve_poisson, stationary_distribution
from .truncation import conservation_laws, Truncation
from ..errors import ModelError, NumericalError, SingularSystemError
from ..network import MassAction, ParameterVector, ReactionNetwork, State
from ..observables import LinearCombination, Observable
from ..simulation.ssa import RngStream

logger = logging.getLogger(__name__)

DEFAULT_H_REL = 1e-4

# Sensitivities ------------------------------------------------------------------------------------

def _poisson(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable,
    solution: Optional[FspSolution]
) -> FspSolution:
    if solution is None or solution.f_hat is None or solution.observable != f:
        solution = solve_poisson(net, c, trunc, f, solution)
    return solution


def sensitivity_direct(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable,
    k: int,
    solution: Optional[FspSolution] = None
) -> float:
    """
    sum_j sum_x pi(x) (d a_j / d c_k)(x) (f_hat(x + nu_j) - f_hat(x)).

    For mass action this is (1 / c_k) sum_j pi(a_j Delta_j f_hat) over the reactions of c_k.
    """
    k = net.parameter_index(k)
    solution = _poisson(net, c, trunc, f, solution)
    assert solution.f_hat is not None
    _, da = intensity_tables(net, c, trunc)
    delta, inside = increments(net, trunc, solution.f_hat)
    return float(solution.pi @ (da[:, :, k]*delta*inside).sum(axis=1))


def stationary_expectation(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable
) -> float:
    solution = stationary_distribution(net, c, trunc)
    return solution.expectation(f.tabulate(trunc.states))


def sensitivity_fd(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable,
    k: int,
    h_rel: float = DEFAULT_H_REL
) -> float:
    """
    Central finite difference of pi(f) in c_k with step h = h_rel * c_k.
    """
    k = net.parameter_index(k)
    c = np.asarray(c, dtype=np.float64)
    h = h_rel*c[k]
    if not h > 0.0 or c[k] - h <= 0.0:
        raise ValueError("finite difference step leaves the positive parameter region")
    shifted = []
    for sign in (1.0, -1.0):
        ck = c.copy()
        ck[k] += sign*h
        shifted.append(ck)
    with ThreadPoolExecutor(max_workers=2) as executor:
        upper, lower = executor.map(lambda ck: stationary_expectation(net, ck, trunc, f), shifted)
    return (upper - lower)/(2.0*h)

# Linear Moment Equations --------------------------------------------------------------------------

class AffineSystem(NamedTuple):
    """
    The first moment dynamics dm/dt = A m + r of a network with affine intensities.
    """
    A: np.ndarray
    r: np.ndarray
    dA: np.ndarray
    dr: np.ndarray


def affine_system(net: ReactionNetwork, c: ParameterVector) -> AffineSystem:
    c = np.asarray(c, dtype=np.float64)
    n = net.num_species
    p = net.num_parameters
    A = np.zeros((n, n))
    r = np.zeros(n)
    dA = np.zeros((p, n, n))
    dr = np.zeros((p, n))
    for j, reaction in enumerate(net.reactions):
        if not net.is_affine(j):
            raise ModelError(f"reaction {j} does not have an affine intensity")
        law = reaction.rate_law
        assert isinstance(law, MassAction)
        k = law.param_index
        nu = reaction.net.astype(np.float64)
        if reaction.order == 0:
            r += c[k]*nu
            dr[k] += nu
        else:
            i = int(np.flatnonzero(reaction.reactants)[0])
            A[:, i] += c[k]*nu
            dA[k, :, i] += nu
    return AffineSystem(A, r, dA, dr)


def _constrained_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    solution, _, rank, _ = np.linalg.lstsq(M, b, rcond=None)
    if rank < M.shape[1]:
        raise SingularSystemError("moment equations are singular after the conservation reduction")
    return solution


def linear_moment_steady_state(
    net: ReactionNetwork,
    c: ParameterVector,
    x0: Optional[State] = None
) -> np.ndarray:
    """
    The stationary first moments, with conserved totals fixed by `x0`.
    """
    system = affine_system(net, c)
    laws = conservation_laws(net)
    if len(laws) and x0 is None:
        raise ModelError("an initial state is needed to fix the conserved totals")
    totals = laws @ net.state(x0) if len(laws) else np.zeros(0)
    return _constrained_solve(np.vstack([system.A, laws]), np.concatenate([-system.r, totals]))


def linear_moment_sensitivity(
    net: ReactionNetwork,
    c: ParameterVector,
    f: LinearCombination,
    x0: Optional[State] = None
) -> np.ndarray:
    """
    The derivative of pi(f) with respect to every parameter, from the closed first moment equations
    differentiated implicitly: A dm/dc_k = -(dA/dc_k m + dr/dc_k) with the conservation laws held.
    """
    system = affine_system(net, c)
    laws = conservation_laws(net)
    m = linear_moment_steady_state(net, c, x0)
    M = np.vstack([system.A, laws])
    coefficients = np.asarray(f.coefficients, dtype=np.float64)
    result = np.zeros(net.num_parameters)
    for k in range(net.num_parameters):
        rhs = np.concatenate([-(system.dA[k] @ m + system.dr[k]), np.zeros(len(laws))])
        result[k] = coefficients @ _constrained_solve(M, rhs)
    return result

# Asymptotic Covariance ----------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticCovariance:
    """
    Per-unit-time covariance rates of the centered ergodic average (1) and the weight process (2).
    """
    sigma11_rate: float
    sigma12_rate: float
    sigma22_rate: float
    pi_f: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([
            [self.sigma11_rate, self.sigma12_rate],
            [self.sigma12_rate, self.sigma22_rate]
        ])

    def is_positive_semidefinite(self, tolerance: float = 1e-12) -> bool:
        scale = max(1.0, abs(self.sigma11_rate), abs(self.sigma22_rate))
        return bool(np.linalg.eigvalsh(self.matrix).min() >= -tolerance*scale)

    @property
    def clr_limit_variance(self) -> float:
        return self.sigma11_rate*self.sigma22_rate + self.sigma12_rate**2


def asymptotic_covariance(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable,
    k: int,
    solution: Optional[FspSolution] = None
) -> AsymptoticCovariance:
    """
    sigma11 = sum_j pi(a_j |Delta_j f_hat|^2)
    sigma12 = sum_j pi((d a_j / d c_k) Delta_j f_hat)
    sigma22 = sum_j pi((d a_j / d c_k)^2 / a_j), equal to pi(a_1) / c_1^2 for mass action
    """
    k = net.parameter_index(k)
    solution = _poisson(net, c, trunc, f, solution)
    assert solution.f_hat is not None
    a, da = intensity_tables(net, c, trunc)
    delta, inside = increments(net, trunc, solution.f_hat)
    dak = da[:, :, k]
    positive = a > 0.0
    score = np.divide(dak**2, a, out=np.zeros_like(a), where=positive)
    return AsymptoticCovariance(
        sigma11_rate=float(solution.pi @ (a*delta**2*inside).sum(axis=1)),
        sigma12_rate=float(solution.pi @ (dak*delta*inside).sum(axis=1)),
        sigma22_rate=float(solution.pi @ score.sum(axis=1)),
        pi_f=solution.pi_f)

# Limit Distributions ------------------------------------------------------------------------------

class LimitSamples(NamedTuple):
    clr: np.ndarray
    int_clr: np.ndarray
    lr: np.ndarray
    int_lr: np.ndarray


def sample_limit_distributions(
    cov: AsymptoticCovariance,
    n_steps: int,
    n_samples: int,
    rng: Union[RngStream, np.random.Generator],
    batch_size: int = 10_000
) -> LimitSamples:
    """
    Sample the weak limits of the four estimators from an Euler discretization of a 2-D Brownian
    motion (W1, W2) on [0, 1] with the given covariance rates.

        CLR:     W1(1) W2(1)
        intCLR:  int (W1(1) - W1(s)) dW2(s)
        LR:      pi(f) W2(1)
        intLR:   pi(f) int (1 - s) dW2(s)
    """
    if n_steps < 100:
        raise ValueError("at least 100 Euler steps are required")
    if not cov.is_positive_semidefinite():
        raise NumericalError("covariance rate matrix is not positive semidefinite")
    generator = rng.generator() if isinstance(rng, RngStream) else rng
    eigenvalues, eigenvectors = np.linalg.eigh(cov.matrix)
    root = eigenvectors*np.sqrt(np.clip(eigenvalues, 0.0, None))
    dt = 1.0/n_steps
    weights = 1.0 - np.arange(n_steps)*dt
    parts = []
    for start in range(0, n_samples, batch_size):
        count = min(batch_size, n_samples - start)
        dW = (generator.standard_normal((count, n_steps, 2)) @ root.T)*np.sqrt(dt)
        dW1 = dW[:, :, 0]
        dW2 = dW[:, :, 1]
        W1 = np.cumsum(dW1, axis=1)
        W1_end = W1[:, -1]
        W2_end = dW2.sum(axis=1)
        W1_left = W1 - dW1
        parts.append((
            W1_end*W2_end,
            ((W1_end[:, None] - W1_left)*dW2).sum(axis=1),
            cov.pi_f*W2_end,
            cov.pi_f*(dW2 @ weights)))
    return LimitSamples(*(np.concatenate([p[i] for p in parts]) for i in range(4)))
