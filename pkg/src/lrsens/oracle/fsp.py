"""
Finite state projection: the truncated generator, the stationary distribution and the Poisson
equation.
"""
from dataclasses import dataclass, field, replace
import logging
from typing import Dict, NamedTuple, Optional, Tuple
import warnings

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from .truncation import Truncation
from ..errors import ReducibleError, SingularSystemError
from ..network import ParameterVector, ReactionNetwork, State
from ..observables import Observable

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10

# Generator Assembly -------------------------------------------------------------------------------

class TruncatedGenerator(NamedTuple):
    """
    generator: The conservative N x N generator restricted to the truncation.
    leak: The total rate of the transitions from each state that leave the truncation.
    """
    generator: sp.csr_matrix
    leak: np.ndarray


def assemble(net: ReactionNetwork, c: ParameterVector, trunc: Truncation) -> TruncatedGenerator:
    c = np.asarray(c, dtype=np.float64)
    rows, cols, data = [], [], []
    leak = np.zeros(len(trunc))
    nets = net.stoichiometry
    for i, x in enumerate(trunc.states):
        a = net.intensities(x, c)
        for j in range(net.num_reactions):
            if a[j] <= 0.0:
                continue
            target = trunc.lookup(x + nets[j])
            if target is None:
                leak[i] += a[j]
            elif target != i:
                rows.append(i)
                cols.append(target)
                data.append(a[j])
    n = len(trunc)
    off_diagonal = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    diagonal = -np.asarray(off_diagonal.sum(axis=1)).ravel()
    generator = (off_diagonal + sp.diags(diagonal)).tocsr()
    return TruncatedGenerator(generator, leak)


def build_generator(net: ReactionNetwork, c: ParameterVector, trunc: Truncation) -> sp.csr_matrix:
    """
    The generator matrix on the truncation. Transitions that leave the truncation are dropped and
    every row sums to zero.
    """
    return assemble(net, c, trunc).generator

# Irreducibility -----------------------------------------------------------------------------------

class IrreducibilityReport(NamedTuple):
    irreducible: bool
    components: list
    absorbing: list

    def __bool__(self):
        return self.irreducible


def check_irreducible(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    generator: Optional[sp.csr_matrix] = None
) -> IrreducibilityReport:
    """
    Whether the transition graph restricted to the truncation is strongly connected.
    """
    L = build_generator(net, c, trunc) if generator is None else generator
    adjacency = (L - sp.diags(L.diagonal())).tocsr()
    adjacency.eliminate_zeros()
    count, labels = connected_components(adjacency, directed=True, connection="strong")
    components = [
        [tuple(int(v) for v in trunc.states[i]) for i in np.flatnonzero(labels == label)]
        for label in range(count)
    ]
    outflow = np.asarray((adjacency != 0).sum(axis=1)).ravel()
    absorbing = [tuple(int(v) for v in trunc.states[i]) for i in np.flatnonzero(outflow == 0)]
    if count == 1:
        components = []
    return IrreducibilityReport(count == 1, components, absorbing)

# Solutions ----------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FspSolution:
    truncation: Truncation
    c: np.ndarray
    generator: sp.csr_matrix = field(repr=False)
    pi: np.ndarray
    mass_leak_rate: float
    residuals: Dict[str, float]
    leak: np.ndarray = field(repr=False)
    observable: Optional[Observable] = None
    f_values: Optional[np.ndarray] = field(default=None, repr=False)
    f_hat: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def pi_f(self) -> float:
        assert self.f_values is not None, "no observable tabulated"
        return float(self.pi @ self.f_values)

    def expectation(self, values: np.ndarray) -> float:
        return float(self.pi @ values)

    def probability(self, x: State) -> float:
        return float(self.pi[self.truncation.index(x)])

    def poisson_value(self, x: State) -> float:
        assert self.f_hat is not None, "Poisson equation not solved"
        return float(self.f_hat[self.truncation.index(x)])


def _solve(A: sp.spmatrix, b: np.ndarray, what: str) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            x = spsolve(A.tocsc(), b)
        except (MatrixRankWarning, RuntimeError) as e:
            raise SingularSystemError(f"singular {what} system: {e}") from None
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.isfinite(x).all():
        raise SingularSystemError(f"singular {what} system")
    return x


def stationary_distribution(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation
) -> FspSolution:
    """
    Solve pi^T L = 0 with sum(pi) = 1 on the truncation.
    """
    c = np.asarray(c, dtype=np.float64)
    L, leak = assemble(net, c, trunc)
    report = check_irreducible(net, c, trunc, L)
    if not report.irreducible:
        raise ReducibleError(
            f"truncation splits into {len(report.components)} communicating classes",
            report.components)
    n = len(trunc)
    A = L.T.tolil()
    A[n - 1, :] = np.ones(n)
    b = np.zeros(n)
    b[n - 1] = 1.0
    pi = _solve(A, b, "stationary")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residuals = {
        "stationary": float(np.abs(L.T @ pi).max()),
        "normalization": float(abs(pi.sum() - 1.0)),
    }
    if residuals["stationary"] > RESIDUAL_TOLERANCE:
        logger.warning("Stationary residual %.3e exceeds %.0e", residuals["stationary"],
                       RESIDUAL_TOLERANCE)
    mass_leak_rate = float(pi @ leak)
    if mass_leak_rate > 0.0:
        logger.debug("Truncation leaks stationary mass at rate %.3e", mass_leak_rate)
    return FspSolution(
        truncation=trunc,
        c=c,
        generator=L,
        pi=pi,
        mass_leak_rate=mass_leak_rate,
        residuals=residuals,
        leak=leak)


def with_observable(solution: FspSolution, f: Observable) -> FspSolution:
    return replace(
        solution,
        observable=f,
        f_values=f.tabulate(solution.truncation.states),
        f_hat=None)


def solve_poisson(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation,
    f: Observable,
    solution: Optional[FspSolution] = None
) -> FspSolution:
    """
    Solve -L f_hat = f - pi(f) subject to sum(pi f_hat) = 0.

    The square bordered system [[-L, 1], [pi^T, 0]] is solved for (f_hat, lambda).
    """
    if solution is None:
        solution = stationary_distribution(net, c, trunc)
    solution = with_observable(solution, f)
    assert solution.f_values is not None
    L = solution.generator
    pi = solution.pi
    n = len(trunc)
    centered = solution.f_values - solution.pi_f
    A = sp.bmat([
        [-L, sp.csr_matrix(np.ones((n, 1)))],
        [sp.csr_matrix(pi.reshape(1, n)), None]
    ], format="csc")
    b = np.append(centered, 0.0)
    x = _solve(A, b, "Poisson")
    f_hat = x[:n]
    residuals = dict(solution.residuals)
    residuals["poisson"] = float(np.abs(-(L @ f_hat) - centered).max())
    residuals["centering"] = float(abs(pi @ f_hat))
    if residuals["poisson"] > RESIDUAL_TOLERANCE*max(1.0, float(np.abs(centered).max())):
        logger.warning("Poisson residual %.3e exceeds %.0e", residuals["poisson"],
                       RESIDUAL_TOLERANCE)
    return replace(solution, f_hat=f_hat, residuals=residuals)

# Helpers ------------------------------------------------------------------------------------------

def increments(
    net: ReactionNetwork,
    trunc: Truncation,
    values: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    The (N, m) table of values[x + nu_j] - values[x] and a mask of the transitions that stay inside
    the truncation.
    """
    nets = net.stoichiometry
    delta = np.zeros((len(trunc), net.num_reactions))
    inside = np.zeros((len(trunc), net.num_reactions), dtype=bool)
    for i, x in enumerate(trunc.states):
        for j in range(net.num_reactions):
            target = trunc.lookup(x + nets[j])
            if target is not None:
                delta[i, j] = values[target] - values[i]
                inside[i, j] = True
    return delta, inside


def intensity_tables(
    net: ReactionNetwork,
    c: ParameterVector,
    trunc: Truncation
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Intensities (N, m) and their parameter Jacobians (N, m, p) on every truncation state.
    """
    c = np.asarray(c, dtype=np.float64)
    a = np.array([net.intensities(x, c) for x in trunc.states])
    da = np.array([net.intensity_jacobian(x, c) for x in trunc.states])
    return a, da
