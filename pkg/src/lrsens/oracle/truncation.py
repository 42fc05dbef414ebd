"""
Finite truncations of the state space.
"""
from collections import deque
from dataclasses import dataclass, field
import logging
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from ..errors import ModelError
from ..network import ReactionNetwork, State

logger = logging.getLogger(__name__)

StateKey = Tuple[int, ...]

DEFAULT_MAX_STATES = 2_000_000

@dataclass(frozen=True, eq=False)
class Truncation:
    """
    An ordered, duplicate-free enumeration of states.

    closed: Set when the enumeration is a whole conservation surface, so no transition can leave.
    """
    states: np.ndarray
    closed: bool = False
    index_map: Dict[StateKey, int] = field(init=False, repr=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int64)
        if states.ndim != 2 or len(states) == 0:
            raise ModelError("truncation must contain at least one state")
        object.__setattr__(self, "states", states)
        index_map = {tuple(int(v) for v in x): i for i, x in enumerate(states)}
        if len(index_map) != len(states):
            raise ModelError("truncation states must be unique")
        object.__setattr__(self, "index_map", index_map)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[State]:
        return iter(self.states)

    def __contains__(self, x) -> bool:
        return tuple(int(v) for v in x) in self.index_map

    def index(self, x: Union[State, Sequence[int]]) -> int:
        key = tuple(int(v) for v in x)
        try:
            return self.index_map[key]
        except KeyError:
            raise KeyError(f"state {key} is not in the truncation") from None

    def lookup(self, x: State) -> Optional[int]:
        return self.index_map.get(tuple(int(v) for v in x))

    @property
    def num_species(self) -> int:
        return self.states.shape[1]

    @staticmethod
    def from_states(states: Sequence[Sequence[int]], closed: bool = False) -> "Truncation":
        ordered = sorted(tuple(int(v) for v in x) for x in states)
        return Truncation(np.array(ordered, dtype=np.int64), closed)

# Truncation Constructors --------------------------------------------------------------------------

def box(
    net: ReactionNetwork,
    x0: State,
    bounds: Union[Sequence[int], Mapping[str, int]],
    max_states: int = DEFAULT_MAX_STATES
) -> Truncation:
    """
    The states reachable from `x0` without leaving the hyper-rectangle `0 <= x <= bounds`.
    """
    x0 = net.state(x0)
    if isinstance(bounds, Mapping):
        caps = np.full(net.num_species, np.iinfo(np.int64).max, dtype=np.int64)
        for name, cap in bounds.items():
            caps[net.species_index(name)] = int(cap)
    else:
        caps = np.asarray(bounds, dtype=np.int64)
    if caps.shape != (net.num_species,):
        raise ModelError(f"truncation bounds must have {net.num_species} entries")
    if (x0 > caps).any():
        raise ModelError("initial state lies outside the truncation bounds")
    nets = net.stoichiometry
    reactants = net.reactant_matrix
    start = tuple(int(v) for v in x0)
    seen = {start}
    queue = deque([start])
    while queue:
        x = np.array(queue.popleft(), dtype=np.int64)
        for j in range(net.num_reactions):
            if (x < reactants[j]).any():
                continue
            y = x + nets[j]
            if (y < 0).any() or (y > caps).any():
                continue
            key = tuple(int(v) for v in y)
            if key not in seen:
                seen.add(key)
                queue.append(key)
                if len(seen) > max_states:
                    raise ModelError(f"truncation exceeds {max_states} states")
    return Truncation.from_states(seen)


def conservation_laws(net: ReactionNetwork) -> np.ndarray:
    """
    An orthonormal basis (rows) of the vectors w with <w, nu_j> = 0 for every reaction.
    """
    return null_space(net.stoichiometry.astype(np.float64)).T


def _positive_conservation_vector(net: ReactionNetwork) -> np.ndarray:
    n = net.num_species
    result = linprog(
        c=np.ones(n),
        A_eq=net.stoichiometry.astype(np.float64),
        b_eq=np.zeros(net.num_reactions),
        bounds=[(1.0, None)]*n,
        method="highs")
    if not result.success:
        raise ModelError("network has no strictly positive conservation law (open network)")
    return result.x


def _compositions(
    weights: np.ndarray,
    budget: float,
    prefix: List[int],
    tolerance: float
) -> Iterator[List[int]]:
    i = len(prefix)
    if i == len(weights) - 1:
        count = budget/weights[i]
        rounded = round(count)
        if rounded >= 0 and abs(count - rounded) <= tolerance:
            yield prefix + [int(rounded)]
        return
    for value in range(int(np.floor(budget/weights[i] + tolerance)) + 1):
        yield from _compositions(weights, budget - value*weights[i], prefix + [value], tolerance)


def conservation_surface(
    net: ReactionNetwork,
    x0: State,
    max_states: int = DEFAULT_MAX_STATES
) -> Truncation:
    """
    Every non-negative state sharing all conserved quantities with `x0`.
    """
    x0 = net.state(x0)
    weights = _positive_conservation_vector(net)
    laws = conservation_laws(net)
    targets = laws @ x0
    tolerance = 1e-9*max(1.0, float(weights @ x0))
    states = []
    for candidate in _compositions(weights, float(weights @ x0), [], tolerance):
        x = np.array(candidate)
        if np.allclose(laws @ x, targets, rtol=0.0, atol=tolerance):
            states.append(candidate)
            if len(states) > max_states:
                raise ModelError(f"conservation surface exceeds {max_states} states")
    logger.debug("Enumerated %d states on the conservation surface", len(states))
    return Truncation.from_states(states, closed=True)


def truncation_from_dict(
    net: ReactionNetwork,
    x0: State,
    d: Mapping,
    path: str = "truncation"
) -> Truncation:
    """
    Build a truncation from the `truncation` section of a model document.
    """
    kind = d.get("kind")
    if kind == "conservation":
        if set(d) - {"kind"}:
            raise ModelError(f"unknown key `{sorted(set(d) - {'kind'})[0]}`", path)
        return conservation_surface(net, x0)
    if kind == "bounds":
        if set(d) - {"kind", "bounds"}:
            raise ModelError(f"unknown key `{sorted(set(d) - {'kind', 'bounds'})[0]}`", path)
        bounds = d.get("bounds")
        if not isinstance(bounds, Mapping) or set(bounds) != set(net.species_names):
            raise ModelError("bounds must give a cap for every species", f"{path}.bounds")
        for name, cap in bounds.items():
            if not isinstance(cap, int) or cap < 0:
                raise ModelError("bounds must be non-negative integers", f"{path}.bounds.{name}")
        return box(net, x0, bounds)
    raise ModelError(f"unknown truncation kind `{kind}`", f"{path}.kind")
