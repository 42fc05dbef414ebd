"""
Reaction networks, rate laws and the generator-related evaluations on them.

A network is a list of reactions over `n` species. Each reaction carries its reactant and product
stoichiometry and a rate law that maps a state `x` and parameter vector `c` to an intensity.
States are plain numpy integer vectors of molecule counts.
"""
from dataclasses import dataclass, field
import math
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, TYPE_CHECKING, Union

import numpy as np

from .errors import ModelError

if TYPE_CHECKING:
    from .observables import Observable

State = np.ndarray
ParameterVector = np.ndarray

# Rate Laws ----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class MassAction:
    """
    a(x, c) = c_k * prod_i x_i! / (x_i - r_i)!  (falling factorials over the reactants)
    """
    param_index: int

    KIND = "mass_action"

    @property
    def parameters(self) -> Tuple[int, ...]:
        return (self.param_index,)

    def intensity(self, x: State, c: ParameterVector, reactants: np.ndarray) -> float:
        return float(c[self.param_index])*falling_factorial(x, reactants)

    def gradient(self, x: State, c: ParameterVector, reactants: np.ndarray) -> Dict[int, float]:
        return {self.param_index: falling_factorial(x, reactants)}


@dataclass(frozen=True)
class Hill:
    """
    a(x, c) = x_s^n / (c_k + x_s^n)
    """
    param_index: int
    exponent: float
    species_index: int

    KIND = "hill"

    @property
    def parameters(self) -> Tuple[int, ...]:
        return (self.param_index,)

    def intensity(self, x: State, c: ParameterVector, reactants: np.ndarray) -> float:
        xn = float(x[self.species_index])**self.exponent
        return xn/(float(c[self.param_index]) + xn)

    def gradient(self, x: State, c: ParameterVector, reactants: np.ndarray) -> Dict[int, float]:
        xn = float(x[self.species_index])**self.exponent
        return {self.param_index: -xn/(float(c[self.param_index]) + xn)**2}


@dataclass(frozen=True)
class RepressiveHill:
    """
    a(x, c) = c_k * c_t^n / (c_t^n + x_s^n), a rate constant times a repression by species `s`
    with threshold parameter `t`.
    """
    param_index: int
    threshold_index: int
    exponent: float
    species_index: int

    KIND = "repressive_hill"

    @property
    def parameters(self) -> Tuple[int, ...]:
        return (self.param_index, self.threshold_index)

    def intensity(self, x: State, c: ParameterVector, reactants: np.ndarray) -> float:
        n = self.exponent
        phin = float(c[self.threshold_index])**n
        xn = float(x[self.species_index])**n
        return float(c[self.param_index])*phin/(phin + xn)

    def gradient(self, x: State, c: ParameterVector, reactants: np.ndarray) -> Dict[int, float]:
        n = self.exponent
        k = float(c[self.param_index])
        phi = float(c[self.threshold_index])
        phin = phi**n
        xn = float(x[self.species_index])**n
        return {
            self.param_index: phin/(phin + xn),
            self.threshold_index: k*n*phi**(n - 1.0)*xn/(phin + xn)**2
        }


RateLaw = Union[MassAction, Hill, RepressiveHill]

# Reactions and Networks ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Reaction:
    reactants: np.ndarray
    products: np.ndarray
    rate_law: RateLaw
    name: str = ""
    net: np.ndarray = field(init=False)

    def __post_init__(self):
        reactants = np.asarray(self.reactants, dtype=np.int64)
        products = np.asarray(self.products, dtype=np.int64)
        object.__setattr__(self, "reactants", reactants)
        object.__setattr__(self, "products", products)
        object.__setattr__(self, "net", products - reactants)

    def __eq__(self, other):
        if not isinstance(other, Reaction):
            return NotImplemented
        return self.name == other.name \
            and self.rate_law == other.rate_law \
            and np.array_equal(self.reactants, other.reactants) \
            and np.array_equal(self.products, other.products)

    @property
    def order(self) -> int:
        return int(self.reactants.sum())


@dataclass(frozen=True)
class ReactionNetwork:
    species_names: Tuple[str, ...]
    reactions: Tuple[Reaction, ...]
    parameter_names: Tuple[str, ...]
    parameter_values: Tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "species_names", tuple(self.species_names))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        object.__setattr__(self, "parameter_names", tuple(self.parameter_names))
        object.__setattr__(self, "parameter_values", tuple(map(float, self.parameter_values)))
        if len(self.reactions) == 0:
            raise ModelError("network must contain ≥1 reaction", "reactions")
        if len(set(self.species_names)) != len(self.species_names):
            raise ModelError("duplicate species name", "species")
        if len(set(self.parameter_names)) != len(self.parameter_names):
            raise ModelError("duplicate parameter name", "parameters")
        if self.parameter_values and len(self.parameter_values) != len(self.parameter_names):
            raise ModelError("parameter values do not match parameter names", "parameters")
        n = len(self.species_names)
        p = len(self.parameter_names)
        for j, reaction in enumerate(self.reactions):
            if reaction.reactants.shape != (n,) or reaction.products.shape != (n,):
                raise ModelError(f"stoichiometry must have length {n}", f"reactions[{j}]")
            if (reaction.reactants < 0).any() or (reaction.products < 0).any():
                raise ModelError("negative stoichiometry", f"reactions[{j}]")
            for k in reaction.rate_law.parameters:
                if not 0 <= k < p:
                    raise ModelError(f"invalid parameter index {k}", f"reactions[{j}].rate")
            species = getattr(reaction.rate_law, "species_index", 0)
            if not 0 <= species < n:
                raise ModelError(f"invalid species index {species}", f"reactions[{j}].rate")

    # Properties -----------------------------------------------------------------------------------

    @property
    def num_species(self) -> int:
        return len(self.species_names)

    @property
    def num_reactions(self) -> int:
        return len(self.reactions)

    @property
    def num_parameters(self) -> int:
        return len(self.parameter_names)

    @property
    def stoichiometry(self) -> np.ndarray:
        """
        The (m, n) matrix of net changes, one row per reaction.
        """
        return np.array([r.net for r in self.reactions], dtype=np.int64)

    @property
    def reactant_matrix(self) -> np.ndarray:
        return np.array([r.reactants for r in self.reactions], dtype=np.int64)

    @property
    def nominal_parameters(self) -> ParameterVector:
        if not self.parameter_values:
            raise ModelError("network has no nominal parameter values", "parameters")
        return np.array(self.parameter_values, dtype=np.float64)

    # Lookups --------------------------------------------------------------------------------------

    def species_index(self, name: str) -> int:
        try:
            return self.species_names.index(name)
        except ValueError:
            raise ModelError(f"unknown species `{name}`") from None

    def parameter_index(self, name_or_index: Union[str, int]) -> int:
        if isinstance(name_or_index, (int, np.integer)):
            if not 0 <= name_or_index < self.num_parameters:
                raise ModelError(f"parameter index {name_or_index} out of range")
            return int(name_or_index)
        try:
            return self.parameter_names.index(name_or_index)
        except ValueError:
            raise ModelError(f"unknown parameter `{name_or_index}`") from None

    def reactions_of(self, k: int) -> List[int]:
        """
        The indices of the reactions whose rate law depends on parameter `k`.
        """
        return [j for j, r in enumerate(self.reactions) if k in r.rate_law.parameters]

    def is_affine(self, j: int) -> bool:
        """
        Whether reaction `j` has an intensity affine in the state.
        """
        reaction = self.reactions[j]
        return isinstance(reaction.rate_law, MassAction) and reaction.order <= 1

    def is_mass_action_in(self, k: int) -> bool:
        reactions = self.reactions_of(k)
        return len(reactions) > 0 and all(
            isinstance(self.reactions[j].rate_law, MassAction) for j in reactions)

    def state(self, counts: Union[Sequence[int], Mapping[str, int], np.ndarray]) -> State:
        """
        Validate and convert counts to a state vector.
        """
        if isinstance(counts, Mapping):
            x = np.zeros(self.num_species, dtype=np.int64)
            for name, value in counts.items():
                x[self.species_index(name)] = value
        else:
            x = np.asarray(counts, dtype=np.int64)
        if x.shape != (self.num_species,):
            raise ModelError(f"state must have {self.num_species} entries")
        if (x < 0).any():
            raise ModelError("state counts must be non-negative")
        return x

    # Vectorised Evaluations -----------------------------------------------------------------------

    def intensities(self, x: State, c: ParameterVector) -> np.ndarray:
        return np.array([intensity(self, j, x, c) for j in range(self.num_reactions)])

    def intensity_jacobian(self, x: State, c: ParameterVector) -> np.ndarray:
        """
        The (m, p) matrix of partial derivatives of each intensity with respect to each parameter.
        """
        jac = np.zeros((self.num_reactions, self.num_parameters))
        for j, reaction in enumerate(self.reactions):
            for k, value in reaction.rate_law.gradient(x, c, reaction.reactants).items():
                jac[j, k] += value
        return jac

    def feasible(self, x: State, j: int) -> bool:
        return bool((x + self.reactions[j].net >= 0).all())

# Interface Functions ------------------------------------------------------------------------------

def falling_factorial(x: State, reactants: np.ndarray) -> float:
    """
    prod_i x_i (x_i - 1) ... (x_i - r_i + 1). Zero whenever some x_i < r_i.
    """
    result = 1.0
    for count, order in zip(x, reactants):
        for r in range(int(order)):
            result *= float(count - r)
            if result == 0.0:
                return 0.0
    return result


def _check_reaction_index(net: ReactionNetwork, j: int):
    if not 0 <= j < net.num_reactions:
        raise IndexError(f"reaction index {j} out of range for {net.num_reactions} reactions")


def intensity(net: ReactionNetwork, j: int, x: State, c: ParameterVector) -> float:
    """
    The jump rate a_j(x, c) of reaction `j`.
    """
    _check_reaction_index(net, j)
    reaction = net.reactions[j]
    return reaction.rate_law.intensity(x, c, reaction.reactants)


def intensity_param_derivative(
    net: ReactionNetwork,
    j: int,
    x: State,
    c: ParameterVector,
    k: int
) -> float:
    """
    The partial derivative of a_j(x, c) with respect to c_k.
    """
    _check_reaction_index(net, j)
    if not 0 <= k < net.num_parameters:
        raise IndexError(f"parameter index {k} out of range for {net.num_parameters} parameters")
    reaction = net.reactions[j]
    return reaction.rate_law.gradient(x, c, reaction.reactants).get(k, 0.0)


def increment(f: "Observable", x: State, j: int, net: ReactionNetwork) -> float:
    """
    The j-th increment function f(x + nu_j) - f(x).
    """
    _check_reaction_index(net, j)
    y = x + net.reactions[j].net
    if (y < 0).any():
        raise ValueError(f"reaction {j} is not feasible from state {tuple(x)}")
    return f.evaluate(y) - f.evaluate(x)


def apply_generator(net: ReactionNetwork, f: "Observable", x: State, c: ParameterVector) -> float:
    """
    (Lf)(x) = sum_j a_j(x, c) (f(x + nu_j) - f(x)) over the feasible reactions.
    """
    total = 0.0
    for j in range(net.num_reactions):
        a = intensity(net, j, x, c)
        if a > 0.0 and net.feasible(x, j):
            total += a*increment(f, x, j, net)
    return total

# Serialization ------------------------------------------------------------------------------------

_RATE_KEYS = {
    MassAction.KIND: {"kind", "parameter"},
    Hill.KIND: {"kind", "parameter", "species", "exponent"},
    RepressiveHill.KIND: {"kind", "parameter", "threshold", "species", "exponent"},
}

def _require(d: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in d:
        raise ModelError(f"missing key `{key}`", path)
    return d[key]


def _reject_unknown(d: Mapping[str, Any], allowed: set, path: str):
    if not isinstance(d, Mapping):
        raise ModelError("expected an object", path)
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ModelError(f"unknown key `{unknown[0]}`", path)


def _stoichiometry(
    entries: Any,
    species: Tuple[str, ...],
    path: str
) -> np.ndarray:
    if not isinstance(entries, Mapping):
        raise ModelError("stoichiometry must map species names to counts", path)
    result = np.zeros(len(species), dtype=np.int64)
    for name, count in entries.items():
        if name not in species:
            raise ModelError(f"unknown species `{name}`", f"{path}.{name}")
        if not isinstance(count, int) or isinstance(count, bool):
            raise ModelError("stoichiometric coefficient must be an integer", f"{path}.{name}")
        if count < 0:
            raise ModelError("negative stoichiometry", f"{path}.{name}")
        result[species.index(name)] = count
    return result


def _rate_law_from_dict(
    d: Any,
    species: Tuple[str, ...],
    parameters: Tuple[str, ...],
    path: str
) -> RateLaw:
    if not isinstance(d, Mapping):
        raise ModelError("expected an object", path)
    kind = _require(d, "kind", path)
    if kind not in _RATE_KEYS:
        raise ModelError(f"unknown rate law kind `{kind}`", f"{path}.kind")
    _reject_unknown(d, _RATE_KEYS[kind], path)

    def param(key: str) -> int:
        name = _require(d, key, path)
        if name not in parameters:
            raise ModelError(f"unknown parameter `{name}`", f"{path}.{key}")
        return parameters.index(name)

    def spec(key: str) -> int:
        name = _require(d, key, path)
        if name not in species:
            raise ModelError(f"unknown species `{name}`", f"{path}.{key}")
        return species.index(name)

    if kind == MassAction.KIND:
        return MassAction(param("parameter"))
    exponent = _require(d, "exponent", path)
    if not isinstance(exponent, (int, float)) or exponent <= 0:
        raise ModelError("hill exponent must be positive", f"{path}.exponent")
    if kind == Hill.KIND:
        return Hill(param("parameter"), float(exponent), spec("species"))
    return RepressiveHill(param("parameter"), param("threshold"), float(exponent), spec("species"))


def _rate_law_to_dict(law: RateLaw, net: ReactionNetwork) -> Dict[str, Any]:
    result: Dict[str, Any] = {"kind": law.KIND, "parameter": net.parameter_names[law.param_index]}
    if isinstance(law, RepressiveHill):
        result["threshold"] = net.parameter_names[law.threshold_index]
    if isinstance(law, (Hill, RepressiveHill)):
        result["species"] = net.species_names[law.species_index]
        result["exponent"] = law.exponent
    return result


def network_from_dict(d: Mapping[str, Any]) -> ReactionNetwork:
    """
    Build a network from the `species`, `parameters` and `reactions` sections of a model document.
    """
    species = _require(d, "species", "")
    if not isinstance(species, list) or not all(isinstance(s, str) for s in species):
        raise ModelError("species must be a list of names", "species")
    species = tuple(species)
    parameter_entries = _require(d, "parameters", "")
    if not isinstance(parameter_entries, list):
        raise ModelError("parameters must be a list", "parameters")
    names: List[str] = []
    values: List[float] = []
    for i, entry in enumerate(parameter_entries):
        path = f"parameters[{i}]"
        _reject_unknown(entry, {"name", "value"}, path)
        value = _require(entry, "value", path)
        if not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
            raise ModelError("parameter value must be a finite non-negative number", path)
        names.append(str(_require(entry, "name", path)))
        values.append(float(value))
    parameters = tuple(names)
    reaction_entries = _require(d, "reactions", "")
    if not isinstance(reaction_entries, list):
        raise ModelError("reactions must be a list", "reactions")
    reactions = []
    for j, entry in enumerate(reaction_entries):
        path = f"reactions[{j}]"
        _reject_unknown(entry, {"name", "reactants", "products", "rate"}, path)
        reactions.append(Reaction(
            reactants=_stoichiometry(entry.get("reactants", {}), species, f"{path}.reactants"),
            products=_stoichiometry(entry.get("products", {}), species, f"{path}.products"),
            rate_law=_rate_law_from_dict(
                _require(entry, "rate", path), species, parameters, f"{path}.rate"),
            name=str(entry.get("name", f"R{j + 1}"))))
    return ReactionNetwork(
        species_names=species,
        reactions=tuple(reactions),
        parameter_names=parameters,
        parameter_values=tuple(values),
        name=str(d.get("name", "")))


def network_to_dict(net: ReactionNetwork) -> Dict[str, Any]:
    def stoichiometry(vector: np.ndarray) -> Dict[str, int]:
        return {net.species_names[i]: int(v) for i, v in enumerate(vector) if v != 0}
    values: Sequence[Optional[float]] = net.parameter_values or [None]*net.num_parameters
    return {
        "name": net.name,
        "species": list(net.species_names),
        "parameters": [{"name": n, "value": v} for n, v in zip(net.parameter_names, values)],
        "reactions": [
            {
                "name": r.name,
                "reactants": stoichiometry(r.reactants),
                "products": stoichiometry(r.products),
                "rate": _rate_law_to_dict(r.rate_law, net)
            } for r in net.reactions
        ]
    }


def parse_network(spec_text: str) -> ReactionNetwork:
    """
    Parse the network portion of a model file.
    """
    from .io.modelfile import parse_model
    return parse_model(spec_text).network


def serialize_network(net: ReactionNetwork) -> str:
    import json
    from .io.modelfile import SCHEMA_VERSION
    return json.dumps({"schema_version": SCHEMA_VERSION, **network_to_dict(net)}, indent=2)
