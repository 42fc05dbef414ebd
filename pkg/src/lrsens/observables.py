"""
Observables f: E -> R evaluated along trajectories and tabulated on truncations.
"""
import abc
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import ModelError

StateKey = Tuple[int, ...]

# Observable Variants ------------------------------------------------------------------------------

class Observable(abc.ABC):
    name: str

    @abc.abstractmethod
    def evaluate(self, x: np.ndarray) -> float:
        raise NotImplementedError()

    def tabulate(self, states: np.ndarray) -> np.ndarray:
        """
        Evaluate the observable on each row of an (N, n) array of states.
        """
        return np.array([self.evaluate(x) for x in states], dtype=np.float64)


@dataclass(frozen=True)
class LinearCombination(Observable):
    coefficients: Tuple[float, ...]
    offset: float = 0.0
    name: str = "f"

    def evaluate(self, x: np.ndarray) -> float:
        return float(np.dot(self.coefficients, x)) + self.offset

    def tabulate(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(states, dtype=np.float64) @ np.asarray(self.coefficients) + self.offset


@dataclass(frozen=True)
class SpeciesCount(LinearCombination):
    species_index: int = 0
    coefficients: Tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.coefficients:
            raise ModelError("species count needs the species count of the network")

    @staticmethod
    def of(species_index: int, num_species: int, name: str = "f") -> "SpeciesCount":
        coefficients = tuple(1.0 if i == species_index else 0.0 for i in range(num_species))
        return SpeciesCount(coefficients=coefficients, name=name, species_index=species_index)


def constant(value: float, num_species: int, name: str = "const") -> LinearCombination:
    return LinearCombination((0.0,)*num_species, float(value), name)


@dataclass(frozen=True)
class Indicator(Observable):
    states: frozenset
    name: str = "f"

    def evaluate(self, x: np.ndarray) -> float:
        return 1.0 if tuple(int(v) for v in x) in self.states else 0.0


@dataclass(frozen=True)
class Custom(Observable):
    """
    A tabulated observable. Evaluation outside the table is rejected.
    """
    table: Mapping[StateKey, float]
    name: str = "f"

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.table.items()))))

    def evaluate(self, x: np.ndarray) -> float:
        key = tuple(int(v) for v in x)
        try:
            return float(self.table[key])
        except KeyError:
            raise ModelError(f"custom observable `{self.name}` is not defined at {key}") from None

# Kernel Tables ------------------------------------------------------------------------------------

class ObservableTables(NamedTuple):
    """
    Flat array form of a list of observables, evaluated inside the simulation kernel.

    Linear observables use `weights` and `offsets`. Table observables encode each state with
    mixed-radix keys (`radix`, `strides`) and look the key up in `keys[ptr[o]:ptr[o + 1]]`.
    A NaN default marks a table that rejects states outside it.
    """
    weights: np.ndarray
    offsets: np.ndarray
    is_table: np.ndarray
    radix: np.ndarray
    strides: np.ndarray
    ptr: np.ndarray
    keys: np.ndarray
    values: np.ndarray
    defaults: np.ndarray


def _table_entries(observable: Observable) -> Tuple[List[StateKey], List[float], float]:
    if isinstance(observable, Indicator):
        states = sorted(observable.states)
        return states, [1.0]*len(states), 0.0
    assert isinstance(observable, Custom)
    states = sorted(observable.table)
    return states, [float(observable.table[s]) for s in states], float("nan")


def compile_observables(observables: Sequence[Observable], num_species: int) -> ObservableTables:
    count = len(observables)
    weights = np.zeros((count, num_species))
    offsets = np.zeros(count)
    is_table = np.zeros(count, dtype=np.int64)
    radix = np.ones((count, num_species), dtype=np.int64)
    strides = np.zeros((count, num_species), dtype=np.int64)
    ptr = np.zeros(count + 1, dtype=np.int64)
    keys: List[np.ndarray] = []
    values: List[np.ndarray] = []
    defaults = np.zeros(count)
    for o, observable in enumerate(observables):
        if isinstance(observable, LinearCombination):
            if len(observable.coefficients) != num_species:
                raise ModelError(f"observable `{observable.name}` has the wrong length")
            weights[o] = observable.coefficients
            offsets[o] = observable.offset
            ptr[o + 1] = ptr[o]
            continue
        states, table_values, default = _table_entries(observable)
        array = np.array(states, dtype=np.int64).reshape(-1, num_species)
        is_table[o] = 1
        defaults[o] = default
        if len(array):
            radix[o] = array.max(axis=0) + 1
        strides[o] = np.concatenate(([1], np.cumprod(radix[o][:-1])))
        order_keys = array @ strides[o]
        order = np.argsort(order_keys, kind="stable")
        keys.append(order_keys[order])
        values.append(np.asarray(table_values, dtype=np.float64)[order])
        ptr[o + 1] = ptr[o] + len(array)
    return ObservableTables(
        weights=weights,
        offsets=offsets,
        is_table=is_table,
        radix=radix,
        strides=strides,
        ptr=ptr,
        keys=np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64),
        values=np.concatenate(values) if values else np.zeros(0),
        defaults=defaults)

# Serialization ------------------------------------------------------------------------------------

def observable_from_dict(
    d: Mapping[str, Any],
    species: Sequence[str],
    path: str = "observables"
) -> Observable:
    if not isinstance(d, Mapping) or "kind" not in d:
        raise ModelError("observable needs a `kind`", path)
    kind = d["kind"]
    name = str(d.get("name", "f"))
    n = len(species)

    def check_keys(allowed: set):
        unknown = sorted(set(d) - allowed - {"kind", "name"})
        if unknown:
            raise ModelError(f"unknown key `{unknown[0]}`", path)

    def state_key(entry: Any, entry_path: str) -> StateKey:
        if isinstance(entry, Mapping):
            key = [0]*n
            for s, v in entry.items():
                if s not in species:
                    raise ModelError(f"unknown species `{s}`", entry_path)
                key[list(species).index(s)] = int(v)
            return tuple(key)
        if not isinstance(entry, list) or len(entry) != n:
            raise ModelError(f"state must have {n} entries", entry_path)
        if any((not isinstance(v, int)) or v < 0 for v in entry):
            raise ModelError("state counts must be non-negative integers", entry_path)
        return tuple(entry)

    if kind == "species":
        check_keys({"species"})
        target = d.get("species")
        if target not in species:
            raise ModelError(f"unknown species `{target}`", f"{path}.species")
        return SpeciesCount.of(list(species).index(target), n, name)
    if kind == "linear":
        check_keys({"coefficients", "offset"})
        coefficients = [0.0]*n
        for s, v in dict(d.get("coefficients", {})).items():
            if s not in species:
                raise ModelError(f"unknown species `{s}`", f"{path}.coefficients")
            coefficients[list(species).index(s)] = float(v)
        return LinearCombination(tuple(coefficients), float(d.get("offset", 0.0)), name)
    if kind == "indicator":
        check_keys({"states"})
        states = [state_key(s, f"{path}.states[{i}]") for i, s in enumerate(d.get("states", []))]
        return Indicator(frozenset(states), name)
    if kind == "custom":
        check_keys({"table"})
        table: Dict[StateKey, float] = {}
        for i, entry in enumerate(d.get("table", [])):
            entry_path = f"{path}.table[{i}]"
            if not isinstance(entry, Mapping) or set(entry) != {"state", "value"}:
                raise ModelError("table entries need `state` and `value`", entry_path)
            table[state_key(entry["state"], entry_path)] = float(entry["value"])
        return Custom(table, name)
    raise ModelError(f"unknown observable kind `{kind}`", f"{path}.kind")


def observable_to_dict(observable: Observable, species: Sequence[str]) -> Dict[str, Any]:
    if isinstance(observable, SpeciesCount):
        return {"kind": "species", "name": observable.name,
                "species": species[observable.species_index]}
    if isinstance(observable, LinearCombination):
        result: Dict[str, Any] = {
            "kind": "linear",
            "name": observable.name,
            "coefficients": {s: c for s, c in zip(species, observable.coefficients) if c != 0.0}
        }
        if observable.offset != 0.0:
            result["offset"] = observable.offset
        return result
    if isinstance(observable, Indicator):
        return {"kind": "indicator", "name": observable.name,
                "states": [list(s) for s in sorted(observable.states)]}
    assert isinstance(observable, Custom)
    return {"kind": "custom", "name": observable.name,
            "table": [{"state": list(s), "value": v} for s, v in sorted(observable.table.items())]}


def find_observable(observables: Iterable[Observable], name: str) -> Observable:
    for observable in observables:
        if observable.name == name:
            return observable
    raise ModelError(f"unknown observable `{name}`")
