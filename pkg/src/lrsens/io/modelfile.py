"""
The JSON model-file format.

    {
      "schema_version": 1,
      "name": "...",
      "species": ["S1", ...],
      "parameters": [{"name": "c1", "value": 10.0}, ...],
      "reactions": [{"name": "R1", "reactants": {"S1": 1}, "products": {"S2": 1},
                     "rate": {"kind": "mass_action", "parameter": "c1"}}, ...],
      "initial_state": {"S1": 5, ...},
      "observables": [{"kind": "species", "name": "x1", "species": "S1"}, ...],
      "truncation": {"kind": "conservation"} | {"kind": "bounds", "bounds": {"S1": 20, ...}}
    }
"""
from dataclasses import dataclass, field
import importlib.resources
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..errors import ModelError
from ..network import network_from_dict, network_to_dict, ReactionNetwork, State
from ..observables import Observable, observable_from_dict, observable_to_dict
from ..oracle.truncation import Truncation, truncation_from_dict

SCHEMA_VERSION = 1

_TOP_LEVEL_KEYS = {
    "schema_version", "name", "species", "parameters", "reactions", "initial_state",
    "observables", "truncation"
}

@dataclass(frozen=True, eq=False)
class ModelFile:
    network: ReactionNetwork
    initial_state: State
    observables: Tuple[Observable, ...] = ()
    truncation: Optional[Dict[str, Any]] = None
    source: Optional[str] = field(default=None, compare=False)

    def __eq__(self, other):
        if not isinstance(other, ModelFile):
            return NotImplemented
        return self.network == other.network \
            and np.array_equal(self.initial_state, other.initial_state) \
            and self.observables == other.observables \
            and self.truncation == other.truncation

    def build_truncation(self) -> Truncation:
        if self.truncation is None:
            raise ModelError("model declares no truncation", "truncation")
        return truncation_from_dict(self.network, self.initial_state, self.truncation)

# Parsing ------------------------------------------------------------------------------------------

def _initial_state(net: ReactionNetwork, value: Any) -> State:
    path = "initial_state"
    if value is None:
        return np.zeros(net.num_species, dtype=np.int64)
    if isinstance(value, Mapping):
        for name, count in value.items():
            if name not in net.species_names:
                raise ModelError(f"unknown species `{name}`", f"{path}.{name}")
            if not isinstance(count, int) or isinstance(count, bool) or count < 0:
                raise ModelError("counts must be non-negative integers", f"{path}.{name}")
        return net.state(value)
    if isinstance(value, list):
        if len(value) != net.num_species:
            raise ModelError(f"initial state must have {net.num_species} entries", path)
        if any(not isinstance(v, int) or isinstance(v, bool) or v < 0 for v in value):
            raise ModelError("counts must be non-negative integers", path)
        return net.state(value)
    raise ModelError("initial state must be an object or a list", path)


def _truncation(net: ReactionNetwork, value: Any) -> Optional[Dict[str, Any]]:
    path = "truncation"
    if value is None:
        return None
    if not isinstance(value, Mapping):
        raise ModelError("truncation must be an object", path)
    kind = value.get("kind")
    allowed = {"conservation": {"kind"}, "bounds": {"kind", "bounds"}}
    if kind not in allowed:
        raise ModelError(f"unknown truncation kind `{kind}`", f"{path}.kind")
    unknown = sorted(set(value) - allowed[kind])
    if unknown:
        raise ModelError(f"unknown key `{unknown[0]}`", path)
    if kind == "bounds":
        bounds = value.get("bounds")
        if not isinstance(bounds, Mapping):
            raise ModelError("bounds must map species to caps", f"{path}.bounds")
        for name, cap in bounds.items():
            if name not in net.species_names:
                raise ModelError(f"unknown species `{name}`", f"{path}.bounds.{name}")
            if not isinstance(cap, int) or isinstance(cap, bool) or cap < 0:
                raise ModelError("caps must be non-negative integers", f"{path}.bounds.{name}")
        if set(bounds) != set(net.species_names):
            raise ModelError("bounds must give a cap for every species", f"{path}.bounds")
    return json.loads(json.dumps(value))


def model_from_dict(d: Any, source: Optional[str] = None) -> ModelFile:
    if not isinstance(d, Mapping):
        raise ModelError("model file must contain a JSON object")
    unknown = sorted(set(d) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ModelError(f"unknown key `{unknown[0]}`", unknown[0])
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelError(f"unsupported schema version {version!r}", "schema_version")
    net = network_from_dict(d)
    observables = d.get("observables", [])
    if not isinstance(observables, list):
        raise ModelError("observables must be a list", "observables")
    parsed = tuple(
        observable_from_dict(o, net.species_names, f"observables[{i}]")
        for i, o in enumerate(observables))
    names = [o.name for o in parsed]
    if len(set(names)) != len(names):
        raise ModelError("duplicate observable name", "observables")
    return ModelFile(
        network=net,
        initial_state=_initial_state(net, d.get("initial_state")),
        observables=parsed,
        truncation=_truncation(net, d.get("truncation")),
        source=source)


def parse_model(text: str, source: Optional[str] = None) -> ModelFile:
    """
    Parse model-file text. Syntax errors carry line and column numbers, semantic errors the JSON
    path of the offending entry.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from None
    try:
        return model_from_dict(document, source)
    except ModelError as e:
        if source is not None and not e.message.startswith(source):
            e.message = f"{source}: {e.message}"
        raise


def read_model(path: Union[str, Path]) -> ModelFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelError(f"cannot read model file `{path}`: {e.strerror}") from None
    return parse_model(text, str(path))


def load_model(name: str) -> ModelFile:
    """
    Load one of the packaged model files by name, e.g. `linear` or `twogene`.
    """
    resource = importlib.resources.files("lrsens.models").joinpath(f"{name}.json")
    if not resource.is_file():
        raise ModelError(f"no packaged model named `{name}`")
    return parse_model(resource.read_text(encoding="utf-8"), f"{name}.json")


def packaged_models() -> Tuple[str, ...]:
    root = importlib.resources.files("lrsens.models")
    return tuple(sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json")))

# Serialization ------------------------------------------------------------------------------------

def model_to_dict(model: ModelFile) -> Dict[str, Any]:
    net = model.network
    result: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, **network_to_dict(net)}
    result["initial_state"] = {
        name: int(count) for name, count in zip(net.species_names, model.initial_state)
    }
    result["observables"] = [observable_to_dict(o, net.species_names) for o in model.observables]
    if model.truncation is not None:
        result["truncation"] = model.truncation
    return result


def serialize_model(model: ModelFile) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"
