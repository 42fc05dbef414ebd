from dataclasses import dataclass, field
import hashlib
import json
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import UsageError
from ..estimators import EstimatorKind
from ..network import network_to_dict, ReactionNetwork
from ..observables import Observable, observable_to_dict
from ..oracle.truncation import Truncation, truncation_from_dict

DEFAULT_POINTS_PER_DECADE = 6
DEFAULT_CHUNK_SIZE = 128
DEFAULT_PRERUN_FACTOR = 10.0

# Checkpoint Grids ---------------------------------------------------------------------------------

def geometric_grid(
    t_min: float,
    t_max: float,
    points_per_decade: int = DEFAULT_POINTS_PER_DECADE
) -> Tuple[float, ...]:
    """
    Geometrically spaced checkpoints from t_min to t_max, both included.
    """
    if not 0.0 < t_min <= t_max:
        raise UsageError("geometric grid needs 0 < t_min <= t_max")
    if t_min == t_max:
        return (float(t_max),)
    count = max(2, int(round(np.log10(t_max/t_min)*points_per_decade)))
    grid = np.geomspace(t_min, t_max, count)
    grid[0], grid[-1] = t_min, t_max
    return tuple(float(t) for t in grid)


def linear_grid(t_min: float, t_max: float, count: int) -> Tuple[float, ...]:
    if not 0.0 < t_min <= t_max or count < 1:
        raise UsageError("linear grid needs 0 < t_min <= t_max and a positive count")
    if count == 1:
        return (float(t_max),)
    grid = np.linspace(t_min, t_max, count)
    grid[-1] = t_max
    return tuple(float(t) for t in grid)


def parse_grid(text: str, t_end: float) -> Tuple[float, ...]:
    """
    Parse a checkpoint specification: `geom:<t_min>[:<points per decade>]`,
    `lin:<t_min>:<count>` or a comma separated list of times.
    """
    try:
        if text.startswith("geom:"):
            parts = text.split(":")[1:]
            ppd = int(parts[1]) if len(parts) > 1 else DEFAULT_POINTS_PER_DECADE
            return geometric_grid(float(parts[0]), t_end, ppd)
        if text.startswith("lin:"):
            _, t_min, count = text.split(":")
            return linear_grid(float(t_min), t_end, int(count))
        return tuple(sorted(float(t) for t in text.split(",") if t.strip()))
    except ValueError:
        raise UsageError(f"invalid checkpoint specification `{text}`") from None

# Centering ----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class CenteringSource:
    """
    Where the centering constants pi(f) come from.

    oracle: A stationary solve on `truncation` (a Truncation or a model-file truncation section).
    prerun: One long ergodic run of length `length_factor * t_end`.
    value: Explicit constants, one per observable.
    """
    kind: str
    truncation: Optional[Union[Truncation, Mapping[str, Any]]] = None
    length_factor: float = DEFAULT_PRERUN_FACTOR
    values: Optional[Tuple[float, ...]] = None
    allow_prerun: bool = False

    @staticmethod
    def oracle(
        truncation: Union[Truncation, Mapping[str, Any]],
        allow_prerun: bool = False
    ) -> "CenteringSource":
        return CenteringSource("oracle", truncation=truncation, allow_prerun=allow_prerun)

    @staticmethod
    def prerun(length_factor: float = DEFAULT_PRERUN_FACTOR) -> "CenteringSource":
        return CenteringSource("prerun", length_factor=length_factor)

    @staticmethod
    def explicit(values: Union[float, Sequence[float]]) -> "CenteringSource":
        values = (values,) if isinstance(values, (int, float)) else values
        return CenteringSource("value", values=tuple(float(v) for v in values))

    @staticmethod
    def none() -> "CenteringSource":
        return CenteringSource("none")

    def __post_init__(self):
        if self.kind not in ("oracle", "prerun", "value", "none"):
            raise UsageError(f"unknown centering source `{self.kind}`")
        if self.kind == "oracle" and self.truncation is None:
            raise UsageError("oracle centering needs a truncation")
        if self.kind == "value" and not self.values:
            raise UsageError("explicit centering needs values")
        if self.kind == "prerun" and not self.length_factor > 0.0:
            raise UsageError("pre-run length factor must be positive")

    def resolve_truncation(self, net: ReactionNetwork, x0: Sequence[int]) -> Truncation:
        assert self.truncation is not None
        if isinstance(self.truncation, Truncation):
            return self.truncation
        return truncation_from_dict(net, np.asarray(x0), self.truncation)

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "oracle":
            if isinstance(self.truncation, Truncation):
                digest = hashlib.sha256(self.truncation.states.tobytes()).hexdigest()
                result["truncation"] = {"kind": "states", "count": len(self.truncation),
                                        "sha256": digest}
            else:
                result["truncation"] = dict(self.truncation or {})
            result["allow_prerun"] = self.allow_prerun
        elif self.kind == "prerun":
            result["length_factor"] = self.length_factor
        elif self.kind == "value":
            result["values"] = list(self.values or ())
        return result

# Ensemble Configuration ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleConfig:
    network: ReactionNetwork
    c: Tuple[float, ...]
    x0: Tuple[int, ...]
    t_end: float
    checkpoints: Tuple[float, ...]
    samples: int
    seed: int
    params_of_interest: Tuple[int, ...]
    observables: Tuple[Observable, ...]
    centering: CenteringSource = field(default_factory=CenteringSource.none)
    estimators: Tuple[EstimatorKind, ...] = tuple(EstimatorKind)
    burn_in_fraction: float = 0.0
    chunk_size: int = DEFAULT_CHUNK_SIZE
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        object.__setattr__(self, "x0", tuple(int(v) for v in self.network.state(self.x0)))
        object.__setattr__(self, "checkpoints", tuple(float(t) for t in self.checkpoints))
        object.__setattr__(self, "params_of_interest",
                           tuple(self.network.parameter_index(k) for k in self.params_of_interest))
        object.__setattr__(self, "observables", tuple(self.observables))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.samples < 2:
            raise UsageError("an ensemble needs at least 2 samples")
        if not self.t_end > 0.0:
            raise UsageError("t_end must be positive")
        if not self.checkpoints:
            raise UsageError("at least one checkpoint is required")
        if self.checkpoints[0] <= 0.0 or self.checkpoints[-1] > self.t_end:
            raise UsageError("checkpoints must lie in (0, t_end]")
        if list(self.checkpoints) != sorted(set(self.checkpoints)):
            raise UsageError("checkpoints must be strictly increasing")
        if len(self.c) != self.network.num_parameters:
            raise UsageError(f"expected {self.network.num_parameters} parameter values")
        if not self.params_of_interest:
            raise UsageError("at least one parameter of interest is required")
        if not self.observables:
            raise UsageError("at least one observable is required")
        if not self.estimators:
            raise UsageError("at least one estimator is required")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise UsageError("burn-in fraction must lie in [0, 1)")
        if self.chunk_size < 1:
            raise UsageError("chunk size must be positive")
        if self.centering.kind == "value" and len(self.centering.values or ()) != len(
                self.observables):
            raise UsageError("explicit centering needs one value per observable")

    @property
    def grid(self) -> Tuple[float, ...]:
        """
        The checkpoints with t_end appended when missing.
        """
        if self.checkpoints[-1] == self.t_end:
            return self.checkpoints
        return self.checkpoints + (self.t_end,)

    @property
    def parameter_names(self) -> Tuple[str, ...]:
        return tuple(self.network.parameter_names[k] for k in self.params_of_interest)

    @property
    def observable_names(self) -> Tuple[str, ...]:
        return tuple(o.name for o in self.observables)

    def to_dict(self) -> Dict[str, Any]:
        species = self.network.species_names
        return {
            "name": self.name,
            "network": network_to_dict(self.network),
            "c": list(self.c),
            "x0": list(self.x0),
            "t_end": self.t_end,
            "checkpoints": list(self.checkpoints),
            "samples": self.samples,
            "seed": self.seed,
            "params_of_interest": list(self.parameter_names),
            "observables": [observable_to_dict(o, species) for o in self.observables],
            "centering": self.centering.to_dict(),
            "estimators": [k.value for k in self.estimators],
            "burn_in_fraction": self.burn_in_fraction,
            "chunk_size": self.chunk_size,
        }

    def config_hash(self) -> str:
        """
        SHA-256 of the canonical (sorted key) JSON form.
        """
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
