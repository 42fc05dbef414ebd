"""
The four steady-state sensitivity estimators and the moment reduction used to aggregate them.

Every estimator returns an array indexed `[observable, parameter]` for a single accumulator
snapshot, or `[checkpoint, observable, parameter]` for the vectorised forms.
"""
from dataclasses import dataclass
import enum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CenteringError
from .simulation.ssa import SensitivityAccumulators, TrajectoryRecord

Centering = Union[float, Sequence[float], np.ndarray]

Z_95 = 1.96

# Estimator Kinds ----------------------------------------------------------------------------------

class EstimatorKind(enum.Enum):
    LR = "lr"
    CLR = "clr"
    INT_LR = "intlr"
    INT_CLR = "intclr"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def needs_centering(self) -> bool:
        return self in (EstimatorKind.CLR, EstimatorKind.INT_CLR)

    @staticmethod
    def parse(name: str) -> "EstimatorKind":
        key = name.strip().lower().replace("-", "").replace("_", "")
        for kind in EstimatorKind:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown estimator `{name}`")

    @staticmethod
    def parse_list(names: str) -> Tuple["EstimatorKind", ...]:
        kinds = tuple(EstimatorKind.parse(n) for n in names.split(",") if n.strip())
        if not kinds:
            raise ValueError("no estimators selected")
        return tuple(k for k in EstimatorKind if k in kinds)


_LABELS = {
    EstimatorKind.LR: "LR",
    EstimatorKind.CLR: "CLR",
    EstimatorKind.INT_LR: "intLR",
    EstimatorKind.INT_CLR: "intCLR",
}

# Single Snapshot Estimators -----------------------------------------------------------------------

def _check_time(t: float):
    if not t > 0.0:
        raise ValueError("estimators require t > 0")


def _pi_f(pi_f: Centering, count: int) -> np.ndarray:
    values = np.broadcast_to(np.asarray(pi_f, dtype=np.float64), (count,))
    return np.array(values)


def lr_estimate(acc: SensitivityAccumulators, t: float) -> np.ndarray:
    """
    (int f / t) * Z(t)
    """
    _check_time(t)
    return np.outer(acc.int_f/t, acc.Z)


def clr_estimate(acc: SensitivityAccumulators, t: float, pi_f: Centering) -> np.ndarray:
    """
    ((int f - pi(f) t) / t) * Z(t)
    """
    _check_time(t)
    pi_f = _pi_f(pi_f, len(acc.int_f))
    return np.outer((acc.int_f - pi_f*t)/t, acc.Z)


def int_lr_estimate(acc: SensitivityAccumulators, t: float) -> np.ndarray:
    """
    int f Z ds / t
    """
    _check_time(t)
    return acc.int_fZ/t


def reconstruct_int_clr(acc: SensitivityAccumulators, t: float, pi_f: Centering) -> np.ndarray:
    """
    (int f Z ds - pi(f) int Z ds) / t, the integral CLR estimator rebuilt from its uncentered parts.
    """
    _check_time(t)
    pi_f = _pi_f(pi_f, len(acc.int_f))
    return (acc.int_fZ - np.outer(pi_f, acc.int_Z))/t


def int_clr_estimate(
    acc: SensitivityAccumulators,
    t: float,
    pi_f: Optional[Centering] = None
) -> np.ndarray:
    """
    int (f - pi(f)) Z ds / t.

    The online centered accumulator is used whenever the snapshot was centered with `pi_f` (or when
    `pi_f` is omitted). Any other centering constant falls back to the reconstruction.
    """
    _check_time(t)
    if acc.centering is not None:
        if pi_f is None or np.array_equal(_pi_f(pi_f, len(acc.int_f)), acc.centering):
            return acc.int_fcZ/t
    if pi_f is None:
        raise CenteringError("the integral CLR estimator needs a centering constant")
    return reconstruct_int_clr(acc, t, pi_f)


def estimate(
    kind: EstimatorKind,
    acc: SensitivityAccumulators,
    t: float,
    pi_f: Optional[Centering] = None
) -> np.ndarray:
    if kind == EstimatorKind.LR:
        return lr_estimate(acc, t)
    if kind == EstimatorKind.INT_LR:
        return int_lr_estimate(acc, t)
    if kind == EstimatorKind.INT_CLR:
        return int_clr_estimate(acc, t, pi_f)
    if pi_f is None:
        if acc.centering is None:
            raise CenteringError("the CLR estimator needs a centering constant")
        pi_f = acc.centering
    return clr_estimate(acc, t, pi_f)

# Vectorised Estimators ----------------------------------------------------------------------------

def record_estimates(
    record: TrajectoryRecord,
    kinds: Iterable[EstimatorKind],
    pi_f: Optional[Centering] = None
) -> Dict[EstimatorKind, np.ndarray]:
    """
    Every requested estimator at every checkpoint of a trajectory, shape (checkpoints, O, K).
    """
    layout = record.layout
    shape = (len(record.times), layout.num_observables, layout.num_params)
    t = record.times[:, None, None]
    Z = record.acc[:, layout.z][:, None, :]
    int_Z = record.acc[:, layout.int_z][:, None, :]
    int_f = record.acc[:, layout.int_f][:, :, None]
    int_fZ = record.acc[:, layout.int_fz].reshape(shape)
    int_fcZ = record.acc[:, layout.int_fcz].reshape(shape)
    online = record.centering is not None and (
        pi_f is None or np.array_equal(_pi_f(pi_f, layout.num_observables), record.centering))
    if pi_f is None and record.centering is not None:
        pi_f = record.centering
    center = None if pi_f is None else _pi_f(pi_f, layout.num_observables)[None, :, None]
    result = {}
    for kind in kinds:
        if kind.needs_centering and center is None:
            raise CenteringError(f"the {kind.label} estimator needs a centering constant")
        if kind == EstimatorKind.LR:
            result[kind] = (int_f/t)*Z
        elif kind == EstimatorKind.CLR:
            result[kind] = ((int_f - center*t)/t)*Z
        elif kind == EstimatorKind.INT_LR:
            result[kind] = int_fZ/t
        elif online:
            result[kind] = int_fcZ/t
        else:
            result[kind] = (int_fZ - center*int_Z)/t
    return result

# Moments ------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Moments:
    """
    Elementwise (count, mean, M2) triples. Merging is exact up to rounding and associative, so a
    fixed merge order yields bit-identical results.
    """
    count: int
    mean: np.ndarray
    m2: np.ndarray

    @staticmethod
    def empty(shape: Tuple[int, ...]) -> "Moments":
        return Moments(0, np.zeros(shape), np.zeros(shape))

    @staticmethod
    def of(values: np.ndarray) -> "Moments":
        """
        Moments of a stack of samples along the first axis.
        """
        values = np.asarray(values, dtype=np.float64)
        if len(values) == 0:
            return Moments.empty(values.shape[1:])
        mean = values.mean(axis=0)
        return Moments(len(values), mean, ((values - mean)**2).sum(axis=0))

    def merge(self, other: "Moments") -> "Moments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta*(other.count/count)
        m2 = self.m2 + other.m2 + delta**2*(self.count*other.count/count)
        return Moments(count, mean, m2)

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.mean, np.nan)
        return self.m2/(self.count - 1)

    @property
    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance/self.count)

    def confidence_interval(self, z: float = Z_95) -> Tuple[np.ndarray, np.ndarray]:
        half_width = z*self.standard_error
        return self.mean - half_width, self.mean + half_width


def merge_all(moments: Iterable[Moments]) -> Moments:
    result: Optional[Moments] = None
    for m in moments:
        result = m if result is None else result.merge(m)
    assert result is not None, "nothing to merge"
    return result

# Sensitivity Estimates ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SensitivityEstimate:
    kind: EstimatorKind
    parameter: int
    observable: str
    t: float
    values: np.ndarray

    @property
    def value(self) -> float:
        return float(np.mean(self.values))

    @property
    def variance(self) -> float:
        return float(np.var(self.values, ddof=1))

    @property
    def standard_error(self) -> float:
        return float(np.sqrt(self.variance/len(self.values)))

    @property
    def confidence_interval(self) -> Tuple[float, float]:
        half_width = Z_95*self.standard_error
        return self.value - half_width, self.value + half_width


def collect_estimates(
    records: Sequence[TrajectoryRecord],
    kind: EstimatorKind,
    parameter_position: int = 0,
    observable_index: int = 0,
    observable_name: str = "f",
    checkpoint: int = -1,
    pi_f: Optional[Centering] = None
) -> SensitivityEstimate:
    """
    Gather one estimator across trajectories, skipping absorbed ones.
    """
    kept = [r for r in records if not r.absorbed]
    if not kept:
        raise ValueError("every trajectory was absorbed")
    values = np.array([
        record_estimates(r, (kind,), pi_f)[kind][checkpoint, observable_index, parameter_position]
        for r in kept
    ])
    return SensitivityEstimate(
        kind=kind,
        parameter=int(kept[0].parameters[parameter_position]),
        observable=observable_name,
        t=float(kept[0].times[checkpoint]),
        values=values)
