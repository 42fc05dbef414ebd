from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import NumericalError

# Rows ---------------------------------------------------------------------------------------------

class EstimateRow(NamedTuple):
    estimator: str
    parameter: str
    observable: str
    t: float
    mean: float
    var: float
    se: float
    ci_lo: float
    ci_hi: float
    n: int


class SlopeFit(NamedTuple):
    estimator: str
    parameter: str
    observable: str
    slope: float
    intercept: float
    r2: float


def sort_key(row: EstimateRow):
    return (row.estimator, row.parameter, row.observable, row.t)

# Report -------------------------------------------------------------------------------------------

@dataclass
class EnsembleReport:
    """
    The aggregate of an ensemble run.

    centering: Provenance of the centering constants (`source`, `values` and, for pre-runs,
        `half_width`).
    oracle: Exact reference values keyed `pi_f[<observable>]` and
        `sensitivity[<parameter>][<observable>]`.
    health: Martingale null checks of the weight processes and compensated counters.
    """
    name: str
    config: Dict[str, Any]
    config_hash: str
    seed: int
    version: str
    samples: int
    used: int
    absorbed: int
    burn_in_fraction: float
    centering: Dict[str, Any]
    estimates: List[EstimateRow]
    slopes: List[SlopeFit] = field(default_factory=list)
    oracle: Dict[str, float] = field(default_factory=dict)
    health: Dict[str, Any] = field(default_factory=dict)

    @property
    def estimators(self) -> List[str]:
        return sorted({r.estimator for r in self.estimates})

    @property
    def times(self) -> List[float]:
        return sorted({r.t for r in self.estimates})

    def rows(
        self,
        estimator: str,
        parameter: Optional[str] = None,
        observable: Optional[str] = None
    ) -> List[EstimateRow]:
        rows = [r for r in self.estimates if r.estimator == estimator
                and (parameter is None or r.parameter == parameter)
                and (observable is None or r.observable == observable)]
        if not rows:
            raise KeyError(f"no estimates for {estimator}/{parameter}/{observable}")
        return sorted(rows, key=sort_key)

    def estimate(
        self,
        estimator: str,
        parameter: Optional[str] = None,
        observable: Optional[str] = None,
        t: Optional[float] = None
    ) -> EstimateRow:
        """
        The estimate at time `t`, by default the last checkpoint.
        """
        rows = self.rows(estimator, parameter, observable)
        if t is None:
            return rows[-1]
        for row in rows:
            if row.t == t:
                return row
        raise KeyError(f"no estimate at t={t}")

    def variance_series(
        self,
        estimator: str,
        parameter: Optional[str] = None,
        observable: Optional[str] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        rows = self.rows(estimator, parameter, observable)
        keys = {(r.parameter, r.observable) for r in rows}
        if len(keys) > 1:
            raise KeyError("several parameter/observable pairs match; select one")
        return np.array([r.t for r in rows]), np.array([r.var for r in rows])

    def slope(
        self,
        estimator: str,
        parameter: Optional[str] = None,
        observable: Optional[str] = None
    ) -> SlopeFit:
        for fit in self.slopes:
            if fit.estimator == estimator \
                and (parameter is None or fit.parameter == parameter) \
                and (observable is None or fit.observable == observable):
                return fit
        raise KeyError(f"no slope fit for {estimator}")

# Variance Growth ----------------------------------------------------------------------------------

def fit_log_log(t: np.ndarray, var: np.ndarray) -> Tuple[float, float, float]:
    """
    Ordinary least squares of log(var) on log(t). Returns (slope, intercept, R^2).
    """
    t = np.asarray(t, dtype=np.float64)
    var = np.asarray(var, dtype=np.float64)
    if len(t) < 3:
        raise ValueError("at least 3 checkpoints are needed for a slope fit")
    if (var <= 0.0).any() or not np.isfinite(var).all():
        raise NumericalError("non-positive variance at a retained checkpoint")
    x = np.log(t)
    y = np.log(var)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(((y - (slope*x + intercept))**2).sum())
    total = float(((y - y.mean())**2).sum())
    r2 = 1.0 - residual/total if total > 0.0 else 1.0
    return float(slope), float(intercept), r2


def variance_slope(
    report: EnsembleReport,
    estimator: str,
    burn_in_fraction: Optional[float] = None,
    parameter: Optional[str] = None,
    observable: Optional[str] = None
) -> SlopeFit:
    """
    The log-log variance growth rate of an estimator over checkpoints t >= burn_in * t_max.
    """
    if burn_in_fraction is None:
        burn_in_fraction = report.burn_in_fraction
    rows = report.rows(estimator, parameter, observable)
    parameter = rows[0].parameter if parameter is None else parameter
    observable = rows[0].observable if observable is None else observable
    t, var = report.variance_series(estimator, parameter, observable)
    keep = t >= burn_in_fraction*t.max()
    slope, intercept, r2 = fit_log_log(t[keep], var[keep])
    return SlopeFit(estimator, parameter, observable, slope, intercept, r2)
