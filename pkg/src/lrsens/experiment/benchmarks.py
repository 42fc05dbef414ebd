"""
Reproductions of the linear network and two gene complex benchmarks, with acceptance checks.
"""
from dataclasses import dataclass
import logging
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from .config import CenteringSource, EnsembleConfig, geometric_grid, linear_grid
from .ensemble import run_ensemble
from .report import EnsembleReport
from ..errors import AcceptanceError, UsageError
from ..estimators import EstimatorKind
from ..io.modelfile import load_model
from ..observables import find_observable, LinearCombination
from ..oracle import linear_moment_sensitivity

logger = logging.getLogger(__name__)

SCALES = ("desk", "paper")

TWOGENE_SIGNS = {
    "k_r": 1, "phi": 1, "k_dr": -1, "k_p": 1, "k_dp": -1, "k1": -1, "k2": 1, "k3": 1, "k4": -1
}
TWOGENE_KR_RANGE = (26.0, 40.0)

# Results ------------------------------------------------------------------------------------------

class Check(NamedTuple):
    name: str
    passed: bool
    value: float
    threshold: str


@dataclass
class BenchmarkResult:
    name: str
    scale: str
    report: EnsembleReport
    checks: List[Check]
    reference: Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def table(self) -> List[Dict[str, object]]:
        return [c._asdict() for c in self.checks]

    def raise_for_failures(self):
        failed = [c.name for c in self.checks if not c.passed]
        if failed:
            raise AcceptanceError(f"{self.name} benchmark failed: {', '.join(failed)}")


def _check_scale(scale: str):
    if scale not in SCALES:
        raise UsageError(f"unknown scale `{scale}`; expected one of {', '.join(SCALES)}")

# Linear Network -----------------------------------------------------------------------------------

def bench_linear(
    scale: str = "desk",
    seed: int = 0,
    workers: Optional[int] = None,
    progress: bool = True
) -> BenchmarkResult:
    """
    The closed linear network from (5, 5, 0) with f = x1 and the sensitivity in c3, against the exact
    value from the first moment equations.
    """
    _check_scale(scale)
    model = load_model("linear")
    net = model.network
    f = find_observable(model.observables, "x1")
    assert isinstance(f, LinearCombination)
    c = net.nominal_parameters
    k = net.parameter_index("c3")
    if scale == "desk":
        checkpoints, samples = geometric_grid(100.0, 1000.0), 4000
    else:
        checkpoints, samples = linear_grid(100.0, 1000.0, 10), 10_000
    cfg = EnsembleConfig(
        network=net,
        c=tuple(c),
        x0=tuple(model.initial_state),
        t_end=1000.0,
        checkpoints=checkpoints,
        samples=samples,
        seed=seed,
        params_of_interest=(k,),
        observables=(f,),
        centering=CenteringSource.oracle(model.truncation or {"kind": "conservation"}),
        name=f"bench-linear-{scale}")
    report = run_ensemble(cfg, workers=workers, progress=progress)
    exact = float(linear_moment_sensitivity(net, c, f, model.initial_state)[k])

    checks = []
    for kind in EstimatorKind:
        row = report.estimate(kind.label)
        error = abs(row.mean - exact)
        checks.append(Check(f"{kind.label} within 3 SE of exact", error <= 3.0*row.se,
                            error/row.se if row.se > 0 else np.inf, "<= 3"))
    for kind in (EstimatorKind.CLR, EstimatorKind.INT_CLR):
        relative = abs(report.estimate(kind.label).mean - exact)/abs(exact)
        checks.append(Check(f"{kind.label} relative error", relative <= 0.05, relative, "<= 0.05"))
    for kind, (lo, hi) in (
        (EstimatorKind.LR, (0.7, 1.3)),
        (EstimatorKind.INT_LR, (0.7, 1.3)),
        (EstimatorKind.CLR, (-0.2, 0.2)),
        (EstimatorKind.INT_CLR, (-0.2, 0.2))
    ):
        slope = report.slope(kind.label).slope
        checks.append(Check(f"{kind.label} variance slope", lo <= slope <= hi, slope,
                            f"in [{lo}, {hi}]"))
    var_clr = report.estimate("CLR").var
    ratio = report.estimate("intCLR").var/var_clr
    checks.append(Check("Var(intCLR) / Var(CLR)", ratio <= 0.6, ratio, "<= 0.6"))
    ratio = report.estimate("LR").var/var_clr
    checks.append(Check("Var(LR) / Var(CLR)", ratio > 100.0, ratio, "> 100"))
    return BenchmarkResult("linear", scale, report, checks, {"sensitivity[c3][x1]": exact})

# Two Gene Complex ---------------------------------------------------------------------------------

def bench_twogene(
    scale: str = "desk",
    seed: int = 0,
    workers: Optional[int] = None,
    progress: bool = True
) -> BenchmarkResult:
    """
    The six species two gene network from the zero state with f = #p_AB and all nine sensitivities
    estimated from the same trajectories, centered by a single long pre-run.
    """
    _check_scale(scale)
    model = load_model("twogene")
    net = model.network
    f = find_observable(model.observables, "pAB")
    t_end, samples = (5_000.0, 10_000) if scale == "desk" else (25_000.0, 100_000)
    cfg = EnsembleConfig(
        network=net,
        c=tuple(net.nominal_parameters),
        x0=tuple(model.initial_state),
        t_end=t_end,
        checkpoints=geometric_grid(t_end/10.0, t_end),
        samples=samples,
        seed=seed,
        params_of_interest=tuple(range(net.num_parameters)),
        observables=(f,),
        centering=CenteringSource.prerun(),
        name=f"bench-twogene-{scale}")
    report = run_ensemble(cfg, workers=workers, progress=progress)

    checks = []
    kr = report.estimate("CLR", "k_r").mean
    lo, hi = TWOGENE_KR_RANGE
    checks.append(Check("CLR d/dk_r", lo <= kr <= hi, kr, f"in [{lo}, {hi}]"))
    mismatches = [
        name for name, sign in TWOGENE_SIGNS.items()
        if np.sign(report.estimate("CLR", name).mean) != sign
    ]
    if mismatches:
        logger.warning("Sign mismatch for %s", ", ".join(mismatches))
    checks.append(Check("CLR sign pattern", not mismatches, float(len(mismatches)), "== 0"))

    def width(label: str) -> float:
        row = report.estimate(label, "k_r")
        return row.ci_hi - row.ci_lo

    centered = max(width("CLR"), width("intCLR"))
    for label in ("LR", "intLR"):
        ratio = width(label)/centered
        checks.append(Check(f"CI width {label} / centered", ratio >= 10.0, ratio, ">= 10"))
    return BenchmarkResult("twogene", scale, report, checks, {"sensitivity[k_r][pAB]": 32.97})


BENCHMARKS = {
    "linear": bench_linear,
    "twogene": bench_twogene,
}
