"""
Report bundles: `report.json`, sorted CSV tables and a generated plot script.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union

import pandas as pd

from ..errors import UsageError
from ..experiment.report import EnsembleReport, EstimateRow, SlopeFit, sort_key
from ..simulation.ssa import TrajectoryRecord

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"

ESTIMATE_COLUMNS = list(EstimateRow._fields)
VARIANCE_COLUMNS = ["estimator", "parameter", "observable", "t", "var"]
ORACLE_COLUMNS = ["quantity", "value"]

# JSON ---------------------------------------------------------------------------------------------

def report_to_dict(report: EnsembleReport) -> Dict[str, Any]:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "provenance": {
            "seed": report.seed,
            "version": report.version,
            "config_hash": report.config_hash,
        },
        "name": report.name,
        "config": report.config,
        "samples": report.samples,
        "used": report.used,
        "absorbed": report.absorbed,
        "burn_in_fraction": report.burn_in_fraction,
        "centering": report.centering,
        "estimates": [r._asdict() for r in sorted(report.estimates, key=sort_key)],
        "slopes": [s._asdict() for s in report.slopes],
        "oracle": report.oracle,
        "health": report.health,
    }


def report_from_dict(d: Mapping[str, Any]) -> EnsembleReport:
    if d.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise UsageError(f"unsupported report schema version {d.get('schema_version')!r}")
    provenance = d["provenance"]
    return EnsembleReport(
        name=d["name"],
        config=d["config"],
        config_hash=provenance["config_hash"],
        seed=provenance["seed"],
        version=provenance["version"],
        samples=d["samples"],
        used=d["used"],
        absorbed=d["absorbed"],
        burn_in_fraction=d["burn_in_fraction"],
        centering=d["centering"],
        estimates=[EstimateRow(**r) for r in d["estimates"]],
        slopes=[SlopeFit(**s) for s in d["slopes"]],
        oracle=d["oracle"],
        health=d["health"])


def dump_report(report: EnsembleReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def load_report(path: Union[str, Path]) -> EnsembleReport:
    """
    Read a `report.json` (or a bundle directory containing one) back into an EnsembleReport.
    """
    path = Path(path)
    if path.is_dir():
        path = path / "report.json"
    try:
        return report_from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise UsageError(f"cannot load report `{path}`: {e}") from None

# Tables -------------------------------------------------------------------------------------------

def estimates_frame(report: EnsembleReport) -> pd.DataFrame:
    rows = sorted(report.estimates, key=sort_key)
    return pd.DataFrame([r._asdict() for r in rows], columns=ESTIMATE_COLUMNS)


def variance_frame(report: EnsembleReport) -> pd.DataFrame:
    return estimates_frame(report)[VARIANCE_COLUMNS]


def oracle_frame(values: Mapping[str, float]) -> pd.DataFrame:
    return pd.DataFrame(
        [(key, float(values[key])) for key in sorted(values)], columns=ORACLE_COLUMNS)


def write_csv(frame: pd.DataFrame, path: Union[str, Path]):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

# Plot Script --------------------------------------------------------------------------------------

PLOT_SCRIPT = '''\
"""
Two panels per (parameter, observable): the estimated sensitivity against t with 95% intervals,
and a log-log plot of the estimator variances against t.
"""
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

here = Path(__file__).parent
estimates = pd.read_csv(here / "estimates.csv")
for (parameter, observable), group in estimates.groupby(["parameter", "observable"]):
    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4))
    for estimator, rows in group.groupby("estimator"):
        left.plot(rows["t"], rows["mean"], marker="o", label=estimator)
        left.fill_between(rows["t"], rows["ci_lo"], rows["ci_hi"], alpha=0.2)
        right.loglog(rows["t"], rows["var"], marker="o", label=estimator)
    left.set_xlabel("t")
    left.set_ylabel(f"d pi({observable}) / d {parameter}")
    right.set_xlabel("t")
    right.set_ylabel("variance")
    left.legend()
    right.legend()
    fig.tight_layout()
    fig.savefig(here / f"{parameter}-{observable}.png", dpi=150)
'''

# Bundles ------------------------------------------------------------------------------------------

def write_report_bundle(
    report: EnsembleReport,
    out_dir: Union[str, Path],
    oracle: Optional[Mapping[str, float]] = None,
    extra: Optional[Mapping[str, pd.DataFrame]] = None
) -> Path:
    """
    Write a report bundle into `out_dir`. `oracle` defaults to the report's own reference values;
    `extra` adds further named CSV tables (e.g. a benchmark's check table).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dump_report(report), encoding="utf-8")
    write_csv(estimates_frame(report), out / "estimates.csv")
    write_csv(variance_frame(report), out / "variance.csv")
    write_csv(oracle_frame(report.oracle if oracle is None else oracle), out / "oracle.csv")
    for name, frame in (extra or {}).items():
        write_csv(frame, out / f"{name}.csv")
    (out / "plot.py").write_text(PLOT_SCRIPT, encoding="utf-8")
    logger.info("Wrote report bundle to %s", out)
    return out

# Trajectories -------------------------------------------------------------------------------------

def trajectory_frame(
    record: TrajectoryRecord,
    species: Sequence[str],
    parameters: Sequence[str] = (),
    observables: Sequence[str] = ()
) -> pd.DataFrame:
    """
    One row per checkpoint with the state, the weight processes and the observable integrals.
    """
    columns: Dict[str, Iterable[Any]] = {"t": record.times}
    for i, name in enumerate(species):
        columns[name] = record.states[:, i]
    weights = record.weights()
    for i, name in enumerate(parameters):
        columns[f"Z[{name}]"] = weights[:, i]
    int_f = record.acc[:, record.layout.int_f]
    for i, name in enumerate(observables):
        columns[f"int_f[{name}]"] = int_f[:, i]
    return pd.DataFrame(columns)


def write_trajectory(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(frame, path)
    return path


def write_json(values: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
