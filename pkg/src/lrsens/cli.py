"""
The `lrsens` command line: `simulate`, `estimate`, `oracle` and `bench`.

Every command runs as a job inside a scripting Context; its flags come from the modules it uses.
Failures map to exit codes 2 (usage), 3 (model), 4 (numerical) and 5 (benchmark acceptance).
"""
import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from . import scripting as lrs
from .errors import AcceptanceError, EXIT_USAGE, LrsensError, UsageError
from .experiment.benchmarks import BENCHMARKS, SCALES
from .experiment.config import linear_grid, parse_grid
from .io.report import (
    oracle_frame,
    trajectory_frame,
    write_csv,
    write_json,
    write_report_bundle,
    write_trajectory
)
from .network import ReactionNetwork
from .oracle import (
    asymptotic_covariance,
    check_irreducible,
    check_lyapunov,
    linear_moment_sensitivity,
    sensitivity_direct,
    sensitivity_fd,
    solve_poisson,
    stationary_distribution,
    truncation_error_bound
)
from .oracle.truncation import conservation_surface, Truncation
from .observables import LinearCombination
from .simulation import simulate

logger = logging.getLogger(__name__)

DEFAULT_TRAJECTORY_POINTS = 100
ORACLE_QUANTITIES = ("pi", "poisson", "sensitivity", "covariance", "check")

# Helpers ------------------------------------------------------------------------------------------

def _state_label(x: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in x)


def _final_table(report) -> pd.DataFrame:
    t_max = max(report.times)
    rows = [r._asdict() for r in report.estimates if r.t == t_max]
    return pd.DataFrame(rows)[["estimator", "parameter", "observable", "mean", "se", "ci_lo",
                               "ci_hi"]]


def _echo(text: str):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    sys.stdout.flush()

# simulate -----------------------------------------------------------------------------------------

def _simulate_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group(title="Simulation")
    group.add_argument("--t-end", type=float, required=True)
    group.add_argument("--checkpoints", type=str, default=None,
                       help=f"geom:..., lin:... or t1,t2,... (default: {DEFAULT_TRAJECTORY_POINTS} "
                            "evenly spaced times)")
    group.add_argument("--stream", type=int, default=0, help="The trajectory's stream index.")


def simulate_job(ctx: lrs.Context):
    """
    Simulate one trajectory and write its checkpointed state and accumulators as CSV.
    """
    config = ctx.config
    model = ctx.get(lrs.module.Model)
    runtime = ctx.get(lrs.module.Runtime)
    if not config.t_end > 0.0:
        raise UsageError("--t-end must be positive")
    if config.checkpoints is None:
        checkpoints = linear_grid(
            config.t_end/DEFAULT_TRAJECTORY_POINTS, config.t_end, DEFAULT_TRAJECTORY_POINTS)
    else:
        checkpoints = parse_grid(config.checkpoints, config.t_end)
    observables = model.model.observables if config.observable is None else model.observables
    params = model.params
    record = simulate(
        model.network,
        model.c,
        model.x0,
        config.t_end,
        checkpoints,
        observables,
        params,
        rng=ctx.get(lrs.module.Rng).stream(config.stream))
    net = model.network
    frame = trajectory_frame(
        record,
        net.species_names,
        [net.parameter_names[k] for k in params],
        [o.name for o in observables])
    out = runtime.out
    if out is None:
        write_csv(frame, sys.stdout)
    else:
        path = write_trajectory(frame, out if out.suffix else out / "trajectory.csv")
        logger.info("Wrote %d checkpoints to %s", len(frame), path)
    return record

# estimate -----------------------------------------------------------------------------------------

def estimate_job(ctx: lrs.Context):
    """
    Run an ensemble and write its report bundle.
    """
    ensemble = ctx.get(lrs.module.Ensemble)
    runtime = ctx.get(lrs.module.Runtime)
    wandb = ctx.get(lrs.module.Wandb)
    report = ensemble.run()
    _echo(_final_table(report).to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    if runtime.out is not None:
        bundle = write_report_bundle(report, runtime.out)
        wandb.log_artifact(bundle, name=f"report-{report.config_hash[:12]}")
    wandb.log_report(report)
    return report

# oracle -------------------------------------------------------------------------------------------

def _oracle_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group(title="Oracle")
    group.add_argument("--what", type=str, choices=ORACLE_QUANTITIES, default="sensitivity")
    group.add_argument("--cross-check", action="store_true",
                       help="Also compute finite-difference and, for affine networks, moment-"
                            "equation sensitivities.")
    group.add_argument("--lyapunov-v", type=str, default=None,
                       help="Comma separated weights v of V(x) = 1 + <v, x> for a drift scan.")
    group.add_argument("--alpha1", type=float, default=0.5)


def _oracle_truncation(model) -> Truncation:
    if model.model.truncation is not None:
        return model.truncation()
    logger.info("No truncation declared; using the conservation surface of the initial state")
    return conservation_surface(model.network, model.x0)


def _check(net: ReactionNetwork, c: np.ndarray, trunc: Truncation, config) -> Dict[str, Any]:
    report = check_irreducible(net, c, trunc)
    result: Dict[str, Any] = {
        "states": len(trunc),
        "irreducible": report.irreducible,
        "components": [[list(x) for x in component] for component in report.components],
        "absorbing": [list(x) for x in report.absorbing],
    }
    if not report.irreducible:
        logger.warning("Truncation is reducible: %d communicating classes, %d absorbing states",
                       max(1, len(report.components)), len(report.absorbing))
    if config.lyapunov_v is not None:
        try:
            v = [float(w) for w in config.lyapunov_v.split(",")]
            drift = check_lyapunov(net, c, v, config.alpha1, trunc)
        except ValueError as e:
            raise UsageError(f"invalid drift scan: {e}") from None
        result["lyapunov"] = {
            "alpha1": drift["alpha1"],
            "alpha2": drift["alpha2"],
            "D": [list(x) for x in drift["holds_outside"]],
            "finite_space_trivial": drift["finite_space_trivial"],
            "boundary_drift_negative": drift["boundary_drift_negative"],
            "inconclusive": drift["inconclusive"],
        }
    return result


def oracle_job(ctx: lrs.Context):
    """
    Exact quantities on the model's truncation, printed as JSON.
    """
    config = ctx.config
    model = ctx.get(lrs.module.Model)
    runtime = ctx.get(lrs.module.Runtime)
    net, c = model.network, model.c
    trunc = _oracle_truncation(model)
    results: Dict[str, Any]
    if config.what == "check":
        results = _check(net, c, trunc, config)
    else:
        base = stationary_distribution(net, c, trunc)
        results = {"states": len(trunc), "mass_leak_rate": base.mass_leak_rate}
        results.update({f"residual[{k}]": v for k, v in base.residuals.items()})
        if config.what == "pi":
            for x, p in zip(trunc.states, base.pi):
                results[f"pi[{_state_label(x)}]"] = float(p)
        observables = model.observables if config.what != "pi" or model.model.observables else ()
        for f in observables:
            solution = solve_poisson(net, c, trunc, f, base)
            assert solution.f_hat is not None
            results[f"pi_f[{f.name}]"] = solution.pi_f
            results[f"truncation_error_bound[{f.name}]"] = truncation_error_bound(solution)
            results.update({f"residual[{k}][{f.name}]": v for k, v in solution.residuals.items()
                            if k not in base.residuals})
            if config.what == "poisson":
                for x, value in zip(trunc.states, solution.f_hat):
                    results[f"f_hat[{f.name}][{_state_label(x)}]"] = float(value)
            for k in model.params if config.what in ("sensitivity", "covariance") else ():
                name = net.parameter_names[k]
                key = f"[{name}][{f.name}]"
                if config.what == "sensitivity":
                    results[f"sensitivity{key}"] = sensitivity_direct(net, c, trunc, f, k, solution)
                    if config.cross_check:
                        results[f"sensitivity_fd{key}"] = sensitivity_fd(net, c, trunc, f, k)
                else:
                    cov = asymptotic_covariance(net, c, trunc, f, k, solution)
                    results[f"sigma11_rate{key}"] = cov.sigma11_rate
                    results[f"sigma12_rate{key}"] = cov.sigma12_rate
                    results[f"sigma22_rate{key}"] = cov.sigma22_rate
                    results[f"clr_limit_variance{key}"] = cov.clr_limit_variance
            affine = all(net.is_affine(j) for j in range(net.num_reactions))
            if config.what == "sensitivity" and config.cross_check and affine \
                    and isinstance(f, LinearCombination):
                moments = linear_moment_sensitivity(net, c, f, model.x0)
                for k in model.params:
                    results[f"sensitivity_moments[{net.parameter_names[k]}][{f.name}]"] = \
                        float(moments[k])
    _echo(json.dumps(results, indent=2, sort_keys=True))
    out = runtime.out
    if out is not None:
        if out.suffix == ".csv":
            numeric = {k: float(v) for k, v in results.items()
                       if isinstance(v, (int, float, bool, np.floating))}
            write_csv(oracle_frame(numeric), out)
        else:
            write_json(results, out if out.suffix else out / "oracle.json")
    return results

# bench --------------------------------------------------------------------------------------------

def _bench_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("which", type=str, choices=sorted(BENCHMARKS))
    parser.add_argument("--scale", type=str, choices=SCALES, default="desk")


def bench_job(ctx: lrs.Context):
    """
    Run a benchmark, write its bundle with the check table, and fail on unmet thresholds.
    """
    config = ctx.config
    runtime = ctx.get(lrs.module.Runtime)
    wandb = ctx.get(lrs.module.Wandb)
    result = BENCHMARKS[config.which](
        scale=config.scale,
        seed=ctx.get(lrs.module.Rng).seed,
        workers=runtime.workers,
        progress=not runtime.quiet)
    checks = pd.DataFrame(result.table())
    _echo(checks.to_string(index=False))
    if runtime.out is not None:
        oracle = {**result.reference, **result.report.oracle}
        bundle = write_report_bundle(result.report, runtime.out, oracle, {"checks": checks})
        wandb.log_artifact(bundle, name=f"bench-{config.which}-{config.scale}")
    wandb.log_report(result.report)
    wandb.log_table("checks", result.table())
    wandb.log_summary({"passed": result.passed})
    result.raise_for_failures()
    return result

# Dispatch -----------------------------------------------------------------------------------------

class Command(NamedTuple):
    description: str
    modules: tuple
    job: Callable[[lrs.Context], Any]
    arguments: Optional[Callable[[argparse.ArgumentParser], None]] = None


COMMANDS: Dict[str, Command] = {
    "simulate": Command(
        "Simulate one trajectory with its sensitivity accumulators.",
        (lrs.module.Runtime, lrs.module.Model, lrs.module.Rng),
        simulate_job,
        _simulate_arguments),
    "estimate": Command(
        "Estimate steady-state sensitivities from an ensemble of trajectories.",
        (lrs.module.Runtime, lrs.module.Model, lrs.module.Rng, lrs.module.Ensemble,
         lrs.module.Wandb),
        estimate_job),
    "oracle": Command(
        "Exact stationary quantities on a finite truncation.",
        (lrs.module.Runtime, lrs.module.Model),
        oracle_job,
        _oracle_arguments),
    "bench": Command(
        "Run a reference benchmark against its acceptance thresholds.",
        (lrs.module.Runtime, lrs.module.Rng, lrs.module.Wandb),
        bench_job,
        _bench_arguments),
}


def make_context(command: str, argv: List[str]) -> lrs.Context:
    spec = COMMANDS[command]
    ctx = lrs.Context(
        spec.job,
        program_name=f"lrsens {command}",
        description=spec.description,
        argv=argv,
        arguments=spec.arguments)
    ctx.argument_parser.set_defaults(command=command)
    for module in spec.modules:
        ctx.use(module)
    if ctx.is_using(lrs.module.Wandb):
        ctx.get(lrs.module.Wandb).job_type(command)
    return ctx


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lrsens",
        description="Likelihood-ratio sensitivity estimation for stochastic reaction networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("args", nargs=argparse.REMAINDER)
    try:
        arguments = parser.parse_args(argv)
        make_context(arguments.command, arguments.args).execute()
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except AcceptanceError as e:
        logger.error("%s", e)
        return e.exit_code
    except LrsensError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except KeyboardInterrupt:
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
