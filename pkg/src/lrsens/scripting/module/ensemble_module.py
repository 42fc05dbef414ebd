from typing import Optional, Tuple

from ..context import ContextModule
from ...errors import UsageError
from ...estimators import EstimatorKind
from ...experiment.config import (
    CenteringSource,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_PRERUN_FACTOR,
    EnsembleConfig,
    geometric_grid,
    parse_grid
)
from ...experiment.ensemble import run_ensemble
from ...experiment.report import EnsembleReport

def parse_centering(
    text: Optional[str],
    truncation: Optional[dict],
    length_factor: float = DEFAULT_PRERUN_FACTOR,
    allow_prerun: bool = False
) -> CenteringSource:
    """
    Parse `oracle`, `prerun`, `none` or `value:<x>[,<x>...]`. Without a choice, the oracle is used
    when the model declares a truncation and a pre-run otherwise.
    """
    if text is None:
        text = "oracle" if truncation is not None else "prerun"
    if text == "oracle":
        if truncation is None:
            raise UsageError("oracle centering needs a truncation in the model file")
        return CenteringSource.oracle(truncation, allow_prerun=allow_prerun)
    if text == "prerun":
        return CenteringSource.prerun(length_factor)
    if text == "none":
        return CenteringSource.none()
    if text.startswith("value:"):
        try:
            return CenteringSource.explicit([float(v) for v in text[6:].split(",")])
        except ValueError:
            pass
    raise UsageError(f"invalid centering `{text}`; expected oracle, prerun, none or value:<x>")


class Ensemble(ContextModule):
    """
    Ensemble configuration. Requires the Model, Rng and Runtime modules.
    """

    NAME = "Ensemble"

    @property
    def estimators(self) -> Tuple[EstimatorKind, ...]:
        try:
            return EstimatorKind.parse_list(self.context.config.estimators)
        except ValueError as e:
            raise UsageError(str(e)) from None

    def config(self) -> EnsembleConfig:
        from . import Model, Rng
        model = self.context.get(Model)
        config = self.context.config
        t_end = config.t_end
        if not t_end > 0.0:
            raise UsageError("--t-end must be positive")
        if config.checkpoints is None:
            checkpoints = geometric_grid(t_end/10.0, t_end)
        else:
            checkpoints = parse_grid(config.checkpoints, t_end)
        return EnsembleConfig(
            network=model.network,
            c=tuple(model.c),
            x0=tuple(model.x0),
            t_end=t_end,
            checkpoints=checkpoints,
            samples=config.samples,
            seed=self.context.get(Rng).seed,
            params_of_interest=model.params,
            observables=model.observables,
            centering=parse_centering(
                config.centering,
                model.model.truncation,
                config.prerun_factor,
                config.allow_prerun),
            estimators=self.estimators,
            burn_in_fraction=config.burn_in,
            chunk_size=config.chunk_size,
            name=model.network.name)

    def run(self, cfg: Optional[EnsembleConfig] = None) -> EnsembleReport:
        from . import Runtime
        runtime = self.context.get(Runtime)
        return run_ensemble(
            self.config() if cfg is None else cfg,
            workers=runtime.workers,
            progress=not runtime.quiet)

    def _define_arguments(self):
        group = self.context.argument_parser.add_argument_group(
            title=Ensemble.NAME,
            description="Ensemble size, horizon and estimator selection.")
        group.add_argument("--samples", type=int, default=1000)
        group.add_argument("--t-end", type=float, required=True)
        group.add_argument("--checkpoints", type=str, default=None,
                           help="geom:<t_min>[:<per decade>], lin:<t_min>:<count> or t1,t2,... "
                                "(default: geometric from t_end/10)")
        group.add_argument("--estimators", type=str, default="lr,clr,intlr,intclr")
        group.add_argument("--centering", type=str, default=None,
                           help="oracle, prerun, none or value:<x>[,<x>...]")
        group.add_argument("--allow-prerun", action="store_true",
                           help="Fall back to a pre-run when oracle centering fails.")
        group.add_argument("--prerun-factor", type=float, default=DEFAULT_PRERUN_FACTOR)
        group.add_argument("--burn-in", type=float, default=0.0,
                           help="Fraction of t_max excluded from the variance slope fits.")
        group.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
