import os
from pathlib import Path
from typing import Any, cast, Dict, List, Mapping, Optional, Set, TypedDict, TYPE_CHECKING, Union

from ..context import Context, ContextModule
from ...lazy import wandb

if TYPE_CHECKING:
    from wandb.wandb_run import Run
    from ...experiment.report import EnsembleReport

class WandbRunDefaults(TypedDict):
    wandb_project: Optional[str]
    wandb_name: Optional[str]
    wandb_entity: Optional[str]
    wandb_group: Optional[str]
    wandb_tags: Optional[List[str]]

class Wandb(ContextModule):
    """
    Optional experiment tracking. Runs are only created when `--wandb-mode` is not `disabled`.
    """

    NAME = "Weights & Biases"

    def __init__(self, context: Context):
        super().__init__(context)
        self._run: Optional["Run"] = None
        self._job_type: Optional[str] = None
        self._config_exclude_keys: Set[str] = set([
            "wandb_project",
            "wandb_name",
            "wandb_entity",
            "wandb_group",
            "wandb_tags",
            "wandb_mode",
            "log_level",
            "quiet",
        ])
        self._defaults: WandbRunDefaults = {
            "wandb_project": "lrsens",
            "wandb_name": None,
            "wandb_entity": None,
            "wandb_group": None,
            "wandb_tags": None,
        }

    # Module Interface -----------------------------------------------------------------------------

    @property
    def enabled(self) -> bool:
        return self._run is not None

    @property
    def run(self) -> "Run": # implicit type to ensure lazy importing
        """
        Get the current run.
        """
        assert self._run is not None, "Weights & Biases tracking is disabled."
        return self._run

    def defaults(
        self,
        *,
        project: Optional[str] = None,
        name: Optional[str] = None,
        entity: Optional[str] = None,
        group: Optional[str] = None,
        tags: Optional[List[str]] = None
    ) -> "Wandb":
        """
        Set default parameters for the W&B run.
        """
        self._defaults["wandb_project"] = project or self._defaults["wandb_project"]
        self._defaults["wandb_name"] = name
        self._defaults["wandb_entity"] = entity
        self._defaults["wandb_group"] = group
        self._defaults["wandb_tags"] = tags
        return self

    def job_type(self, job_type: Optional[str]) -> "Wandb":
        self._job_type = job_type
        return self

    def log_summary(self, values: Mapping[str, Any]):
        if self.enabled:
            self.run.summary.update(dict(values))

    def log_table(self, key: str, rows: List[Mapping[str, Any]]):
        if not self.enabled or not rows:
            return
        columns = list(rows[0].keys())
        self.run.log({key: wandb.Table(columns=columns, data=[[r[c] for c in columns] for r in rows])})

    def log_report(self, report: "EnsembleReport"):
        """
        Log final-checkpoint estimates as summary values and the full tables.
        """
        if not self.enabled:
            return
        summary: Dict[str, Any] = {
            "samples": report.samples,
            "used": report.used,
            "absorbed": report.absorbed,
            "config_hash": report.config_hash,
        }
        t_max = max(report.times)
        for row in report.estimates:
            if row.t == t_max:
                key = f"{row.estimator}/{row.parameter}/{row.observable}"
                summary[f"{key}/mean"] = row.mean
                summary[f"{key}/se"] = row.se
        for fit in report.slopes:
            summary[f"{fit.estimator}/{fit.parameter}/{fit.observable}/slope"] = fit.slope
        summary.update({f"oracle/{k}": v for k, v in report.oracle.items()})
        summary.update({f"health/{k}": v for k, v in report.health.items()})
        self.log_summary(summary)
        self.log_table("estimates", [r._asdict() for r in report.estimates])
        self.log_table("variance", [
            {"estimator": r.estimator, "parameter": r.parameter, "observable": r.observable,
             "t": r.t, "var": r.var} for r in report.estimates])

    def log_artifact(
        self,
        path: Union[Path, str],
        name: Optional[str] = None,
        type: str = "report"
    ) -> Optional["wandb.Artifact"]:
        """
        Log a file or directory as an artifact.
        """
        if not self.enabled:
            return None
        path = Path(path)
        artifact = wandb.Artifact(name or path.name, type=type)
        if path.is_dir():
            artifact.add_dir(str(path))
        else:
            artifact.add_file(str(path))
        return self.run.log_artifact(artifact)

    # Module Lifecycle -----------------------------------------------------------------------------

    def _define_arguments(self):
        group = self.context.argument_parser.add_argument_group(
            title=self.NAME,
            description="Configuration for the Weights & Biases module.")
        group.add_argument("--wandb-project", type=str, default=None, help="The project to log to.")
        group.add_argument("--wandb-name", type=str, default=None, help="The display name of the run.")
        group.add_argument("--wandb-entity", type=str, default=None, help="The user or team.")
        group.add_argument("--wandb-group", type=str, default=None, help="Group runs together.")
        group.add_argument("--wandb-tags", type=lambda x: x.split(','), default=None,
                           help="Comma separated run tags.")
        group.add_argument("--wandb-mode", type=str, choices=["online", "offline", "disabled"],
                           default=os.environ.get("WANDB_MODE", "disabled"), help="The logging mode.")

    def _start(self):
        config = self.context.config
        if config.wandb_mode == "disabled":
            return

        # Handling default parameters
        def parameter(key: str, parse = lambda x: x):
            if getattr(config, key) is not None:
                return getattr(config, key)
            if key.upper() in os.environ:
                return parse(os.environ[key.upper()])
            return self._defaults[key]

        self._run = cast("Run", wandb.init(
            job_type=self._job_type,
            project=parameter("wandb_project"),
            name=parameter("wandb_name"),
            entity=parameter("wandb_entity"),
            group=parameter("wandb_group"),
            tags=parameter("wandb_tags", lambda x: x.split(',')),
            mode=config.wandb_mode,
            reinit=True,
            config=wandb.helper.parse_config(config, exclude=self._config_exclude_keys)
        ))

    def _stop(self):
        if self._run is None:
            return
        self._run.finish()
        self._run = None
