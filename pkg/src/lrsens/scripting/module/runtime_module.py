import logging
import os
from pathlib import Path
from typing import Optional

from ..context import ContextModule
from ...experiment.ensemble import default_workers

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

class Runtime(ContextModule):
    """
    Flags shared by every command: logging, progress output, worker count and output location.
    """

    NAME = "Runtime"

    @property
    def quiet(self) -> bool:
        return self.context.config.quiet

    @property
    def workers(self) -> int:
        workers = self.context.config.workers
        return default_workers() if workers is None else max(1, workers)

    @property
    def out(self) -> Optional[Path]:
        out = self.context.config.out
        return None if out is None else Path(out)

    def _define_arguments(self):
        group = self.context.argument_parser.add_argument_group(
            title=Runtime.NAME,
            description="Logging, parallelism and output.")
        group.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default="INFO")
        group.add_argument("--quiet", action="store_true", help="Disable progress bars.")
        group.add_argument("--workers", type=int, default=None,
                           help="Worker processes (default: $LRSENS_WORKERS or the CPU count).")
        group.add_argument("--out", type=str, default=None,
                           help="Output path; may reference other options, e.g. results/{seed}.")

    def _init(self):
        level = logging.WARNING if self.quiet and self.context.config.log_level == "INFO" \
            else getattr(logging, self.context.config.log_level)
        logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
        logging.getLogger("numba").setLevel(max(level, logging.WARNING))
        if self.out is not None and self.out.suffix == "":
            os.makedirs(self.out, exist_ok=True)
