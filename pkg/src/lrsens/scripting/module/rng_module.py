import numpy as np

from ..context import ContextModule
from ...simulation.ssa import RngStream

class Rng(ContextModule):

    NAME = "Random Number Generator"

    @property
    def seed(self) -> int:
        return self.context.config.seed

    def stream(self, index: int = 0) -> RngStream:
        """
        The reproducible stream with the given index under the configured seed.
        """
        return RngStream(self.seed, index)

    def rng(self, index: int = 0) -> np.random.Generator:
        return self.stream(index).generator()

    def _define_arguments(self):
        group = self.context.argument_parser.add_argument_group(
            title=Rng.NAME,
            description="Configuration for the random number generator.")
        group.add_argument("--seed", type=int, default=0, help="The master seed.")
