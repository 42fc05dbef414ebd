from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from ..context import ContextModule
from ...errors import ModelError, UsageError
from ...io.modelfile import load_model, ModelFile, packaged_models, read_model
from ...network import ReactionNetwork
from ...observables import find_observable, Observable
from ...oracle.truncation import Truncation

def _split(value: Optional[str]) -> List[str]:
    return [] if value is None else [v.strip() for v in value.split(",") if v.strip()]


class Model(ContextModule):
    """
    The model file of a command, with parameter overrides and the selected parameters of interest
    and observables.
    """

    NAME = "Model"

    def __init__(self, context):
        super().__init__(context)
        self._model: Optional[ModelFile] = None
        self._c: Optional[np.ndarray] = None

    # Module Interface -----------------------------------------------------------------------------

    @property
    def model(self) -> ModelFile:
        assert self._model is not None, "Model has not been loaded."
        return self._model

    @property
    def network(self) -> ReactionNetwork:
        return self.model.network

    @property
    def c(self) -> np.ndarray:
        assert self._c is not None
        return self._c

    @property
    def x0(self) -> np.ndarray:
        return self.model.initial_state

    @property
    def params(self) -> Tuple[int, ...]:
        """
        The selected parameters of interest; every parameter when none is given.
        """
        names = _split(self.context.config.param)
        try:
            if not names:
                return tuple(range(self.network.num_parameters))
            return tuple(self.network.parameter_index(name) for name in names)
        except ModelError as e:
            raise UsageError(str(e)) from None

    @property
    def observables(self) -> Tuple[Observable, ...]:
        """
        The selected observables; every declared observable when none is given.
        """
        names = _split(self.context.config.observable)
        if not names:
            if not self.model.observables:
                raise UsageError("the model declares no observables")
            return self.model.observables
        try:
            return tuple(find_observable(self.model.observables, name) for name in names)
        except ModelError as e:
            raise UsageError(str(e)) from None

    def truncation(self) -> Truncation:
        return self.model.build_truncation()

    # Module Lifecycle -----------------------------------------------------------------------------

    def _define_arguments(self):
        parser = self.context.argument_parser
        parser.add_argument("model", type=str,
                            help="A model file, or the name of a packaged model "
                                 f"({', '.join(packaged_models())}).")
        group = parser.add_argument_group(title=Model.NAME, description="Model selection.")
        group.add_argument("--param", type=str, default=None,
                           help="Comma separated parameters of interest.")
        group.add_argument("--observable", type=str, default=None,
                           help="Comma separated observable names.")
        group.add_argument("--set", type=str, action="append", default=[], metavar="NAME=VALUE",
                           help="Override a parameter value.")

    def _init(self):
        path = self.context.config.model
        if not Path(path).exists() and path in packaged_models():
            self._model = load_model(path)
        else:
            self._model = read_model(path)
        c = np.array(self.network.nominal_parameters, dtype=np.float64)
        for assignment in self.context.config.set:
            name, _, value = assignment.partition("=")
            try:
                c[self.network.parameter_index(name.strip())] = float(value)
            except ValueError:
                raise UsageError(f"invalid parameter override `{assignment}`") from None
        if (c < 0.0).any():
            raise UsageError("parameter values must be non-negative")
        self._c = c
