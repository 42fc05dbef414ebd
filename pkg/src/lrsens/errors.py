from typing import Optional

# Exit Codes ---------------------------------------------------------------------------------------

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_NUMERICAL = 4
EXIT_ACCEPTANCE = 5

# Exceptions ---------------------------------------------------------------------------------------

class LrsensError(Exception):
    exit_code = 1


class UsageError(LrsensError):
    exit_code = EXIT_USAGE


class ModelError(LrsensError, ValueError):
    """
    A model file or network definition is invalid.

    path: The JSON path of the offending entry, e.g. `reactions[2].rate.parameter`.
    line/column: Set for syntax errors in the model file.
    """
    exit_code = EXIT_MODEL

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        self.message = message
        self.path = path
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        location = []
        if self.line is not None:
            location.append(f"line {self.line}")
            if self.column is not None:
                location.append(f"column {self.column}")
        if self.path:
            location.append(f"at {self.path}")
        if location:
            return f"{self.message} ({', '.join(location)})"
        return self.message


class NumericalError(LrsensError):
    exit_code = EXIT_NUMERICAL


class SimulationError(NumericalError):
    """
    A trajectory produced a non-finite intensity or accumulator.
    """
    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} at t={time!r}")


class SingularSystemError(NumericalError):
    pass


class ReducibleError(NumericalError):
    def __init__(self, message: str, components: Optional[list] = None):
        self.components = components or []
        super().__init__(message)


class CenteringError(NumericalError):
    pass


class AcceptanceError(LrsensError):
    exit_code = EXIT_ACCEPTANCE
