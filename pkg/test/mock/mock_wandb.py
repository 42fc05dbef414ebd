from typing import Any, Dict, List, Optional
from unittest import mock

# Mock the module
import sys
sys.modules["wandb"] = sys.modules[__name__]

# Objects ------------------------------------------------------------------------------------------

class Table:
    def __init__(self, columns: List[str], data: List[List[Any]]):
        self.columns = columns
        self.data = data


class Artifact:
    def __init__(self, name: str, type: str):
        self.name = name
        self.type = type
        self.dirs: List[str] = []
        self.files: List[str] = []

    def add_dir(self, path: str):
        self.dirs.append(path)

    def add_file(self, path: str):
        self.files.append(path)


class Run:
    def __init__(self, **kwargs):
        self.settings: Dict[str, Any] = kwargs
        self.summary: Dict[str, Any] = {}
        self.log = mock.Mock()
        self.log_artifact = mock.Mock(side_effect=lambda artifact: artifact)
        self.finish = mock.Mock()

# Functions ----------------------------------------------------------------------------------------

class mocking:
    runs: List[Run] = []

    @staticmethod
    def last_run() -> Optional[Run]:
        return mocking.runs[-1] if mocking.runs else None

    @staticmethod
    def reset():
        mocking.runs.clear()
        init.reset_mock()


def _init(**kwargs) -> Run:
    run = Run(**kwargs)
    mocking.runs.append(run)
    return run

init = mock.Mock(side_effect=_init)

class helper:
    @staticmethod
    def parse_config(params, exclude=None, include=None) -> Dict[str, Any]:
        values = dict(vars(params))
        if include is not None:
            values = {k: v for k, v in values.items() if k in include}
        return {k: v for k, v in values.items() if k not in (exclude or ())}
