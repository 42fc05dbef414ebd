from . import cli_test, estimators_test, network_test, observables_test
from .experiment import *
from .io import *
from .oracle import *
from .scripting import *
from .simulation import *
from .utils import *
