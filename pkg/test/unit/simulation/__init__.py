from . import ssa_test
