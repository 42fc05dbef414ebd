from . import assumptions_test, fsp_test, sensitivity_test, truncation_test
