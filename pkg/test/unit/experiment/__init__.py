from . import benchmarks_test, config_test, ensemble_test, report_test
