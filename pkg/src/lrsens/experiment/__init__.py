from .benchmarks import bench_linear, bench_twogene, BENCHMARKS, BenchmarkResult, Check
from .config import CenteringSource, EnsembleConfig, geometric_grid, linear_grid, parse_grid
from .ensemble import default_workers, run_ensemble, WORKERS_ENV
from .report import EnsembleReport, EstimateRow, fit_log_log, SlopeFit, variance_slope
