from .assumptions import (
    check_growth,
    check_lyapunov,
    dynkin_martingale,
    GrowthReport,
    LyapunovReport,
    truncation_error_bound
)
from .fsp import (
    assemble,
    build_generator,
    check_irreducible,
    FspSolution,
    IrreducibilityReport,
    solve_poisson,
    stationary_distribution
)
from .sensitivity import (
    asymptotic_covariance,
    AsymptoticCovariance,
    LimitSamples,
    linear_moment_sensitivity,
    linear_moment_steady_state,
    sample_limit_distributions,
    sensitivity_direct,
    sensitivity_fd,
    stationary_expectation
)
from .truncation import box, conservation_laws, conservation_surface, Truncation
