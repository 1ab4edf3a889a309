"""Diversity-driven open-loop hyperparameter sampling.

Configuration sequences are drawn from a k-determinantal point process over
the encoded search space, so any prefix of a run spreads out instead of
clumping the way independent uniform draws do.  The package also ships the
classical low-discrepancy baselines (grid, Sobol), coverage metrics
(dispersion, star discrepancy) with exact low-dimensional evaluators, and a
benchmark harness that compares samplers on spread, boundary reach, and a
synthetic tuning task.
"""

from .errors import (
    DegeneratePoolError,
    DegenerateSetError,
    SpaceError,
    SpaceSemanticError,
    SpaceSyntaxError,
    UnsupportedSpaceError,
)
from .harness import (
    OBJECTIVES,
    SAMPLER_TAGS,
    BenchmarkConfig,
    TrialResult,
    aggregate,
    emit,
    make_objective,
    run_distance_benchmark,
    run_spread_benchmark,
    run_synthetic_optimization,
    synthetic_space,
    unit_cube,
)
from .kernel import (
    KernelConfig,
    PrincipalMinor,
    build_L,
    default_sigma,
    logdet,
    posterior_variance,
    rbf,
)
from .metrics import (
    MetricReport,
    PointSet,
    dispersion,
    dispersion_lower_bound,
    distance_to_center,
    distance_to_origin,
    distance_to_point,
    metric_report,
    optimization_error_certificate,
    star_discrepancy,
)
from .samplers import (
    McmcSettings,
    SampleSet,
    default_mcmc_steps,
    empty_sample,
    extend_sample,
    grid_sample,
    kdpp_mcmc_discrete,
    kdpp_mcmc_mixed,
    kdpp_sequential,
    sobol_sample,
    uniform_sample,
)
from .searchspace import (
    Configuration,
    Dimension,
    SearchSpace,
    encode,
    parse_space,
    quality,
    sample_uniform,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkConfig",
    "Configuration",
    "DegeneratePoolError",
    "DegenerateSetError",
    "Dimension",
    "KernelConfig",
    "McmcSettings",
    "MetricReport",
    "OBJECTIVES",
    "PointSet",
    "PrincipalMinor",
    "SAMPLER_TAGS",
    "SampleSet",
    "SearchSpace",
    "SpaceError",
    "SpaceSemanticError",
    "SpaceSyntaxError",
    "TrialResult",
    "UnsupportedSpaceError",
    "__version__",
    "aggregate",
    "build_L",
    "default_mcmc_steps",
    "default_sigma",
    "dispersion",
    "dispersion_lower_bound",
    "distance_to_center",
    "distance_to_origin",
    "distance_to_point",
    "emit",
    "empty_sample",
    "encode",
    "extend_sample",
    "grid_sample",
    "kdpp_mcmc_discrete",
    "kdpp_mcmc_mixed",
    "kdpp_sequential",
    "make_objective",
    "metric_report",
    "optimization_error_certificate",
    "parse_space",
    "quality",
    "posterior_variance",
    "rbf",
    "run_distance_benchmark",
    "run_spread_benchmark",
    "run_synthetic_optimization",
    "sample_uniform",
    "sobol_sample",
    "star_discrepancy",
    "synthetic_space",
    "uniform_sample",
    "unit_cube",
]
