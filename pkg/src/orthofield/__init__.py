"""Spectral and likelihood diagnostics for isotropic exponential Gaussian fields.

Set ``ORTHOFIELD_BACKEND=numpy`` before import to bypass the numba kernels.
"""

from ._accel import BACKEND
from .config import ExperimentConfig, load_config
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateCoordinateError,
    DesignSizeError,
    DomainError,
    EmptyDomainError,
    IndefiniteMatrixError,
    NumericalError,
    OrthofieldError,
    UnsupportedDimensionError,
)
from .experiments import (
    RunSummary,
    recompute_flags,
    run,
    run_bounded_contrast,
    run_consistency,
    run_orthogonality,
    run_validation_suites,
)
from .gaussml import (
    Box,
    GaussianDesign,
    MlFit,
    RatioTrace,
    build_design,
    likelihood_ratio_trace,
    log_concavity_probe,
    log_likelihood,
    ml_estimate,
    prefix_log_likelihoods,
    simulate_field,
)
from .kernels import CovarianceModel, RadialSpectralDensity, Theta, kernel_eval, radial_measure_cdf, spectral_eval
from .sampling import BrownianPath, PointSet, RadiiSet, make_bounded_cloud, make_grid, radii_coverage, sample_brownian
from .specfun import (
    BesselOrder,
    HarmonicIndex,
    bessel_j,
    harmonic_count,
    spherical_harmonic,
    sqrtz_bessel_bounded,
)
from .spectral import (
    ExpansionConfig,
    HankelPlan,
    RatioIntegralReport,
    delta_square_mass,
    equivalence_ratio_integral,
    hankel_1d,
    hankel_2d,
    isotropic_expansion,
    sphere_project_delta,
)

__version__ = "0.1.0"
