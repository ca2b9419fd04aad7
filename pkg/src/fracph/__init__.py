"""Multivariate fractional phase-type distributions.

Phase-type laws PH(pi, T), their fractional version PH_alpha with
Mittag-Leffler sojourns, and the multivariate reward classes MPH* and
MPH*_alpha: transforms, densities, projections and two exact samplers.
"""

from ._backend import BACKEND
from .constructors import (
    BivariateBlockSpec,
    BivariateMPHAlpha,
    FeedForwardSpec,
    bivariate_cdf,
    bivariate_density,
    build_bivariate,
    build_feed_forward,
    feed_forward_laplace,
)
from .frac_phase import (
    FracPHDist,
    fph_cdf,
    fph_density,
    fph_laplace,
    fph_sample,
    fph_sample_path,
    fph_sample_product,
    fph_transition_matrix,
)
from .modelfile import load_model, parse_model
from .mph import (
    MPHAlphaDist,
    MPHStarDist,
    NoClosedFormError,
    ProjectionResult,
    marginal,
    mph_laplace,
    mph_sample,
    mpha_laplace,
    mpha_sample_path,
    mpha_sample_product,
    power_density,
    power_transform,
    project,
)
from .numerics import (
    GridTooCoarseError,
    MLAccuracyError,
    MLOptions,
    SingularMatrixError,
    caputo_numeric,
    matrix_exp,
    ml_matrix,
    ml_scalar,
)
from .phase_type import PathRecord, PHDist, ValidationError, ph_cdf, ph_density, ph_laplace, ph_sample, ph_sample_path, ph_validate
from .rng import RngStream, sample_ml, sample_positive_stable

__version__ = "0.1.0"
