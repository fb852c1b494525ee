"""Thompson and Hilbert geometry of the SPD cone.

Distances, geodesics, and an inductive matrix mean that consume only the
extreme generalized eigenvalues of matrix pencils, so the core
operations stay matrix-free and sparsity-preserving at scale.
"""

from .core import (
    CholeskyFactor,
    DEFAULT_DENSE_CEILING,
    SpdMatrix,
    Spectrum,
    arithmetic_mean,
    cholesky,
    combine,
    make_spd,
    random_sparse_spd,
    random_spd,
    spectrum_dense,
    whiten,
)
from .eigen import (
    EigenOptions,
    EigenStats,
    PencilExtremes,
    SolveInfo,
    extreme_pair,
    lambda_max_pencil,
    lambda_min_pencil,
    pencil_residual,
)
from .geodesics import (
    GeodesicCoefficients,
    coefficient_derivatives,
    diamond_geodesic,
    geodesic_coefficients,
    riemannian_geodesic,
    star_geodesic,
)
from .mean import (
    MeanOptions,
    MeanProblem,
    MeanResult,
    contraction_factor,
    fixed_point_init,
    inductive_mean,
    inductive_step,
    residual,
)
from .metrics import (
    GaugeParameter,
    hilbert_distance,
    phi_distance,
    riemannian_distance,
    thompson_distance,
)
from .mmio import read_matrix, read_spd, write_matrix, write_symmetric
from . import errors

__version__ = "0.1.0"

__all__ = [
    "CholeskyFactor",
    "DEFAULT_DENSE_CEILING",
    "EigenOptions",
    "EigenStats",
    "GaugeParameter",
    "GeodesicCoefficients",
    "MeanOptions",
    "MeanProblem",
    "MeanResult",
    "PencilExtremes",
    "SolveInfo",
    "SpdMatrix",
    "Spectrum",
    "arithmetic_mean",
    "cholesky",
    "coefficient_derivatives",
    "combine",
    "contraction_factor",
    "diamond_geodesic",
    "errors",
    "extreme_pair",
    "fixed_point_init",
    "geodesic_coefficients",
    "hilbert_distance",
    "inductive_mean",
    "inductive_step",
    "lambda_max_pencil",
    "lambda_min_pencil",
    "make_spd",
    "pencil_residual",
    "phi_distance",
    "random_sparse_spd",
    "random_spd",
    "read_matrix",
    "read_spd",
    "residual",
    "riemannian_distance",
    "riemannian_geodesic",
    "spectrum_dense",
    "star_geodesic",
    "thompson_distance",
    "whiten",
    "write_matrix",
    "write_symmetric",
]
