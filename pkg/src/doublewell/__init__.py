"""High-precision spectra of the symmetric quartic double well.

The package carries four largely independent tool sets that check one
another: exact rational perturbation coefficients and their large-order
growth, generalized Borel summation of the resulting divergent series,
the instanton trans-series with its secular-coefficient table derived
from the quantization condition, and two direct eigenvalue solvers used
as ground truth.  ``doublewell.cli`` exposes all of it on the command
line.
"""

from .borel import (
    BorelSumReport,
    BorelTransform,
    LateralSum,
    PadeApproximant,
    borel_sum_report,
    borel_transform,
    lateral_laplace,
    pade_approximant,
    real_borel_sum,
)
from .instanton import (
    DeltaReport,
    EpsilonTable,
    UnsupportedOrderError,
    delta_asymptotic,
    delta_numeric,
    displacement_series,
    instanton_energy,
    instanton_variables,
    separation_series,
)
from .perturbation import (
    RationalSeries,
    bender_wu_coefficients,
    coefficient_decimal,
    load_coefficients,
    save_coefficients,
)
from .quantization import TransSeries, expand_quantization
from .richardson import (
    GrowthReport,
    growth_coefficients,
    predicted_coefficient,
    richardson_extrapolate,
    richardson_geometric,
)
from .spectral import (
    SolverConfig,
    SpectralResult,
    SplittingResult,
    basis_eigenvalue,
    lattice_eigenvalue,
    splitting_and_mean,
    splitting_guard_digits,
)

__all__ = [
    "BorelSumReport",
    "BorelTransform",
    "DeltaReport",
    "EpsilonTable",
    "GrowthReport",
    "LateralSum",
    "PadeApproximant",
    "RationalSeries",
    "SolverConfig",
    "SpectralResult",
    "SplittingResult",
    "TransSeries",
    "UnsupportedOrderError",
    "basis_eigenvalue",
    "bender_wu_coefficients",
    "borel_sum_report",
    "borel_transform",
    "coefficient_decimal",
    "delta_asymptotic",
    "delta_numeric",
    "displacement_series",
    "expand_quantization",
    "growth_coefficients",
    "instanton_energy",
    "instanton_variables",
    "lateral_laplace",
    "lattice_eigenvalue",
    "load_coefficients",
    "pade_approximant",
    "predicted_coefficient",
    "real_borel_sum",
    "richardson_extrapolate",
    "richardson_geometric",
    "save_coefficients",
    "separation_series",
    "splitting_and_mean",
    "splitting_guard_digits",
]
