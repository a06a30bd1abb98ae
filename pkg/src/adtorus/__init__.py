"""Spectral counting for the adiabatic Laplacian of constant-slope torus foliations."""

from .slope import (
    ContinuedFraction,
    InvalidSlopeError,
    NamedIrrational,
    PrecisionExhaustedError,
    Rational,
    Slope,
    SlopeError,
    continued_fraction,
    custom,
    is_rational,
    named,
    parse_slope,
    reduce,
    slope_from_json,
    slope_to_json,
    slope_value,
)
from .spectrum import (
    FOUR_PI_SQ,
    AdiabaticScale,
    EigenvalueRecord,
    EnergyWindow,
    InstanceTooLargeError,
    LatticeCount,
    StripOverflowError,
    TooManyEigenvaluesError,
    count_exact,
    count_naive,
    counting_step_function,
    eigenvalue,
    eigenvalues_below,
)
from .leafwise import (
    CapExceededError,
    DistributionFunction,
    LeafSpectrum,
    SmoothDensity,
    StepFunction,
    df_from_json,
    df_to_json,
    evaluate,
    leafwise_df,
    sqrt_distribution,
)
from .weyl import WeylParams, asymptotic_count, stieltjes_convolve, weyl_coefficient, weyl_estimate
from .heat import (
    DivergenceError,
    HeatTraceResult,
    RationalSlopeError,
    adiabatic_trace_limit,
    heat_trace_image,
    heat_trace_spectral,
    laplace_stieltjes,
)

__version__ = "0.1.0"
