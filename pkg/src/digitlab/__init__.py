"""digitlab: exact digit-sum statistics and factorial-ratio divisibility scans."""

from .digits import (
    INFINITE,
    digit_at,
    digits,
    factorial_valuation,
    is_prime,
    sum_digits,
    valuation,
)
from .divisibility import (
    DivisibilityReport,
    TrendReport,
    divisibility_by_m,
    scan_divisibility,
    small_valuation_count,
    trend,
)
from .empirical import (
    DigitPairTable,
    EmpiricalSummary,
    Histogram,
    ScanConfig,
    clt_distance,
    digit_pair_scan,
    empirical_moments,
    exact_moments,
    merge,
    scan,
)
from .sequences import (
    LandauVerdict,
    PoleError,
    SequenceSpec,
    SpecParseError,
    SpecValidationError,
    landau_check,
    load_corpus,
    parse,
    render,
    validate,
)
from .theory import (
    CltParams,
    CovariancePrediction,
    LinearValuationMoments,
    clt_params,
    covariance_from_series,
    covariance_matrix,
    fourier_coeff,
    joint_digit_prediction,
    linear_valuation_moments,
)

__version__ = "0.1.0"
