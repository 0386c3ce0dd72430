"""Locally stationary vector autoregressions.

Kernel-based estimation of VAR models whose intercept, lag coefficients and
innovation covariance drift smoothly over the sample, with time-varying
structural impulse responses (short-run or long-run identification),
data-driven lag and bandwidth selection, and a simulation-assisted test of
parameter constancy.
"""

from .errors import (
    DataError,
    DegenerateWindowError,
    DomainError,
    NotPositiveDefiniteError,
    NumericalError,
    ParseError,
    SingularDesignError,
    SingularLongRunMatrixError,
    SingularWeightError,
    TooShortError,
    TvVarError,
    UnstableDgpError,
)
from .kernels import EPANECHNIKOV, KernelSpec, cb_constant, kernel_moment, local_linear_weights
from .estimation import (
    ObservedPanel,
    TvVarFit,
    VhatPath,
    fit_coefficients,
    fit_covariance,
    fit_sigma,
    fit_tvvar,
    fit_vhat,
    pointwise_ci,
)
from .irf import (
    IrfSet,
    build_companion,
    cumulative_irf,
    identify_long_run,
    identify_short_run,
    structural_irf,
    vma_coefficients,
)
from .selection import (
    BandwidthSearch,
    LagSelection,
    cv_bandwidth,
    default_h_grid,
    penalty_chi,
    select_lag,
)
from .stability import (
    RestrictionSpec,
    StabilityTestReport,
    bootstrap_test,
    restriction,
    standardize_q,
)
from .simulation import (
    DgpSpec,
    McResult,
    eq_local_deviation,
    eq_smooth_var2,
    run_table1,
    run_table2,
    run_table3,
    simulate_panel,
)
from .diagnostics import bg_lm_test, standardized_innovations
from .data import config_hash, dump_json, fit_grid_frame, irf_frame, load_csv

__version__ = "0.1.0"

__all__ = [
    "BandwidthSearch",
    "DataError",
    "DegenerateWindowError",
    "DgpSpec",
    "DomainError",
    "EPANECHNIKOV",
    "IrfSet",
    "KernelSpec",
    "LagSelection",
    "McResult",
    "NotPositiveDefiniteError",
    "NumericalError",
    "ObservedPanel",
    "ParseError",
    "RestrictionSpec",
    "SingularDesignError",
    "SingularLongRunMatrixError",
    "SingularWeightError",
    "StabilityTestReport",
    "TooShortError",
    "TvVarError",
    "TvVarFit",
    "UnstableDgpError",
    "VhatPath",
    "bg_lm_test",
    "bootstrap_test",
    "build_companion",
    "cb_constant",
    "config_hash",
    "cumulative_irf",
    "cv_bandwidth",
    "default_h_grid",
    "dump_json",
    "eq_local_deviation",
    "eq_smooth_var2",
    "fit_coefficients",
    "fit_covariance",
    "fit_grid_frame",
    "fit_sigma",
    "fit_tvvar",
    "fit_vhat",
    "identify_long_run",
    "identify_short_run",
    "irf_frame",
    "kernel_moment",
    "load_csv",
    "local_linear_weights",
    "penalty_chi",
    "pointwise_ci",
    "restriction",
    "run_table1",
    "run_table2",
    "run_table3",
    "select_lag",
    "simulate_panel",
    "standardize_q",
    "standardized_innovations",
    "structural_irf",
    "vma_coefficients",
]
