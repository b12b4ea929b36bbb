"""sheetlimit: double partial-sum processes of m-dependent random fields.

Simulates non-stationary m-dependent random fields, builds their normalized
double partial-sum processes as step functions on [0,1]^2, and verifies the
structural facts behind their convergence to the Brownian sheet: the exact
martingale-component decomposition, moment and maximal inequalities, the
moduli and metrics of the 2-parameter Skorohod space, and Monte Carlo
convergence diagnostics against the Gaussian reference law.
"""

from .fieldgen import (
    FieldSample,
    FieldSpec,
    InnovationSpec,
    MAKernel,
    VarianceProfile,
    apply_ma_kernel,
    gen_innovations,
    generate_field,
    long_run_variance,
    site_variances,
)
from .sumproc import (
    PartialSumField,
    Rect,
    increment,
    partial_sum_process,
    partial_sums,
    running_max,
)
from .dspace import (
    GridFunction,
    TimeChange,
    billingsley_distance_search,
    billingsley_distance_upper,
    continuity_modulus,
    grid_timechanges,
    partition_modulus,
    partition_modulus_search,
    random_timechanges,
    skorohod_distance_search,
    skorohod_distance_upper,
    timechange_norm,
)
from .sheet import FddSpec, sample_fdd, sample_sheet, sheet_cov
from .martdecomp import (
    MartingaleDecomposition,
    decompose,
    martingale_property_check,
    maximal_inequality_check,
    maximal_inequality_constants,
    power_sum_bound_check,
    verify_recovery,
)
from .diagnostics import (
    Estimate,
    MCConfig,
    MCReport,
    cf_weighted_increment_test,
    conditional_variance_check,
    fdd_convergence_test,
    fdd_trend_check,
    increment_square_tail,
    increment_square_tail_curve,
    level_tail_mean,
    m_dependence_check,
    tightness_probe,
    ui_tail,
)
from .kernels import backend_name

__version__ = "0.1.0"

__all__ = [
    "Estimate",
    "FddSpec",
    "FieldSample",
    "FieldSpec",
    "GridFunction",
    "InnovationSpec",
    "MAKernel",
    "MCConfig",
    "MCReport",
    "MartingaleDecomposition",
    "PartialSumField",
    "Rect",
    "TimeChange",
    "VarianceProfile",
    "apply_ma_kernel",
    "backend_name",
    "billingsley_distance_search",
    "billingsley_distance_upper",
    "cf_weighted_increment_test",
    "conditional_variance_check",
    "continuity_modulus",
    "decompose",
    "fdd_convergence_test",
    "fdd_trend_check",
    "gen_innovations",
    "generate_field",
    "grid_timechanges",
    "increment",
    "increment_square_tail",
    "increment_square_tail_curve",
    "level_tail_mean",
    "long_run_variance",
    "m_dependence_check",
    "martingale_property_check",
    "maximal_inequality_check",
    "maximal_inequality_constants",
    "partial_sum_process",
    "partial_sums",
    "partition_modulus",
    "partition_modulus_search",
    "power_sum_bound_check",
    "random_timechanges",
    "running_max",
    "sample_fdd",
    "sample_sheet",
    "sheet_cov",
    "site_variances",
    "skorohod_distance_search",
    "skorohod_distance_upper",
    "tightness_probe",
    "timechange_norm",
    "ui_tail",
    "verify_recovery",
]
