"""Factor models for high-dimensional time series with observed regressors.

The model is ``y_t = D z_t + A x_t + e_t``: p observed series driven by m
observed regressors z_t and r latent, serially correlated factors x_t.
The loading space of ``A`` is estimated from lagged autocovariances of the
regression residuals, and the number of factors from ratios of their
eigenvalues.
"""

from .dgp import Dataset, DgpConfig, simulate
from .errors import FactorModelError, InputError, NumericalError
from .factorspace import (
    MStat,
    RatioSelection,
    build_m,
    estimate_loadings,
    fit_factor_model,
    heuristic_c_t,
    lag_autocov,
    recover_factors,
    select_r_ratio,
)
from .metrics import (
    SubspaceDistance,
    coef_error,
    common_component_error,
    space_distance,
    space_distance_mixed,
)
from .montecarlo import CellResult, ExperimentSpec, run_cell, run_table, summarize_boxplot
from .numerics import SymEigen, orthonormalize, solve_gram, sym_eig
from .panel import DgpTruth, FactorFit, Panel, center_rows
from .regress import IvConfig, SieveBasis, eval_g, iv_fit, ols_fit, residuals, sieve_fit

__version__ = "0.1.0"
