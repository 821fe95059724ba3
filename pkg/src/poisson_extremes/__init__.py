"""Order statistics of Poisson-driven geometric functionals.

Simulation of six geometric models (flat proximity, flat intersections,
spherical polytope edges, Gilbert graph edges, point and hyperplane
simplices), their rescaled order statistics, the explicit Weibull-process
limit laws, and the variance / Poisson-approximation machinery used to
verify the convergence numerically.
"""

from .geometry import ConvexBody, Flat, Hyperplane, unit_ball_volume
from .sampling import SeededStream
from .models import ModelSpec, SimulationRun, run_model
from .orderstats import EnumerationStrategy
from .limits import (
    AlphaValue,
    BetaEstimate,
    LimitLaw,
    alpha_t,
    alpha_t_mc,
    beta_numeric,
    intensity_measure,
    limit_params,
    limit_tail,
    r_t_bound,
    rate_bound,
    weibull_order_stats,
    weibull_process_sample,
)
from .chaos import (
    BoundIngredients,
    UStatSpec,
    dtv_bound,
    empirical_u_counts,
    kernel_h_q,
    rho_t,
    sigma_t,
    variance_u,
)
from .stats import (
    EcdfReport,
    IntervalCountReport,
    calibrate_ks_threshold,
    interval_count_test,
    ks_distance,
    ks_distance_censored,
    mc_mean_stderr,
    tv_distance_counts,
)

__version__ = "0.1.0"

__all__ = [
    "ConvexBody",
    "Flat",
    "Hyperplane",
    "unit_ball_volume",
    "SeededStream",
    "ModelSpec",
    "SimulationRun",
    "run_model",
    "EnumerationStrategy",
    "AlphaValue",
    "BetaEstimate",
    "LimitLaw",
    "alpha_t",
    "alpha_t_mc",
    "beta_numeric",
    "intensity_measure",
    "limit_params",
    "limit_tail",
    "r_t_bound",
    "rate_bound",
    "weibull_order_stats",
    "weibull_process_sample",
    "BoundIngredients",
    "UStatSpec",
    "dtv_bound",
    "empirical_u_counts",
    "kernel_h_q",
    "rho_t",
    "sigma_t",
    "variance_u",
    "EcdfReport",
    "IntervalCountReport",
    "calibrate_ks_threshold",
    "interval_count_test",
    "ks_distance",
    "ks_distance_censored",
    "mc_mean_stderr",
    "tv_distance_counts",
    "__version__",
]
