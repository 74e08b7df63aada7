"""Data-driven estimation of L2-gain and passivity indices from input-output records."""

from .core import (CONTINUOUS, DISCRETE, EstimateRecord, IndexKind, Method, Sample, Trajectory,
                   concat_realizations, validate_trajectory)
from .estimators import (IndexEstimates, KsCalibration, OnlineEstimator, avg_estimates,
                         bounds_report, calibrate_ks, estimate_series, ffo_estimates,
                         gain_of_squared, mean_estimates, param_free_estimates)
from .ffop import RatioSignal, brute_force_oracle, optimize_pointwise, optimize_with_dead_zones, solve
from .sim import InputSpec, SystemModel, builtin_system, simulate, simulate_discrete

__version__ = "0.1.0"
