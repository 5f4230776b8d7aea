"""Opportunistic calibration of drifting chemical sensors in mobile networks."""

from .calibration import (
    RECIPROCAL_AGE,
    UNIFORM,
    ConsensusInput,
    WeightScheme,
    consensus_estimate,
    fit_wls,
    rendezvous_update,
    tuple_weight,
)
from .config import ExperimentConfig, load_config
from .environment import PlumeField, concentration, concentration_grid, step_plume
from .errors import ConfigError, InsufficientDataError
from .harness import RunMetrics, run_condition, run_size_sweep, run_weight_comparison
from .mobility import GridBounds, MobilityState, RendezvousGroup, find_rendezvous, init_mobility, step_mobility
from .optimizer import (
    AnnealingSchedule,
    TrainingTrace,
    grid_search_lambda,
    lambda_objective,
    optimize_lambda,
    synthesize_trace,
)
from .sensor import CalibrationTuple, DriftParams, SensorState, invert_response, measure, true_params_at

__version__ = "0.1.0"
