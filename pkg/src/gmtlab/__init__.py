"""Covering measures, densities and Heisenberg group geometry."""
from .caratheodory import (
    CoverEstimate,
    CoverStrategy,
    DomainError,
    MeasureLadder,
    SizeFunction,
    approx_measure_ladder,
    ball_candidates,
    verify_cover,
    zeta_delta_exact,
    zeta_delta_upper,
)
from .density import (
    CurveMeasure,
    DensityEstimate,
    SearchBudget,
    WeightedCloud,
    centered_density,
    federer_density,
    quotient,
)
from .experiments import ExperimentConfig, Report, run_all, run_experiment
from .heisenberg import CurveSpec, alpha_beta, cc_distance, koranyi_distance, unit_ball_profile
from .metric import Ball, Cloud, CurveSegment, MetricSpec, ParametricCurve, set_diameter

__version__ = "0.1.0"
