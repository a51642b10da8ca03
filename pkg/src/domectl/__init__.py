"""Fuzzy dome-ventilation control, hourly replay and crowd density-map tools."""

from .config import Config, ControllerConfig, default_engine, load_config
from .density import (
    DensityMap,
    HeadAnnotations,
    KernelParams,
    adaptive_sigma,
    count_from_map,
    evaluate_counts,
    knn_mean_distance,
    render_density_map,
)
from .dome import (
    CrowdEstimate,
    DomeController,
    DomeDecision,
    DomeState,
    WeatherReading,
    apply_decision,
    crowd_ratio,
    decide,
)
from .errors import ConfigError, DataError
from .fuzzy import FuzzyEngine, FuzzyOutcome, membership_at
from .simulate import run_replay

__version__ = "0.1.0"
