"""Per-user rate, SE and EE distributions for a two-tier cell-on-edge network."""

__version__ = "0.1.0"

from .config import ScenarioConfig, UserType, ConfigError, load_config
from .analytic import AnalyticCdf, TypeMixture, engine_for, mixture_cdf, percentile
from .evaluation import KpiResult, KsReport, kpis, ks_campaign, optimize_grid
from .simulator import DropSample, empirical_cdf, run_drop, run_drops

__all__ = [
    "ScenarioConfig", "UserType", "ConfigError", "load_config",
    "AnalyticCdf", "TypeMixture", "engine_for", "mixture_cdf", "percentile",
    "KpiResult", "KsReport", "kpis", "ks_campaign", "optimize_grid",
    "DropSample", "empirical_cdf", "run_drop", "run_drops",
    "__version__",
]
