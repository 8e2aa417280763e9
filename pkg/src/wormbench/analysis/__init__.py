from .epidemic import GroundTruthRow, infection_curve, read_ground_truth
from .goodput import FlowRow, goodput_series, mean_goodput, read_flow_log
from .hurst import HurstEstimate, aggregate, default_levels, estimate_hurst
from .powerlaw import PowerLawFit, degree_ccdf, degree_powerlaw_fit, graph_degrees
from .series import AnalysisError, TimeSeries
from .validate import HURST_BAND, MIN_FIT_R2, validate_dataset

__all__ = [
    "AnalysisError",
    "FlowRow",
    "GroundTruthRow",
    "HURST_BAND",
    "HurstEstimate",
    "MIN_FIT_R2",
    "PowerLawFit",
    "TimeSeries",
    "aggregate",
    "default_levels",
    "degree_ccdf",
    "degree_powerlaw_fit",
    "estimate_hurst",
    "goodput_series",
    "graph_degrees",
    "infection_curve",
    "mean_goodput",
    "read_flow_log",
    "read_ground_truth",
    "validate_dataset",
]
