"""Experiment sweeps, contour fields, summaries and the command line interface."""
from .config import ExperimentConfig, load_configs, pendulum_configs
from .contour import emit_contour_field, emit_contours
from .curves import LearningCurve, aggregate, read_curve, write_curve
from .summarize import curve_metrics, episodes_to_threshold, summarize
from .sweep import load_sweep, run_seed, run_sweep
