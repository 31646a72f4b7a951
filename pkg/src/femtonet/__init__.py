"""System-level simulator of a macrocell overlaid with open-access femtocells.

Modules
-------
radio        path loss, shadowing and the fractional SINR matrix
association  threshold-adaptive cell association and two baselines
handover     SINR windows, coverage posterior, handover/admission decisions
mobility     random-walk user movement inside the macrocell
metrics      capacity, Jain's index, cross-run confidence intervals
harness      scenario config, simulation loop and sweeps
cli          command-line front end (``python -m femtonet``)
"""

from .association import (
    Assignment,
    Thresholds,
    associate_proposed,
    associate_scheme1,
    associate_scheme2,
    classify,
    grouped_capacity,
)
from .handover import CoverageModel, SinrWindow, calibrate_epsilon, posterior
from .harness import ScenarioConfig, SweepSpec, coverage_model, run_once, run_sweep, seed_stream, station_layout
from .metrics import MetricsRecord, jain_index, summarize_runs, total_capacity, user_capacity
from .radio import RadioGlobals, RadioSnapshot, build_snapshot, dbm_to_watts, path_loss_db

__all__ = [
    "Assignment",
    "Thresholds",
    "associate_proposed",
    "associate_scheme1",
    "associate_scheme2",
    "classify",
    "grouped_capacity",
    "CoverageModel",
    "SinrWindow",
    "calibrate_epsilon",
    "posterior",
    "ScenarioConfig",
    "SweepSpec",
    "coverage_model",
    "run_once",
    "run_sweep",
    "seed_stream",
    "station_layout",
    "MetricsRecord",
    "jain_index",
    "summarize_runs",
    "total_capacity",
    "user_capacity",
    "RadioGlobals",
    "RadioSnapshot",
    "build_snapshot",
    "dbm_to_watts",
    "path_loss_db",
]

__version__ = "0.1.0"
