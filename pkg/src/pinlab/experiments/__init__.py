"""Batch experiments over disorder replicas and parameter grids."""
from .report import ExperimentReport, replica_seed, run_tasks
from .tightness import (TightnessGrid, constrained_tightness_scan, default_delocalized_h,
                        escape_probabilities, last_contact_tail, tightness_scan)
from .theorem2 import Theorem2Plan, rich_subsequence, theorem2_planner
from .log_returns import log_returns_experiment, segment_trajectory
from .decay import DEFAULT_C1, decay_check, decay_probability
from .free_energy import (annealed_free_energy, annealed_log_partitions, free_energy_estimate,
                          homogeneous_free_energy)
from .series import (geometric_envelope, series_event_partials, series_event_report,
                     series_event_sum, series_plateau, series_symmetry)
from ._smoke import SmokeCheckFailed, smoke_check

__all__ = [
    "ExperimentReport", "replica_seed", "run_tasks",
    "TightnessGrid", "tightness_scan", "constrained_tightness_scan", "default_delocalized_h",
    "escape_probabilities", "last_contact_tail",
    "Theorem2Plan", "theorem2_planner", "rich_subsequence",
    "log_returns_experiment", "segment_trajectory",
    "DEFAULT_C1", "decay_check", "decay_probability",
    "homogeneous_free_energy", "annealed_free_energy", "annealed_log_partitions",
    "free_energy_estimate",
    "series_event_partials", "series_event_sum", "series_event_report", "geometric_envelope",
    "series_plateau", "series_symmetry",
    "smoke_check", "SmokeCheckFailed",
]
