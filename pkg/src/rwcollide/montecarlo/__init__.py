"""Seeded continuous-time simulation of three independent walkers."""
from ._accel import USE_NUMBA
from .sim import (
    McEstimate,
    OccupationReport,
    RaceBatch,
    SamplerTables,
    TrajectoryOutcome,
    default_t_max,
    estimate_collision,
    exponential_clock_check,
    moving_target_check,
    occupation_check,
    run_seeds,
    sample_path,
    simulate_race,
    simulate_races,
)

__all__ = [
    "USE_NUMBA",
    "McEstimate",
    "OccupationReport",
    "RaceBatch",
    "SamplerTables",
    "TrajectoryOutcome",
    "default_t_max",
    "estimate_collision",
    "exponential_clock_check",
    "moving_target_check",
    "occupation_check",
    "run_seeds",
    "sample_path",
    "simulate_race",
    "simulate_races",
]
