"""Simulation and estimation of a robot fleet that cooperatively carries an object."""
from .models import (
    ControlInput,
    Pose,
    auxiliary_measurement,
    control_towards,
    fleet_auxiliary,
    fleet_motion,
    fleet_positions,
    motion_step,
    position_measurement,
    wrap_angle,
)
from .problem import METHODS, EstimationProblem, build_problem, condition_number, measurement_vector, ridge_baseline
from .world import SimulationRecord, WorldConfig, default_formation, read_record, simulate, validate_config, write_record

__all__ = [
    "METHODS",
    "ControlInput",
    "EstimationProblem",
    "Pose",
    "SimulationRecord",
    "WorldConfig",
    "auxiliary_measurement",
    "build_problem",
    "condition_number",
    "control_towards",
    "default_formation",
    "fleet_auxiliary",
    "fleet_motion",
    "fleet_positions",
    "measurement_vector",
    "motion_step",
    "position_measurement",
    "read_record",
    "ridge_baseline",
    "simulate",
    "validate_config",
    "wrap_angle",
    "write_record",
]
