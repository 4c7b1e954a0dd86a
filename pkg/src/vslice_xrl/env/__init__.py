"""Road-grid vehicular environment with URLLC/eMBB slice constraints."""
from .channel import channel_gain, delay, embb_penalty, interference_at, throughput, urllc_penalty
from .projection import FeasibleAllocation, InvalidActionError, RelaxedAction, project_action
from .simulator import FleetBatch, StepOutcome, VehicularEnv, build_environment, feature_names

__all__ = [
    "FeasibleAllocation",
    "FleetBatch",
    "InvalidActionError",
    "RelaxedAction",
    "StepOutcome",
    "VehicularEnv",
    "build_environment",
    "channel_gain",
    "delay",
    "embb_penalty",
    "feature_names",
    "interference_at",
    "project_action",
    "throughput",
    "urllc_penalty",
]
