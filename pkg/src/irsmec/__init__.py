"""Desk-scale simulator and layered optimizer for an IRS-assisted
UAV+BS edge-computing vehicular network."""

__version__ = "0.1.0"

from .config import (ConfigError, RngStream, SimConfig, Task, config_hash,
                     load_config, parse_config_text, sample_task,
                     serialize_config)
from .costmodel import (LOCAL, TARGET_BS, TARGET_UAV, EpisodeMetrics,
                        SlotCosts, accumulate_totals)
from .env import (MecVehicularEnv, StepOutcome, action_dim, compute_reward,
                  decode_action, observation_dim, write_trace)
from .baselines import PolicySpec, VARIANTS

__all__ = [
    "__version__",
    "ConfigError", "RngStream", "SimConfig", "Task", "config_hash",
    "load_config", "parse_config_text", "sample_task", "serialize_config",
    "LOCAL", "TARGET_BS", "TARGET_UAV", "EpisodeMetrics", "SlotCosts",
    "accumulate_totals",
    "MecVehicularEnv", "StepOutcome", "action_dim", "compute_reward",
    "decode_action", "observation_dim", "write_trace",
    "PolicySpec", "VARIANTS",
]
