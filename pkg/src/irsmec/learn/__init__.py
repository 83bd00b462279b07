from .nets import Adam, Mlp, soft_update, time_embedding
from .diffusion import (DiffusionSchedule, build_schedule, forward_sample,
                        DiffusionPolicy)
from .agent import (DeterministicPolicy, ReplayBuffer, Td3Agent, td_target,
                    TransitionBatch)
from .train import TrainResult, train, evaluate, save_checkpoint, \
    load_checkpoint

__all__ = [
    "Adam", "Mlp", "soft_update", "time_embedding",
    "DiffusionSchedule", "build_schedule", "forward_sample",
    "DiffusionPolicy", "DeterministicPolicy", "ReplayBuffer", "Td3Agent",
    "td_target", "TransitionBatch", "TrainResult", "train", "evaluate",
    "save_checkpoint", "load_checkpoint",
]
