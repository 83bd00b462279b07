from dataclasses import replace

import pytest

from irsmec import SimConfig


@pytest.fixture
def small_cfg() -> SimConfig:
    """Light scenario for fast unit tests."""
    return replace(
        SimConfig(),
        num_vehicles=3,
        elements_per_irs=4,
        num_slots=5,
        hidden_width=24,
        batch_size=8,
        replay_capacity=256,
        diffusion_steps=4,
        time_embed_dim=8,
        history_len=1,
    )
