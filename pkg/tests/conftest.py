import numpy as np
import pytest

from risopt.channel import rayleigh_channel_set
from risopt.harness import load_config
from risopt.objective import LinkBudget
from risopt.utils.seeding import make_rng


def crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return make_rng(20240601)


@pytest.fixture
def unit_budget():
    return LinkBudget(rho=1.0, noise_power=1.0)


@pytest.fixture
def parallel_channels(rng):
    return rayleigh_channel_set(rng, "parallel", n_tx=6, n_rx=3, n_ris=8, n_panels=2)


@pytest.fixture
def multihop_channels(rng):
    return rayleigh_channel_set(rng, "multihop", n_tx=6, n_rx=3, n_ris=8, n_panels=2)


@pytest.fixture
def desk_config():
    cfg = load_config("desk_parallel")
    return cfg.model_copy(
        update={"trials": 3, "optimizer": cfg.optimizer.model_copy(update={"max_iterations": 25})}
    )
