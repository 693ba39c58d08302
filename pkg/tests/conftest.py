import pytest

from dtsim.core import SimulationConfig, strategy_from_category
from dtsim.ingest import DatasetSpec, generate

ACCEPTANCE_SEED = 2024
ACCEPTANCE_COUNT = 400_000


@pytest.fixture(scope="session")
def big_stream():
    """The 400k-transaction synthetic stream shared by the heavy criteria."""
    return generate(DatasetSpec(count=ACCEPTANCE_COUNT, rng_seed=ACCEPTANCE_SEED))


@pytest.fixture(scope="session")
def reference_strategy():
    return strategy_from_category(2, a1=25469, a6=110, a7=6.94, a8=1.00)


@pytest.fixture(scope="session")
def default_cfg():
    return SimulationConfig(rng_seed=ACCEPTANCE_SEED)
