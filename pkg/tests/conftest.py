import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes oracles/log_replay importable

from hubroute.network import generate_network, load_network_file

DATA_DIR = Path(__file__).parent / "data"

# The desk network every simulation-level test runs against: 30 hubs, the
# denser k=5 wiring, generator seed 9.
DESK_NET_ARGS = dict(hub_count=30, seed=9, k_nearest=5)


@pytest.fixture(scope="session")
def five_hub_path() -> Path:
    return DATA_DIR / "five_hub.json"


@pytest.fixture(scope="session")
def five_hub_net(five_hub_path):
    return load_network_file(five_hub_path)


@pytest.fixture(scope="session")
def desk_net():
    return generate_network(
        DESK_NET_ARGS["hub_count"],
        DESK_NET_ARGS["seed"],
        k_nearest=DESK_NET_ARGS["k_nearest"],
    )
