import os

import pytest

from safecut.network import load_network

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def tiny_path():
    return os.path.join(FIXTURES, "tiny.json")


@pytest.fixture
def tiny_net(tiny_path):
    # 2 -> dense(3) -> relu -> dense(2); forward([0.5, -1.0]) == [0.75, 1.5]
    return load_network(tiny_path)
