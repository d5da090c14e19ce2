import os

import pytest
from hypothesis import settings

import paarc

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("dev", max_examples=50, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def data_dir():
    return paarc.data_path("")


@pytest.fixture
def campus_policies():
    return str(paarc.data_path("campus.pol"))


@pytest.fixture
def demo_scenario():
    return str(paarc.data_path("demo_scenario.json"))


@pytest.fixture
def attack_scenario():
    return str(paarc.data_path("attack_scenario.json"))
