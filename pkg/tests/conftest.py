import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from breastrisk.params import load_resources
from breastrisk.rates import RateTable


@pytest.fixture(scope="session")
def resources():
    return load_resources()


@pytest.fixture(scope="session")
def seg_model(resources):
    return resources.seg_model


@pytest.fixture(scope="session")
def zero_mortality():
    return RateTable(bands=((20.0, 85.0, 0.0),), cause_label="other_mortality")
