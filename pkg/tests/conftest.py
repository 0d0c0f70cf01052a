import random

import pytest

from cyclicsix.alphabet import Semantics
from cyclicsix.rules import default_rules_text, load_rules


@pytest.fixture(scope="session")
def table():
    return load_rules()


@pytest.fixture(scope="session")
def matcher(table):
    return table.matcher(Semantics.INCLUSIVE4)


@pytest.fixture(scope="session")
def rules_text():
    return default_rules_text()


@pytest.fixture
def rng():
    return random.Random(20240601)
