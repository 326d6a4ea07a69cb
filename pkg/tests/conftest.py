import pytest

from gadgetry import casestudies


@pytest.fixture(scope="session")
def cycle():
    return casestudies.builtin_reflexive_4cycle()


@pytest.fixture(scope="session")
def norainbow():
    return casestudies.builtin_no_rainbow()


@pytest.fixture(scope="session")
def boolean_eu():
    return casestudies.builtin_boolean_eu()


@pytest.fixture(scope="session")
def N():
    return casestudies.no_rainbow_structure()


@pytest.fixture(scope="session")
def C():
    return casestudies.reflexive_4cycle_structure()
