import pytest

from netmatch.core import load_instance
from netmatch.fixtures import fixture_path


@pytest.fixture(scope="session")
def fig1():
    return load_instance(fixture_path("fig1"))


@pytest.fixture(scope="session")
def fig2():
    return load_instance(fixture_path("fig2"))


@pytest.fixture(scope="session")
def table4():
    return load_instance(fixture_path("table4"))
