import pytest

from benchlock.circuits import c17, full_adder, parallel_cones


@pytest.fixture
def c17_netlist():
    return c17()


@pytest.fixture
def adder():
    return full_adder()


@pytest.fixture
def cones8():
    return parallel_cones(8)
