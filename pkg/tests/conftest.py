import numpy as np
import pytest

from cbelab import registry_case


@pytest.fixture
def rng():
    return np.random.default_rng(987654321)


@pytest.fixture
def ex1():
    return registry_case("ex1")


@pytest.fixture
def ex2():
    return registry_case("ex2")


@pytest.fixture
def ex3():
    return registry_case("ex3")
