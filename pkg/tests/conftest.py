import numpy as np
import pytest

from dmimp.netcore import FrequencyGrid

F_START, F_STOP, N_POINTS = 150e3, 30e6, 201


def rel_err(got, want):
    got, want = np.asarray(got), np.asarray(want)
    return np.abs(got - want) / np.abs(want)


@pytest.fixture
def sweep():
    return FrequencyGrid.logspace(F_START, F_STOP, N_POINTS)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)
