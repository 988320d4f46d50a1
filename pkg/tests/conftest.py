import numpy as np
import pytest

from nestcast.model import build_special_case

BSC_INNER = [["9/10", "1/10"], ["1/10", "9/10"]]
BSC_OUTER = [["4/5", "1/5"], ["1/5", "4/5"]]


def noisy_binary(horizon):
    """Binary pair source over binary symmetric channels (crossover 1/10
    inner, 1/5 outer), uniform prior, frozen pair, terminal Hamming."""
    return build_special_case(
        2, 2, horizon, nx=2, ny=2, nz=2, inner=BSC_INNER, outer=BSC_OUTER
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


@pytest.fixture
def binary_t1():
    return noisy_binary(1)


@pytest.fixture
def binary_t2():
    return noisy_binary(2)
