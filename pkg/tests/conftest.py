import numpy as np
import pytest
from hypothesis import strategies as st

from opcap.matcore import RandomSource

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return RandomSource(1234)


def hermitian(d, rng):
    a = rng.ginibre(d, d)
    return (a + a.conj().T) / 2
