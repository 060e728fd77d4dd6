# tests/conftest.py
import numpy as np
import pytest

from arith_core import enumerate_characters, select_character


@pytest.fixture
def chi4():
    """The non-principal (odd) character mod 4."""
    return select_character(4, 1)


@pytest.fixture
def chi5_even():
    """The even primitive character mod 5 with chi(2) = -1."""
    chi = select_character(5, 2)
    assert chi(2) == pytest.approx(-1)
    return chi


@pytest.fixture
def primitive_up_to():
    def build(N_max):
        return [chi for N in range(1, N_max + 1) for chi in enumerate_characters(N) if chi.is_primitive]
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
