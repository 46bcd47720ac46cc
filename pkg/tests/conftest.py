import pytest

from hbt.terms import NameEnv

from helpers import CORE_CONSTANTS


@pytest.fixture
def env() -> NameEnv:
    return NameEnv(CORE_CONSTANTS)
