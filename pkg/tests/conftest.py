import pytest

from helpers import build_exposure_fixture


@pytest.fixture(scope="session")
def exposure_fixture():
    """Two-day hand-computed reference case; see helpers.py for the math."""
    return build_exposure_fixture()
