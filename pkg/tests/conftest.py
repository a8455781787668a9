import pytest

from mtjpim.profiles import shipped_profile


@pytest.fixture(scope="session")
def near():
    return shipped_profile("near_term")


@pytest.fixture(scope="session")
def long_term():
    return shipped_profile("long_term")


@pytest.fixture(scope="session", params=["near_term", "long_term"])
def profile(request):
    return shipped_profile(request.param)
