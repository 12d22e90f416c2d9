import pytest

from pvaudit import kernels
from pvaudit.dataset import FIXTURES, load_fixture

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture(scope="session")
def fixtures():
    return {label: load_fixture(label) for label in FIXTURES}
