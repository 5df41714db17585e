import pytest

from gradflow import _kernels


@pytest.fixture
def restore_backend():
    """Undo any set_backend() override after the test."""
    yield
    _kernels.set_backend(None)
