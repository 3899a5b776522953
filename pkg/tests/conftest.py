import pytest

from cipherstream.algebra import default_context


@pytest.fixture(scope="session")
def ctx():
    return default_context()
