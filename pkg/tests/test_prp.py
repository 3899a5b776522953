import secrets

import pytest
from hypothesis import given, settings, strategies as st

from cipherstream.algebra import SmallDomainPRP
from cipherstream.errors import DomainError


def test_is_permutation_small_domain():
    prp = SmallDomainPRP(secrets.token_bytes(16), 100)
    image = {prp.encrypt(x) for x in range(100)}
    assert image == set(range(100))


def test_deterministic():
    key = secrets.token_bytes(16)
    a = SmallDomainPRP(key, 1 << 16)
    b = SmallDomainPRP(key, 1 << 16)
    assert [a.encrypt(x) for x in range(50)] == [b.encrypt(x) for x in range(50)]


def test_keys_differ():
    a = SmallDomainPRP(b"k1" * 8, 1 << 16)
    b = SmallDomainPRP(b"k2" * 8, 1 << 16)
    assert any(a.encrypt(x) != b.encrypt(x) for x in range(64))


@settings(max_examples=50, deadline=None)
@given(st.binary(min_size=1, max_size=32), st.integers(2, 1 << 20), st.data())
def test_roundtrip(key, domain, data):
    x = data.draw(st.integers(0, domain - 1))
    prp = SmallDomainPRP(key, domain)
    assert prp.decrypt(prp.encrypt(x)) == x


def test_domain_checks():
    prp = SmallDomainPRP(b"key", 10)
    with pytest.raises(DomainError):
        prp.encrypt(10)
    with pytest.raises(DomainError):
        prp.encrypt(-1)
    with pytest.raises(DomainError):
        SmallDomainPRP(b"key", 1)
