import pytest

from cipherstream.algebra import random_scalar
from cipherstream.detcipher import DetCipher, DetKey
from cipherstream.errors import DomainError


@pytest.fixture(scope="module")
def key():
    return DetKey.generate(domain=1 << 12)


def test_roundtrip(ctx, key):
    cipher = DetCipher(ctx, key)
    for m in (0, 1, 777, (1 << 12) - 1):
        assert cipher.decrypt(cipher.encrypt(m)) == m


def test_deterministic_and_injective(ctx, key):
    cipher = DetCipher(ctx, key)
    assert cipher.encrypt(42) == cipher.encrypt(42)
    assert cipher.encrypt(42) != cipher.encrypt(43)


def test_domain_check(ctx, key):
    cipher = DetCipher(ctx, key)
    with pytest.raises(DomainError):
        cipher.encrypt(1 << 12)


def test_rekey_alignment(ctx):
    # two streams, same permutation key, different blinding
    ka = DetKey.generate(domain=1 << 10)
    kb = ka.with_fresh_blinding()
    assert ka.k2 != kb.k2
    a = DetCipher(ctx, ka)
    b = DetCipher(ctx, kb)
    m = 321
    assert a.encrypt(m) != b.encrypt(m)

    s = random_scalar()
    za, zb = a.rekey_token(s), b.rekey_token(s)
    aligned_a = DetCipher.apply_token(a.encrypt(m), za)
    aligned_b = DetCipher.apply_token(b.encrypt(m), zb)
    assert aligned_a == aligned_b
    assert aligned_a != DetCipher.apply_token(b.encrypt(m + 1), zb)


def test_unrelated_permutation_keys_do_not_match(ctx):
    ka = DetKey.generate(domain=1 << 10)
    kb = DetKey.generate(domain=1 << 10)
    s = random_scalar()
    a = DetCipher(ctx, ka)
    b = DetCipher(ctx, kb)
    aligned_a = DetCipher.apply_token(a.encrypt(5), a.rekey_token(s))
    aligned_b = DetCipher.apply_token(b.encrypt(5), b.rekey_token(s))
    assert aligned_a != aligned_b


def test_key_serialization():
    k = DetKey.generate()
    back = DetKey.from_bytes(k.to_bytes())
    assert back.k1 == k.k1 and back.k2 == k.k2
    with pytest.raises(ValueError):
        DetKey.from_bytes(b"short")
