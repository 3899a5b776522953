import secrets

import pytest
from gmpy2 import mpz, powmod

from cipherstream.algebra import curve as C
from cipherstream.algebra.fields import P


def rand_k():
    return secrets.randbelow(int(C.R))


def test_generators_valid():
    assert C.g1_is_on_curve(C.G1_GEN)
    assert C.g2_is_on_curve(C.G2_GEN)
    assert C.g1_mul(C.G1_GEN, C.R) is None
    assert C.g2_mul(C.G2_GEN, C.R) is None


def test_g1_group_law():
    a, b = rand_k(), rand_k()
    pa = C.g1_mul(C.G1_GEN, a)
    pb = C.g1_mul(C.G1_GEN, b)
    assert C.g1_eq(C.g1_add(pa, pb), C.g1_mul(C.G1_GEN, (a + b) % C.R))
    assert C.g1_add(pa, C.g1_neg(pa)) is None
    # doubling branch of the affine add
    assert C.g1_eq(C.g1_add(pa, pa), C.g1_mul(pa, 2))


def test_g2_group_law():
    a, b = rand_k(), rand_k()
    pa = C.g2_mul(C.G2_GEN, a)
    pb = C.g2_mul(C.G2_GEN, b)
    assert C.g2_eq(C.g2_add(pa, pb), C.g2_mul(C.G2_GEN, (a + b) % C.R))
    assert C.g2_add(pa, C.g2_neg(pa)) is None
    assert C.g2_eq(C.g2_add(pa, pa), C.g2_mul(pa, 2))


def test_identity_edges():
    assert C.g1_mul(C.G1_GEN, 0) is None
    assert C.g1_mul(None, 5) is None
    assert C.g1_add(None, None) is None
    assert C.g2_mul(C.G2_GEN, 0) is None


def test_g1_serialization_roundtrip():
    p = C.g1_mul(C.G1_GEN, rand_k())
    data = C.g1_to_bytes(p)
    assert len(data) == 48
    assert C.g1_eq(C.g1_from_bytes(data), p)
    # the two square roots serialize differently
    assert C.g1_to_bytes(p) != C.g1_to_bytes(C.g1_neg(p))
    assert C.g1_eq(C.g1_from_bytes(C.g1_to_bytes(C.g1_neg(p))), C.g1_neg(p))


def test_g2_serialization_roundtrip():
    p = C.g2_mul(C.G2_GEN, rand_k())
    data = C.g2_to_bytes(p)
    assert len(data) == 96
    assert C.g2_eq(C.g2_from_bytes(data), p)
    assert C.g2_eq(C.g2_from_bytes(C.g2_to_bytes(C.g2_neg(p))), C.g2_neg(p))


def test_infinity_serialization():
    assert C.g1_from_bytes(C.g1_to_bytes(None)) is None
    assert C.g2_from_bytes(C.g2_to_bytes(None)) is None


def test_g1_deserialization_rejects():
    with pytest.raises(ValueError):
        C.g1_from_bytes(b"\x00" * 48)  # compression bit missing
    with pytest.raises(ValueError):
        C.g1_from_bytes(b"\x01" * 47)
    # x with no point on the curve
    x = 0
    while powmod((x * x * x + 4) % P, (P - 1) // 2, P) == 1:
        x += 1
    bad = bytearray(int(x).to_bytes(48, "big"))
    bad[0] |= 0x80
    with pytest.raises(ValueError):
        C.g1_from_bytes(bytes(bad))
    # x >= field modulus
    bad = bytearray(int(P).to_bytes(48, "big"))
    bad[0] |= 0x80
    with pytest.raises(ValueError):
        C.g1_from_bytes(bytes(bad))


def test_g2_deserialization_rejects():
    with pytest.raises(ValueError):
        C.g2_from_bytes(b"\x00" * 96)
    bad = bytearray(C.g2_to_bytes(C.G2_GEN))
    bad[48:] = int(P).to_bytes(48, "big")  # x0 out of range
    with pytest.raises(ValueError):
        C.g2_from_bytes(bytes(bad))
