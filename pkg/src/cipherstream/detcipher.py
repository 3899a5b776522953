"""Deterministic, proxy-rekeyable encryption for equality matching.

A value m encrypts to g1^(pi(m) * k2) where pi is a keyed permutation of
the value domain (key k1) and k2 a per-stream blinding scalar.  Two
properties drive the join operator:

  * streams sharing (k1, k2) produce equal ciphertexts for equal values,
    so an untrusted matcher can compare without decrypting;
  * a matcher holding the token z = s/k2 can raise ciphertexts from a
    stream with blinding k2 to the common base g1^(pi(m) * s), aligning
    streams that share k1 but have distinct k2.  The token reveals
    nothing about either key.

Decryption unblinds to g1^pi(m), table-dlogs the exponent and inverts
the permutation, so the value domain must stay table-sized.
"""

import secrets

from gmpy2 import invert, mpz

from .algebra import R, SmallDomainPRP, random_scalar
from .errors import DomainError

DEFAULT_DOMAIN = 1 << 16


class DetKey:
    """(k1, k2) pair; k1 may be shared across streams to allow joins."""

    __slots__ = ("k1", "k2", "domain")

    def __init__(self, k1, k2, domain=DEFAULT_DOMAIN):
        self.k1 = k1
        self.k2 = mpz(k2)
        self.domain = domain

    @classmethod
    def generate(cls, k1=None, domain=DEFAULT_DOMAIN):
        if k1 is None:
            k1 = secrets.token_bytes(16)
        k2 = random_scalar()
        while k2 == 0:
            k2 = random_scalar()
        return cls(k1, k2, domain)

    def with_fresh_blinding(self):
        """Same permutation key, new k2: joinable with this key's streams."""
        return DetKey.generate(self.k1, self.domain)

    def to_bytes(self):
        return self.k1 + int(self.k2).to_bytes(32, "little")

    @classmethod
    def from_bytes(cls, data, domain=DEFAULT_DOMAIN):
        if len(data) != 48:
            raise ValueError("det key must be 48 bytes")
        return cls(data[:16], int.from_bytes(data[16:], "little"), domain)


class DetCipher:
    def __init__(self, ctx, key):
        self.ctx = ctx
        self.key = key
        self.prp = SmallDomainPRP(key.k1, key.domain)

    def encrypt(self, m):
        if not 0 <= m < self.key.domain:
            raise DomainError("value %d outside cipher domain" % m)
        return self.ctx.g1_pow(self.prp.encrypt(m) * self.key.k2 % R)

    def decrypt(self, ct):
        unblinded = ct ** invert(self.key.k2, R)
        return self.prp.decrypt(self.ctx.g1_dlog(unblinded, size=self.key.domain))

    def rekey_token(self, s):
        """Token moving this stream's ciphertexts to shared exponent s."""
        return s * invert(self.key.k2, R) % R

    @staticmethod
    def apply_token(ct, z):
        return ct ** z
