"""Keyed pseudorandom permutation on a small integer domain.

Deterministic encryption of attribute values needs a keyed bijection on
[0, domain).  This is a numeric Feistel network (HMAC-SHA256 round
function) over the smallest even-width power of two covering the
domain, with cycle walking to stay inside it.
"""

import hmac
import struct
from hashlib import sha256

from ..errors import DomainError

ROUNDS = 4


class SmallDomainPRP:
    __slots__ = ("key", "domain", "half_bits", "half_mask")

    def __init__(self, key, domain):
        if domain < 2:
            raise DomainError("PRP domain must have at least two elements")
        self.key = key
        self.domain = domain
        bits = max((domain - 1).bit_length(), 2)
        if bits % 2:
            bits += 1
        self.half_bits = bits // 2
        self.half_mask = (1 << self.half_bits) - 1

    def _round(self, r, x):
        digest = hmac.new(self.key, struct.pack(">BQ", r, x), sha256).digest()
        return int.from_bytes(digest[:8], "big") & self.half_mask

    def _walk(self, x, forward):
        u = x >> self.half_bits
        v = x & self.half_mask
        if forward:
            for r in range(ROUNDS):
                if r % 2 == 0:
                    u = (u + self._round(r, v)) & self.half_mask
                else:
                    v = (v + self._round(r, u)) & self.half_mask
        else:
            for r in reversed(range(ROUNDS)):
                if r % 2 == 0:
                    u = (u - self._round(r, v)) & self.half_mask
                else:
                    v = (v - self._round(r, u)) & self.half_mask
        return (u << self.half_bits) | v

    def _apply(self, x, forward):
        if not 0 <= x < self.domain:
            raise DomainError("value %d outside PRP domain [0, %d)" % (x, self.domain))
        y = self._walk(x, forward)
        while y >= self.domain:
            y = self._walk(y, forward)
        return y

    def encrypt(self, x):
        return self._apply(x, True)

    def decrypt(self, y):
        return self._apply(y, False)
