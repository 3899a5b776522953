"""Discrete-log lookup tables for small message domains.

Recipients only ever decrypt to a bounded plaintext space (tuple
attribute values, window sums), so the final step of decryption is a
table lookup rather than a generic dlog.  Keys are short blake2b
digests of the serialized group element; build() checks there are no
digest collisions so extract() can trust a hit.
"""

from hashlib import blake2b

from ..errors import DlogRangeError

_DIGEST_SIZE = 12


def _key(data):
    return blake2b(data, digest_size=_DIGEST_SIZE).digest()


class DLogTable:
    """Exponent table for one fixed base.

    mul/to_bytes are the group operation and serializer, identity the
    group's neutral element.  Covers exponents 0 <= x < size; extract()
    raises DlogRangeError on anything outside.
    """

    __slots__ = ("mul", "to_bytes", "base", "size", "_table", "_last")

    def __init__(self, mul, to_bytes, identity, base, size):
        self.mul = mul
        self.to_bytes = to_bytes
        self.base = base
        self.size = 0
        self._table = {}
        self._last = identity
        self.grow(size)

    def grow(self, size):
        """Extend coverage to exponents below size (no-op if smaller)."""
        acc = self._last
        for x in range(self.size, size):
            if x > 0:
                acc = self.mul(acc, self.base)
            k = _key(self.to_bytes(acc))
            if k in self._table and self._table[k] != x:
                raise RuntimeError("dlog table digest collision, widen the digest")
            self._table[k] = x
        if size > self.size:
            self._last = acc
            self.size = size

    def extract(self, elem):
        """Return x with base^x == elem, or raise DlogRangeError."""
        x = self._table.get(_key(self.to_bytes(elem)))
        if x is None:
            raise DlogRangeError(
                "element outside the covered exponent range [0, %d)" % self.size
            )
        return x

    def __contains__(self, elem):
        return _key(self.to_bytes(elem)) in self._table
