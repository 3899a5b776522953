"""Pairing context and group element wrappers.

Everything above this layer speaks multiplicative notation: `a * b` is
the group operation, `a ** k` scalar exponentiation, GT division is
multiplication by the inverse.  The context owns the generators, the
fixed-base precomputation caches, and the dlog tables, and funnels all
exponentiations and pairings through the operation counters.

GT elements are assumed to sit in the order-R cyclotomic subgroup
(everything produced by pair()/gt exponentiation does); deserialized
elements are range-checked but not subgroup-checked, a garbage element
decrypts to garbage, never to a valid plaintext.
"""

from gmpy2 import mpz

from . import counters
from .curve import (
    R,
    G1_GEN,
    G2_GEN,
    g1_add,
    g1_neg,
    g1_mul,
    g1_eq,
    g1_to_bytes,
    g1_from_bytes,
    g2_add,
    g2_neg,
    g2_mul,
    g2_eq,
    g2_to_bytes,
    g2_from_bytes,
)
from .fields import (
    FP12_ONE,
    fp12_mul,
    fp12_inv,
    fp12_eq,
    cyc_exp,
    fp12_to_bytes,
    fp12_from_bytes,
)
from .pairing import pairing, pairing_product, compute_lines
from .fixedbase import FixedBase
from .dlog import DLogTable
from .lagrange import random_scalar

__all__ = [
    "R",
    "G1Element",
    "G2Element",
    "GTElement",
    "PreparedG2",
    "BilinearContext",
    "default_context",
    "scalar_to_bytes",
    "scalar_from_bytes",
]


def scalar_to_bytes(k):
    return int(k % R).to_bytes(32, "little")


def scalar_from_bytes(data):
    if len(data) != 32:
        raise ValueError("scalar must be 32 bytes")
    k = int.from_bytes(data, "little")
    if k >= R:
        raise ValueError("scalar out of range")
    return mpz(k)


class G1Element:
    __slots__ = ("pt", "_b")

    def __init__(self, pt):
        self.pt = pt
        self._b = None

    def __mul__(self, other):
        return G1Element(g1_add(self.pt, other.pt))

    def __pow__(self, k):
        counters.bump("exp_g1")
        return G1Element(g1_mul(self.pt, mpz(k) % R))

    def inverse(self):
        return G1Element(g1_neg(self.pt))

    def __truediv__(self, other):
        return G1Element(g1_add(self.pt, g1_neg(other.pt)))

    def __eq__(self, other):
        return isinstance(other, G1Element) and g1_eq(self.pt, other.pt)

    def __hash__(self):
        return hash(self.to_bytes())

    @property
    def is_identity(self):
        return self.pt is None

    def to_bytes(self):
        if self._b is None:
            self._b = g1_to_bytes(self.pt)
        return self._b

    @classmethod
    def from_bytes(cls, data):
        return cls(g1_from_bytes(data))

    def __repr__(self):
        return "G1(%s)" % self.to_bytes()[:8].hex()


class G2Element:
    __slots__ = ("pt", "_b")

    def __init__(self, pt):
        self.pt = pt
        self._b = None

    def __mul__(self, other):
        return G2Element(g2_add(self.pt, other.pt))

    def __pow__(self, k):
        counters.bump("exp_g2")
        return G2Element(g2_mul(self.pt, mpz(k) % R))

    def inverse(self):
        return G2Element(g2_neg(self.pt))

    def __truediv__(self, other):
        return G2Element(g2_add(self.pt, g2_neg(other.pt)))

    def __eq__(self, other):
        return isinstance(other, G2Element) and g2_eq(self.pt, other.pt)

    def __hash__(self):
        return hash(self.to_bytes())

    @property
    def is_identity(self):
        return self.pt is None

    def to_bytes(self):
        if self._b is None:
            self._b = g2_to_bytes(self.pt)
        return self._b

    @classmethod
    def from_bytes(cls, data):
        return cls(g2_from_bytes(data))

    def __repr__(self):
        return "G2(%s)" % self.to_bytes()[:8].hex()


class GTElement:
    __slots__ = ("v", "_b")

    def __init__(self, v):
        self.v = v
        self._b = None

    def __mul__(self, other):
        return GTElement(fp12_mul(self.v, other.v))

    def __pow__(self, k):
        counters.bump("exp_gt")
        return GTElement(cyc_exp(self.v, mpz(k) % R))

    def inverse(self):
        return GTElement(fp12_inv(self.v))

    def __truediv__(self, other):
        return GTElement(fp12_mul(self.v, fp12_inv(other.v)))

    def __eq__(self, other):
        return isinstance(other, GTElement) and fp12_eq(self.v, other.v)

    def __hash__(self):
        return hash(self.to_bytes())

    @property
    def is_identity(self):
        return fp12_eq(self.v, FP12_ONE)

    def to_bytes(self):
        if self._b is None:
            self._b = fp12_to_bytes(self.v)
        return self._b

    @classmethod
    def from_bytes(cls, data):
        return cls(fp12_from_bytes(data))

    def __repr__(self):
        return "GT(%s)" % self.to_bytes()[:8].hex()


GT_ONE = GTElement(FP12_ONE)


class PreparedG2:
    """A G2 point with its Miller-loop line functions precomputed."""

    __slots__ = ("point", "lines")

    def __init__(self, point):
        self.point = point
        self.lines = compute_lines(point.pt) if point.pt is not None else None


class BilinearContext:
    """Shared curve state: generators, comb caches, dlog tables."""

    # combs for arbitrary hot bases are shallower than the generator combs,
    # they pay for themselves after a handful of exponentiations
    CACHED_COMB_WIDTH = 4
    COMB_CACHE_CAP = 256

    def __init__(self):
        self.g1 = G1Element(G1_GEN)
        self.g2 = G2Element(G2_GEN)
        self.gT = GTElement(pairing(G1_GEN, G2_GEN))
        self._g1_comb = None
        self._g2_comb = None
        self._gt_comb = None
        self._combs = {}
        self._dlog_tables = {}

    # -------------------------------------------------- exponentiation

    def g1_pow(self, k):
        if self._g1_comb is None:
            self._g1_comb = FixedBase(g1_add, None, G1_GEN, width=8)
        counters.bump("exp_g1")
        return G1Element(self._g1_comb.exp(mpz(k) % R))

    def g2_pow(self, k):
        if self._g2_comb is None:
            self._g2_comb = FixedBase(g2_add, None, G2_GEN, width=8)
        counters.bump("exp_g2")
        return G2Element(self._g2_comb.exp(mpz(k) % R))

    def gt_pow(self, k):
        if self._gt_comb is None:
            self._gt_comb = FixedBase(fp12_mul, FP12_ONE, self.gT.v, width=7)
        counters.bump("exp_gt")
        return GTElement(self._gt_comb.exp(mpz(k) % R))

    def pow_cached(self, elem, k):
        """Exponentiation with a per-base comb, for bases reused many times."""
        key = (type(elem).__name__, elem.to_bytes())
        comb = self._combs.get(key)
        if comb is None:
            if len(self._combs) >= self.COMB_CACHE_CAP:
                self._combs.pop(next(iter(self._combs)))
            if isinstance(elem, G1Element):
                comb = FixedBase(g1_add, None, elem.pt, width=self.CACHED_COMB_WIDTH)
            elif isinstance(elem, G2Element):
                comb = FixedBase(g2_add, None, elem.pt, width=self.CACHED_COMB_WIDTH)
            else:
                comb = FixedBase(fp12_mul, FP12_ONE, elem.v, width=self.CACHED_COMB_WIDTH)
            self._combs[key] = comb
        counters.bump(
            "exp_g1" if isinstance(elem, G1Element)
            else "exp_g2" if isinstance(elem, G2Element)
            else "exp_gt"
        )
        out = comb.exp(mpz(k) % R)
        if isinstance(elem, G1Element):
            return G1Element(out)
        if isinstance(elem, G2Element):
            return G2Element(out)
        return GTElement(out)

    # -------------------------------------------------- pairings

    def prepare(self, g2elem):
        return PreparedG2(g2elem)

    def pair(self, a, b):
        counters.bump("pairing")
        if isinstance(b, PreparedG2):
            if a.pt is None or b.lines is None:
                return GT_ONE
            return GTElement(pairing_product([(a.pt, b.lines)]))
        return GTElement(pairing(a.pt, b.pt))

    def pair_product(self, pairs):
        """prod e(a_i, b_i) with one shared final exponentiation."""
        raw = []
        for a, b in pairs:
            counters.bump("pairing")
            if a.pt is None:
                continue
            if isinstance(b, PreparedG2):
                if b.lines is None:
                    continue
                raw.append((a.pt, b.lines))
            else:
                if b.pt is None:
                    continue
                raw.append((a.pt, b.pt))
        if not raw:
            return GT_ONE
        return GTElement(pairing_product(raw))

    # -------------------------------------------------- dlog

    def _dlog(self, base, size, mul, to_bytes, identity):
        key = base.to_bytes()
        table = self._dlog_tables.get(key)
        if table is None:
            table = DLogTable(mul, to_bytes, identity, self._raw(base), size)
            self._dlog_tables[key] = table
        elif table.size < size:
            table.grow(size)
        return table

    @staticmethod
    def _raw(elem):
        return elem.v if isinstance(elem, GTElement) else elem.pt

    def g1_dlog(self, elem, base=None, size=1 << 16):
        """x with base^x == elem, base defaults to the G1 generator."""
        base = base if base is not None else self.g1
        table = self._dlog(base, size, g1_add, g1_to_bytes, None)
        return table.extract(elem.pt)

    def gt_dlog(self, elem, base=None, size=1 << 16):
        base = base if base is not None else self.gT
        table = self._dlog(base, size, fp12_mul, fp12_to_bytes, FP12_ONE)
        return table.extract(elem.v)

    # -------------------------------------------------- misc

    @staticmethod
    def random_scalar():
        return random_scalar()


_DEFAULT = None


def default_context():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = BilinearContext()
    return _DEFAULT
