import pytest

from cipherstream.algebra import (
    R,
    G1Element,
    GTElement,
    counters,
    random_scalar,
    scalar_from_bytes,
    scalar_to_bytes,
)
from cipherstream.algebra.dlog import DLogTable
from cipherstream.algebra.fixedbase import FixedBase
from cipherstream.errors import DlogRangeError


def test_comb_matches_plain(ctx):
    for k in (0, 1, 2, int(R) - 1, int(random_scalar())):
        assert ctx.g1_pow(k) == ctx.g1 ** k
        assert ctx.g2_pow(k) == ctx.g2 ** k
        assert ctx.gt_pow(k) == ctx.gT ** k


def test_pow_cached(ctx):
    base = ctx.g1_pow(random_scalar())
    k = random_scalar()
    assert ctx.pow_cached(base, k) == base ** k
    gt = ctx.gt_pow(random_scalar())
    assert ctx.pow_cached(gt, k) == gt ** k


def test_wrapper_algebra(ctx):
    a, b = random_scalar(), random_scalar()
    assert ctx.g1_pow(a) * ctx.g1_pow(b) == ctx.g1_pow((a + b) % R)
    x = ctx.gt_pow(a)
    assert (x * x.inverse()).is_identity
    assert x / x == x * x.inverse()
    assert (ctx.g1_pow(a) / ctx.g1_pow(a)).is_identity


def test_pair_bilinear(ctx):
    a, b = random_scalar(), random_scalar()
    assert ctx.pair(ctx.g1_pow(a), ctx.g2_pow(b)) == ctx.gt_pow(a * b % R)


def test_prepared_pair(ctx):
    a = random_scalar()
    q = ctx.g2_pow(random_scalar())
    prep = ctx.prepare(q)
    assert ctx.pair(ctx.g1_pow(a), prep) == ctx.pair(ctx.g1_pow(a), q)


def test_pair_product_telescopes(ctx):
    p = ctx.g1_pow(random_scalar())
    q = ctx.g2_pow(random_scalar())
    out = ctx.pair_product([(p, q), (p.inverse(), ctx.prepare(q))])
    assert out.is_identity


def test_dlog_tables(ctx):
    assert ctx.g1_dlog(ctx.g1_pow(777)) == 777
    assert ctx.gt_dlog(ctx.gt_pow(0)) == 0
    with pytest.raises(DlogRangeError):
        ctx.g1_dlog(ctx.g1_pow(1 << 17))


def test_dlog_grow():
    table = DLogTable(lambda a, b: a + b, lambda x: x.to_bytes(8, "big"), 0, 3, 10)
    assert table.extract(27) == 9
    table.grow(20)
    assert table.extract(3 * 15) == 15
    with pytest.raises(DlogRangeError):
        table.extract(3 * 25)


def test_fixedbase_generic():
    fb = FixedBase(lambda a, b: (a + b) % 1009, 0, 5, width=4, bits=16)
    for k in (0, 1, 7, 255, 65535):
        assert fb.exp(k) == 5 * k % 1009
    with pytest.raises(ValueError):
        fb.exp(1 << 16)


def test_scalar_serialization():
    k = random_scalar()
    assert scalar_from_bytes(scalar_to_bytes(k)) == k
    with pytest.raises(ValueError):
        scalar_from_bytes(b"\x00" * 31)
    with pytest.raises(ValueError):
        scalar_from_bytes(int(R).to_bytes(32, "little"))


def test_element_serialization(ctx):
    p = ctx.g1_pow(random_scalar())
    assert G1Element.from_bytes(p.to_bytes()) == p
    x = ctx.gt_pow(random_scalar())
    assert GTElement.from_bytes(x.to_bytes()) == x


def test_counters_track(ctx):
    out = {}
    with counters.track(out):
        ctx.pair(ctx.g1_pow(2), ctx.g2)
    assert out["pairing"] == 1
    assert out["exp_g1"] == 1
    assert out["exp_g2"] == 0
