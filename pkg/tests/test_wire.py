"""Frame codec and key bundle round trips, plus role hygiene."""

import pytest

from cipherstream import bundles, wire
from cipherstream.abe import TransformedCiphertext
from cipherstream.algebra import default_context
from cipherstream.errors import BundleError, BundleRoleError, WireFormatError
from cipherstream.operators import (
    AggProfile,
    DataTuple,
    EncProfile,
    OutputItem,
    OutputPart,
    PolicyDecryptor,
    PolicySpec,
    StreamOwner,
    issue_policy,
    make_transformer,
)
from cipherstream.policy import Predicate, StreamSchema


@pytest.fixture(scope="module")
def ctx():
    return default_context()


SCHEMA = StreamSchema.of("price", "qty", width=4, bases=(2, 3), windows=(2, 4), ts_width=6)


# ------------------------------------------------------------ frames

def test_frame_roundtrip_and_concatenation():
    blob = wire.encode_frame(wire.MSG_ACK, wire.encode_ack(3))
    blob += wire.encode_frame(wire.MSG_ERROR, wire.encode_error(wire.ERR_ORDER, "late"))
    blob += wire.encode_frame(wire.MSG_TUPLE, b"\x00" * 17)
    frames = wire.decode_frames(blob)
    assert [t for t, _ in frames] == [wire.MSG_ACK, wire.MSG_ERROR, wire.MSG_TUPLE]
    assert wire.decode_ack(frames[0][1]) == 3
    assert wire.decode_error(frames[1][1]) == (wire.ERR_ORDER, "late")
    assert frames[2][1] == b"\x00" * 17


def test_frame_rejects_unknown_type_and_truncation():
    with pytest.raises(WireFormatError):
        wire.encode_frame(99, b"")
    good = wire.encode_frame(wire.MSG_ACK, wire.encode_ack(0))
    with pytest.raises(WireFormatError):
        wire.decode_frames(good[:-1])
    with pytest.raises(WireFormatError):
        wire.decode_frames(good[:3])
    bad_type = bytes([99]) + good[1:]
    with pytest.raises(WireFormatError):
        wire.decode_frames(bad_type)


def test_register_stream_roundtrip():
    reg = wire.StreamRegistration("quotes", SCHEMA, EncProfile(filter_fields=("price", "ts")))
    back = wire.decode_register_stream(wire.encode_register_stream(reg))
    assert back == reg
    with pytest.raises(WireFormatError):
        wire.decode_register_stream(wire.encode_register_stream(reg) + b"x")


def test_output_item_roundtrip(ctx):
    tct = TransformedCiphertext(ctx.gt_pow(5), ctx.gt_pow(7))
    item = OutputItem(
        "p1",
        "map",
        (12, -3),
        (
            OutputPart("price", tct=tct),
            OutputPart("tuple", tct=tct, blob=b"\x01\x02"),
            OutputPart("note", blob=b""),
        ),
    )
    back = wire.decode_output(wire.encode_output(item))
    assert back.policy_id == "p1" and back.kind == "map" and back.meta == (12, -3)
    assert [p.label for p in back.parts] == ["price", "tuple", "note"]
    assert back.parts[0].tct.u == tct.u and back.parts[0].tct.v == tct.v
    assert back.parts[0].blob is None
    assert back.parts[1].blob == b"\x01\x02"
    assert back.parts[2].tct is None and back.parts[2].blob == b""


def test_output_item_rejects_trailing_bytes(ctx):
    item = OutputItem("p", "filter", (1,), (OutputPart("tuple", blob=b"z"),))
    with pytest.raises(WireFormatError):
        wire.decode_output(wire.encode_output(item) + b"\x00")


# ----------------------------------------------------------- bundles

def _issued(ctx, spec, profile=None):
    profile = profile or EncProfile(filter_fields=("price",))
    owner = StreamOwner(ctx, "s1", SCHEMA, profile)
    return owner, issue_policy("p1", spec, owner)


def test_cloud_and_user_bundle_roundtrip(ctx):
    spec = PolicySpec("filter", predicates=(Predicate("price", "ge", 8),))
    owner, issued = _issued(ctx, spec)
    cloud = bundles.load_cloud_bundle(bundles.write_cloud_bundle(issued.cloud))
    user = bundles.load_user_bundle(bundles.write_user_bundle(issued.user))
    assert cloud.policy_id == user.policy_id == "p1"
    assert cloud.spec == user.spec == spec
    assert cloud.stream_ids == ("s1",)
    assert user.secrets == issued.user.secrets
    assert user.field_widths == issued.user.field_widths

    st = owner.encrypt(DataTuple(0, {"price": 9, "qty": 2}))
    outs = make_transformer(ctx, cloud).feed(st)
    recs = PolicyDecryptor(ctx, user).feed(outs[0])
    assert recs[0].values == {"price": 9, "qty": 2}


def test_agg_bundle_keeps_offset_and_secret(ctx):
    spec = PolicySpec("agg3", agg_field="qty", window=4)
    owner, issued = _issued(ctx, spec, EncProfile(aggregates=(AggProfile("qty", 3),)))
    cloud = bundles.load_cloud_bundle(bundles.write_cloud_bundle(issued.cloud))
    user = bundles.load_user_bundle(bundles.write_user_bundle(issued.user))
    assert cloud.agg_offset == issued.cloud.agg_offset
    assert user.agg_secret == issued.user.agg_secret

    transformer = make_transformer(ctx, cloud)
    decryptor = PolicyDecryptor(ctx, user)
    outs = []
    for ts in range(8):
        for item in transformer.feed(owner.encrypt(DataTuple(ts, {"price": 0, "qty": ts}))):
            outs.extend(decryptor.feed(item))
    assert [(o.window_start, o.window_end, o.total) for o in outs] == [(0, 4, 6), (4, 8, 22)]


def test_relay_loader_rejects_user_bundle(ctx):
    spec = PolicySpec("filter", predicates=(Predicate("price", "ge", 8),))
    _, issued = _issued(ctx, spec)
    blob = bundles.write_user_bundle(issued.user)
    with pytest.raises(BundleRoleError):
        bundles.load_cloud_bundle(blob)


def test_relay_loader_rejects_secret_records_before_role(ctx):
    # a relay-role bundle that smuggles a secret-range record still fails
    spec = PolicySpec("filter", predicates=(Predicate("price", "ge", 8),))
    _, issued = _issued(ctx, spec)
    role, ident, records = bundles.bundle_records(bundles.write_cloud_bundle(issued.cloud))
    records.append((bundles.RT_USER_SECRET, b"\x00" * 34))
    forged = bundles._assemble(role, ident, records)
    with pytest.raises(BundleRoleError, match="decryption material"):
        bundles.load_cloud_bundle(forged)


def test_owner_loader_rejects_other_roles(ctx):
    spec = PolicySpec("filter", predicates=(Predicate("price", "ge", 8),))
    owner, issued = _issued(ctx, spec)
    with pytest.raises(BundleRoleError):
        bundles.load_owner_bundle(ctx, bundles.write_cloud_bundle(issued.cloud))
    with pytest.raises(BundleRoleError):
        bundles.load_user_bundle(bundles.write_owner_bundle(owner))


def test_bundle_rejects_garbage():
    with pytest.raises(BundleError):
        bundles.bundle_records(b"nope")
    with pytest.raises(BundleError):
        bundles.bundle_records(bundles.MAGIC + b"\x01")


def test_owner_restore_keeps_issued_policies_valid(ctx):
    profile = EncProfile(
        filter_fields=("price",),
        join_field="price",
        aggregates=(AggProfile("qty", 1, windows=(2,)),),
    )
    owner = StreamOwner(ctx, "s1", SCHEMA, profile, join_secret=bytes(16))
    filt = issue_policy("pf", PolicySpec("filter", predicates=(Predicate("price", "le", 9),)), owner)
    agg = issue_policy("pa", PolicySpec("agg1", agg_field="qty", window=2), owner)

    restored = bundles.load_owner_bundle(ctx, bundles.write_owner_bundle(owner))
    assert restored.stream_id == "s1"
    assert restored.schema == SCHEMA and restored.profile == profile

    # ciphertexts from the restored owner still answer both policies
    t_filt = make_transformer(ctx, filt.cloud)
    t_agg = make_transformer(ctx, agg.cloud)
    d_filt = PolicyDecryptor(ctx, filt.user)
    d_agg = PolicyDecryptor(ctx, agg.user)
    recs, aggs = [], []
    for ts in range(4):
        st = restored.encrypt(DataTuple(ts, {"price": 5, "qty": ts + 1}))
        for item in t_filt.feed(st):
            recs.extend(d_filt.feed(item))
        for item in t_agg.feed(st):
            aggs.extend(d_agg.feed(item))
    assert [r.ts for r in recs] == [0, 1, 2, 3]
    assert [(a.window_start, a.window_end, a.total) for a in aggs] == [(0, 2, 3), (2, 4, 7)]

    # and policies issued by the restored owner agree with its own output
    refilt = issue_policy("pf2", PolicySpec("filter", predicates=(Predicate("price", "le", 9),)), restored)
    st = restored.encrypt(DataTuple(4, {"price": 3, "qty": 1}))
    out = make_transformer(ctx, refilt.cloud).feed(st)
    assert PolicyDecryptor(ctx, refilt.user).feed(out[0])[0].values == {"price": 3, "qty": 1}
