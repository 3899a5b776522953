"""Relay service end to end: HTTP frame routes over the worker engine."""

import dataclasses

import pytest
from fastapi.testclient import TestClient

from cipherstream.algebra import default_context
from cipherstream.bundles import write_cloud_bundle, write_user_bundle
from cipherstream.client import RelayClient
from cipherstream.engine import MultiEngine
from cipherstream.errors import RelayError
from cipherstream.operators import PolicyDecryptor
from cipherstream.policy import universe_for
from cipherstream import wire

from scenario import build_scenario


@pytest.fixture(scope="module")
def ctx():
    return default_context()


@pytest.fixture(scope="module")
def relay_run(ctx):
    """Run the full two-stream scenario through the HTTP service once."""
    from cipherstream.service import create_app

    scenario = build_scenario(ctx)
    engine = MultiEngine(workers=2, ctx=ctx)
    app = create_app(engine)
    client = RelayClient("http://testserver", client=TestClient(app))
    try:
        for reg in scenario.registrations:
            client.register_stream(reg)
        for issued in scenario.issued.values():
            client.register_policy(write_cloud_bundle(issued.cloud))

        universes = {
            reg.stream_id: universe_for(reg.schema) for reg in scenario.registrations
        }
        acked = 0
        for sid, tup in scenario.schedule:
            st = scenario.owners[sid].encrypt(tup)
            acked += client.send_tuple(st.to_bytes(universes[sid]))

        decrypted = {}
        raw_items = {}
        for pid, issued in scenario.issued.items():
            items = client.fetch_outputs(pid)
            raw_items[pid] = items
            decryptor = PolicyDecryptor(ctx, issued.user)
            decrypted[pid] = [rec for item in items for rec in decryptor.feed(item)]
        yield scenario, client, decrypted, raw_items, acked
    finally:
        engine.close()


def test_every_policy_matches_the_reference(relay_run):
    scenario, _, decrypted, _, _ = relay_run
    for pid, want in scenario.expected.items():
        assert decrypted[pid] == want, f"policy {pid} diverged"
        assert want, f"scenario produced no outputs for {pid}"


def test_acks_count_the_outputs(relay_run):
    scenario, _, _, raw_items, acked = relay_run
    assert acked == sum(len(items) for items in raw_items.values())


def test_outputs_monotone_in_source_ts(relay_run):
    _, _, _, raw_items, _ = relay_run
    for pid, items in raw_items.items():
        stamps = [item.meta[0] for item in items]
        assert stamps == sorted(stamps), f"policy {pid} outputs out of order"


def test_outputs_delivered_at_most_once(relay_run):
    scenario, client, _, raw_items, _ = relay_run
    for pid in scenario.issued:
        assert client.fetch_outputs(pid) == []


def test_introspection_endpoints(relay_run):
    scenario, client, _, _, _ = relay_run
    streams = {s["stream_id"]: s for s in client.streams()}
    assert set(streams) == {reg.stream_id for reg in scenario.registrations}
    assert streams["A"]["fields"] == {"price": 4, "qty": 4}
    policies = {p["policy_id"] for p in client.policies()}
    assert policies == set(scenario.issued)


def test_relay_error_paths(relay_run):
    scenario, client, _, _, _ = relay_run
    # duplicate policy id
    some = next(iter(scenario.issued.values()))
    with pytest.raises(RelayError) as err:
        client.register_policy(write_cloud_bundle(some.cloud))
    assert err.value.code == wire.ERR_DUPLICATE
    # user bundle into the relay
    with pytest.raises(RelayError) as err:
        client.register_policy(write_user_bundle(some.user))
    assert err.value.code == wire.ERR_BUNDLE
    # idempotent stream re-registration is accepted
    client.register_stream(scenario.registrations[0])
    # same stream id with a different schema is not
    other = dataclasses.replace(scenario.registrations[3], stream_id="A")
    with pytest.raises(RelayError) as err:
        client.register_stream(other)
    assert err.value.code == wire.ERR_DUPLICATE
    # replayed tuple: ts no longer after last
    sid, tup = scenario.schedule[0]
    replay = scenario_tuple(scenario.owners[sid], tup)
    data = replay.to_bytes(universe_for(scenario.registrations[0].schema))
    with pytest.raises(RelayError) as err:
        client.send_tuple(data)
    assert err.value.code == wire.ERR_ORDER
    # unknown policy drain is a 404 with an error frame
    with pytest.raises(RelayError) as err:
        client.fetch_outputs("nope")
    assert err.value.code == wire.ERR_UNKNOWN_POLICY


def scenario_tuple(owner, tup):
    """Re-encrypt an already-sent tuple without advancing the owner clock."""
    snapshot = owner.export_keys()
    clone = type(owner)(
        owner.ctx, owner.stream_id, owner.schema, owner.profile, keys=snapshot
    )
    return clone.encrypt(tup)


def test_unparseable_and_unexpected_frames(relay_run):
    _, client, _, _, _ = relay_run
    http = client._http
    # garbage body: one error frame back
    resp = http.post("/v1/frames", content=b"\x99\x00\x00")
    frames = wire.decode_frames(resp.content)
    assert [t for t, _ in frames] == [wire.MSG_ERROR]
    code, _ = wire.decode_error(frames[0][1])
    assert code == wire.ERR_BAD_FRAME
    # well-formed frame of a type the ingest route does not accept
    resp = http.post("/v1/frames", content=wire.encode_frame(wire.MSG_ACK, wire.encode_ack(0)))
    frames = wire.decode_frames(resp.content)
    code, _ = wire.decode_error(frames[0][1])
    assert code == wire.ERR_BAD_FRAME
    # unknown stream tuple
    bad = b"\x00\x02" + (0).to_bytes(8, "big") + b"zz" + b"\x00" + b"\x00\x00"
    resp = http.post("/v1/frames", content=wire.encode_frame(wire.MSG_TUPLE, bad))
    frames = wire.decode_frames(resp.content)
    code, _ = wire.decode_error(frames[0][1])
    assert code == wire.ERR_UNKNOWN_STREAM
