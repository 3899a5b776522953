"""Command-line flows against a live relay process.

Unlike the service tests these go over real TCP: cloud-serve runs as a
subprocess and the owner/user commands reach it through httpx.
"""

import socket
import subprocess
import time

import httpx
import pytest
from click.testing import CliRunner

from cipherstream.cli import format_output, main
from cipherstream.operators import AggOut, DataTuple, JoinOut, PolicySpec, RecordOut
from cipherstream.policy import Predicate

from reference_engine import reference_outputs

JOIN_SECRET = "00112233445566778899aabbccddeeff"

LEFT_CONFIG = """\
stream ticks-left
field price 4
field qty 4
ts-width 6
map price qty
filter price
join price
"""

RIGHT_CONFIG = """\
stream ticks-right
field price 4
field vol 4
ts-width 6
windows 4
map price
join price
agg vol 2 4
"""

FILTER_POLICY = """\
policy watch-price
kind filter
where price ge 8
"""

JOIN_POLICY = """\
policy pair-price
kind join
join price
buffers 3 3
"""

AGG_POLICY = """\
policy vol-sum
kind agg2
agg vol
window 4
"""

LEFT_TUPLES = [
    DataTuple(ts, {"price": p, "qty": q})
    for ts, (p, q) in enumerate(
        [(1, 3), (8, 0), (15, 2), (3, 9), (9, 4), (12, 1),
         (7, 7), (8, 5), (2, 2), (11, 6), (5, 0), (14, 3)]
    )
]
RIGHT_TUPLES = [
    DataTuple(ts, {"price": p, "vol": v})
    for ts, (p, v) in enumerate(
        [(4, 2), (8, 7), (11, 1), (9, 3), (15, 6), (2, 0),
         (8, 4), (5, 5), (12, 2), (14, 8), (3, 1), (9, 9)]
    )
]


def _invoke(args, **kw):
    res = CliRunner().invoke(main, args, **kw)
    text = res.output + (res.stderr or "")
    assert res.exit_code == 0, f"{args[0]} failed:\n{text}"
    return text


def _write_tuples(path, tuples):
    path.write_text("".join(t.format() + "\n" for t in tuples))


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    work = tmp_path_factory.mktemp("cli")
    files = {
        "left.stream": LEFT_CONFIG,
        "right.stream": RIGHT_CONFIG,
        "watch.policy": FILTER_POLICY,
        "pair.policy": JOIN_POLICY,
        "vol.policy": AGG_POLICY,
    }
    for name, text in files.items():
        (work / name).write_text(text)

    for side in ("left", "right"):
        _invoke([
            "init-stream", "--config", str(work / f"{side}.stream"),
            "--join-secret", JOIN_SECRET, "--out", str(work / f"{side}.owner"),
        ])
    _invoke([
        "issue-policy", "--spec", str(work / "watch.policy"),
        "--master", str(work / "left.owner"),
        "--out-user", str(work / "watch.user"),
        "--out-cloud", str(work / "watch.cloud"),
    ])
    _invoke([
        "issue-policy", "--spec", str(work / "pair.policy"),
        "--master", str(work / "left.owner"), "--master", str(work / "right.owner"),
        "--out-user", str(work / "pair.user"),
        "--out-cloud", str(work / "pair.cloud"),
    ])
    _invoke([
        "issue-policy", "--spec", str(work / "vol.policy"),
        "--master", str(work / "right.owner"),
        "--out-user", str(work / "vol.user"),
        "--out-cloud", str(work / "vol.cloud"),
    ])

    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    addr = f"127.0.0.1:{port}"
    server = subprocess.Popen(
        ["cipherstream", "cloud-serve", "--listen", addr, "--workers", "2"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True,
    )
    try:
        deadline = time.monotonic() + 60
        while True:
            try:
                httpx.get(f"http://{addr}/v1/streams", timeout=2)
                break
            except httpx.TransportError:
                if server.poll() is not None or time.monotonic() > deadline:
                    raise RuntimeError(
                        f"relay did not come up:\n{server.stdout.read()}"
                    ) from None
                time.sleep(0.2)

        _write_tuples(work / "empty.tuples", [])
        _write_tuples(work / "right.tuples", RIGHT_TUPLES)
        _write_tuples(work / "left.tuples", LEFT_TUPLES)
        # register both streams before any policy that spans them, and
        # every policy before the tuples it should see
        out = _invoke([
            "owner-encrypt", "--stream", "ticks-right",
            "--keys", str(work / "right.owner"),
            "--in", str(work / "empty.tuples"), "--connect", addr,
        ])
        assert "sent 0 tuples" in out
        _invoke([
            "owner-encrypt", "--stream", "ticks-left",
            "--keys", str(work / "left.owner"),
            "--in", str(work / "empty.tuples"), "--connect", addr,
            "--register-policy", str(work / "watch.cloud"),
            "--register-policy", str(work / "pair.cloud"),
        ])
        out = _invoke([
            "owner-encrypt", "--stream", "ticks-right",
            "--keys", str(work / "right.owner"),
            "--in", str(work / "right.tuples"), "--connect", addr,
            "--register-policy", str(work / "vol.cloud"),
        ])
        assert "sent 12 tuples" in out
        out = _invoke([
            "owner-encrypt", "--stream", "ticks-left",
            "--keys", str(work / "left.owner"),
            "--in", str(work / "left.tuples"), "--connect", addr,
        ])
        assert "sent 12 tuples" in out
        yield work, addr, server
    finally:
        server.terminate()
        try:
            server.wait(timeout=5)
        except subprocess.TimeoutExpired:
            server.kill()


def _subscribe(work, addr, policy, bundle, out_name):
    _invoke([
        "user-subscribe", "--policy", policy, "--keys", str(work / bundle),
        "--connect", addr, "--out", str(work / out_name),
    ])
    return (work / out_name).read_text().splitlines()


def test_formats_cover_all_output_shapes():
    rec = RecordOut(5, {"price": 9, "qty": 1})
    assert format_output(rec) == "5,price=9,qty=1"
    assert format_output(JoinOut(rec, RecordOut(3, {"vol": 2}))) == (
        "5,price=9,qty=1 | 3,vol=2"
    )
    assert format_output(AggOut("vol", 4, 8, 13, 4)) == "vol[4,8) sum=13 count=4"


def test_filter_policy_roundtrip(cli_env):
    work, addr, _ = cli_env
    lines = _subscribe(work, addr, "watch-price", "watch.user", "watch.out")
    spec = PolicySpec("filter", predicates=(Predicate("price", "ge", 8),))
    expected = reference_outputs(spec, LEFT_TUPLES)
    assert lines == [format_output(r) for r in expected]
    assert len(lines) == 7


def test_join_policy_roundtrip(cli_env):
    work, addr, _ = cli_env
    lines = _subscribe(work, addr, "pair-price", "pair.user", "pair.out")
    spec = PolicySpec("join", join_field="price", buffers=(3, 3))
    events = [(1, t) for t in RIGHT_TUPLES] + [(0, t) for t in LEFT_TUPLES]
    expected = reference_outputs(spec, events)
    assert lines == [format_output(r) for r in expected]
    assert lines


def test_agg_policy_roundtrip(cli_env):
    work, addr, _ = cli_env
    lines = _subscribe(work, addr, "vol-sum", "vol.user", "vol.out")
    spec = PolicySpec("agg2", agg_field="vol", window=4)
    expected = reference_outputs(spec, RIGHT_TUPLES)
    assert lines == [format_output(r) for r in expected]
    assert len(lines) == 3


def test_drained_policy_yields_nothing(cli_env):
    work, addr, _ = cli_env
    _subscribe(work, addr, "watch-price", "watch.user", "watch1.out")
    lines = _subscribe(work, addr, "watch-price", "watch.user", "watch2.out")
    assert lines == []


def test_replayed_tuples_are_rejected(cli_env):
    work, addr, _ = cli_env
    res = CliRunner().invoke(main, [
        "owner-encrypt", "--stream", "ticks-left",
        "--keys", str(work / "left.owner"),
        "--in", str(work / "left.tuples"), "--connect", addr,
    ])
    assert res.exit_code != 0
    assert "not after" in (res.output + (res.stderr or ""))


def test_mismatched_bundles_are_refused(cli_env):
    work, addr, _ = cli_env
    res = CliRunner().invoke(main, [
        "user-subscribe", "--policy", "pair-price",
        "--keys", str(work / "watch.user"),
        "--connect", addr, "--out", str(work / "never.out"),
    ])
    assert res.exit_code == 2
    assert "watch-price" in (res.output + (res.stderr or ""))
    res = CliRunner().invoke(main, [
        "owner-encrypt", "--stream", "ticks-right",
        "--keys", str(work / "left.owner"),
        "--in", str(work / "left.tuples"), "--connect", addr,
    ])
    assert res.exit_code == 2
    assert "ticks-left" in (res.output + (res.stderr or ""))


def test_policy_file_without_a_name_needs_the_flag(tmp_path):
    (tmp_path / "anon.policy").write_text("kind filter\nwhere price ge 8\n")
    (tmp_path / "left.stream").write_text(LEFT_CONFIG)
    _invoke([
        "init-stream", "--config", str(tmp_path / "left.stream"),
        "--join-secret", JOIN_SECRET, "--out", str(tmp_path / "left.owner"),
    ])
    res = CliRunner().invoke(main, [
        "issue-policy", "--spec", str(tmp_path / "anon.policy"),
        "--master", str(tmp_path / "left.owner"),
        "--out-user", str(tmp_path / "u"), "--out-cloud", str(tmp_path / "c"),
    ])
    assert res.exit_code == 2
    assert "policy" in (res.output + (res.stderr or ""))
    _invoke([
        "issue-policy", "--spec", str(tmp_path / "anon.policy"),
        "--master", str(tmp_path / "left.owner"), "--policy", "named-late",
        "--out-user", str(tmp_path / "u"), "--out-cloud", str(tmp_path / "c"),
    ])


def test_init_stream_generates_a_secret_when_missing(tmp_path):
    (tmp_path / "left.stream").write_text(LEFT_CONFIG)
    out = _invoke([
        "init-stream", "--config", str(tmp_path / "left.stream"),
        "--out", str(tmp_path / "left.owner"),
    ])
    assert "generated join secret" in out
