"""Command-line entry points for the three roles.

init-stream and issue-policy work offline on key bundle files.
owner-encrypt, cloud-serve, and user-subscribe talk to the relay:
the first two move ciphertext frames over HTTP, the last one runs
the relay itself.
"""

from __future__ import annotations

import pathlib
import secrets as _secrets
import time

import click

from .algebra import default_context
from .bundles import (
    load_owner_bundle,
    load_user_bundle,
    write_cloud_bundle,
    write_owner_bundle,
    write_user_bundle,
)
from .client import RelayClient
from .errors import CipherStreamError
from .operators import AggOut, DataTuple, JoinOut, PolicyDecryptor, RecordOut, issue_policy
from .policyfmt import parse_policy_file
from .streamfmt import parse_stream_config
from .wire import StreamRegistration


def _base_url(addr: str) -> str:
    return addr if "://" in addr else f"http://{addr}"


def _fail(exc: Exception):
    raise click.ClickException(str(exc)) from exc


def format_output(rec) -> str:
    """One line per decrypted record, parseable back where it makes sense."""
    if isinstance(rec, RecordOut):
        return DataTuple(rec.ts, rec.values).format()
    if isinstance(rec, JoinOut):
        left = DataTuple(rec.left.ts, rec.left.values).format()
        right = DataTuple(rec.right.ts, rec.right.values).format()
        return f"{left} | {right}"
    if isinstance(rec, AggOut):
        return (
            f"{rec.field}[{rec.window_start},{rec.window_end})"
            f" sum={rec.total} count={rec.count}"
        )
    raise TypeError(f"no text form for {type(rec).__name__}")


@click.group()
def main():
    """Encrypted stream processing over an untrusted relay."""


@main.command("init-stream")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="stream description file")
@click.option("--join-secret", default=None, metavar="HEX",
              help="shared equality-token secret; reuse the same value "
                   "on every stream this one may join with")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="where to write the owner key bundle")
def init_stream(config_path, join_secret, out_path):
    """Create the owner key bundle for a new stream."""
    text = pathlib.Path(config_path).read_text()
    try:
        cfg = parse_stream_config(text)
        secret = bytes.fromhex(join_secret) if join_secret else None
        if cfg.profile.join_field is not None and secret is None:
            secret = _secrets.token_bytes(16)
            click.echo(f"generated join secret {secret.hex()}")
            click.echo("pass it via --join-secret when initializing the peer stream")
        from .operators import StreamOwner

        owner = StreamOwner(
            default_context(), cfg.stream_id, cfg.schema, cfg.profile,
            join_secret=secret,
        )
        pathlib.Path(out_path).write_bytes(write_owner_bundle(owner))
    except (CipherStreamError, ValueError) as exc:
        _fail(exc)
    click.echo(f"stream {cfg.stream_id}: owner bundle written to {out_path}")


@main.command("issue-policy")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="policy description file")
@click.option("--master", "master_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="owner key bundle; give it twice (left, right) for joins")
@click.option("--policy", "policy_id", default=None,
              help="policy name; overrides the file's policy line")
@click.option("--out-user", required=True, type=click.Path(dir_okay=False),
              help="where to write the subscriber bundle")
@click.option("--out-cloud", required=True, type=click.Path(dir_okay=False),
              help="where to write the relay bundle")
def issue_policy_cmd(spec_path, master_paths, policy_id, out_user, out_cloud):
    """Derive relay and subscriber key bundles for one policy."""
    if len(master_paths) > 2:
        raise click.UsageError("at most two --master bundles (left and right)")
    text = pathlib.Path(spec_path).read_text()
    try:
        file_id, spec = parse_policy_file(text)
        policy_id = policy_id or file_id
        if policy_id is None:
            raise click.UsageError(
                "no policy name: add a 'policy' line to the file or pass --policy"
            )
        ctx = default_context()
        owners = [
            load_owner_bundle(ctx, pathlib.Path(p).read_bytes()) for p in master_paths
        ]
        right = owners[1] if len(owners) == 2 else None
        issued = issue_policy(policy_id, spec, owners[0], right=right)
        pathlib.Path(out_user).write_bytes(write_user_bundle(issued.user))
        pathlib.Path(out_cloud).write_bytes(write_cloud_bundle(issued.cloud))
    except CipherStreamError as exc:
        _fail(exc)
    streams = ",".join(issued.cloud.stream_ids)
    click.echo(f"policy {policy_id} ({spec.kind} over {streams}) issued")
    click.echo(f"  relay bundle:      {out_cloud}")
    click.echo(f"  subscriber bundle: {out_user}")


@main.command("owner-encrypt")
@click.option("--stream", "stream_id", required=True, help="stream to publish as")
@click.option("--keys", "keys_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="owner key bundle from init-stream")
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=True, dir_okay=False, allow_dash=True),
              help="tuple records, one 'ts,attr=value,...' per line")
@click.option("--connect", required=True, metavar="HOST:PORT",
              help="relay address")
@click.option("--register-policy", "policy_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="relay bundle to register before sending (repeatable)")
def owner_encrypt(stream_id, keys_path, in_path, connect, policy_paths):
    """Encrypt tuple records and push them to the relay.

    Registers the stream on the relay first (a no-op if it is already
    there), then sends one ciphertext per input line.  The key bundle
    is rewritten afterwards when the stream carries aggregation chains,
    so the next run continues where this one stopped.
    """
    bundle = pathlib.Path(keys_path).read_bytes()
    try:
        owner = load_owner_bundle(default_context(), bundle)
    except CipherStreamError as exc:
        _fail(exc)
    if owner.stream_id != stream_id:
        raise click.UsageError(
            f"{keys_path} holds keys for stream {owner.stream_id!r}, not {stream_id!r}"
        )
    with click.open_file(in_path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln and not ln.startswith("#")]
    sent = outputs = 0
    try:
        with RelayClient(_base_url(connect)) as client:
            client.register_stream(
                StreamRegistration(owner.stream_id, owner.schema, owner.profile)
            )
            for path in policy_paths:
                client.register_policy(pathlib.Path(path).read_bytes())
            for line in lines:
                st = owner.encrypt(DataTuple.parse(line))
                outputs += client.send_tuple(st.to_bytes(owner.universe))
                sent += 1
    except CipherStreamError as exc:
        _fail(exc)
    finally:
        if sent and owner.profile.aggregates:
            pathlib.Path(keys_path).write_bytes(write_owner_bundle(owner))
    click.echo(f"stream {stream_id}: sent {sent} tuples, {outputs} policy outputs")


@main.command("cloud-serve")
@click.option("--listen", default="127.0.0.1:8457", metavar="HOST:PORT",
              show_default=True, help="address to serve on")
@click.option("--workers", default=1, show_default=True,
              type=click.IntRange(min=1), help="transform worker processes")
def cloud_serve(listen, workers):
    """Run the relay: accept ciphertext streams, apply registered policies."""
    import uvicorn

    from .engine import MultiEngine
    from .service import create_app

    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--listen wants HOST:PORT, got {listen!r}")
    engine = MultiEngine(workers=workers)
    try:
        uvicorn.run(create_app(engine), host=host, port=int(port), log_level="info")
    finally:
        engine.close()


@main.command("user-subscribe")
@click.option("--policy", "policy_id", required=True, help="policy to read")
@click.option("--keys", "keys_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="subscriber key bundle from issue-policy")
@click.option("--connect", required=True, metavar="HOST:PORT",
              help="relay address")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False, writable=True, allow_dash=True),
              help="plaintext output file, one record per line")
@click.option("--follow", is_flag=True,
              help="keep polling instead of draining once")
@click.option("--poll", default=1.0, show_default=True,
              type=click.FloatRange(min=0.05), help="poll interval with --follow")
def user_subscribe(policy_id, keys_path, connect, out_path, follow, poll):
    """Fetch matched ciphertexts for a policy and decrypt them."""
    try:
        material = load_user_bundle(pathlib.Path(keys_path).read_bytes())
    except CipherStreamError as exc:
        _fail(exc)
    if material.policy_id != policy_id:
        raise click.UsageError(
            f"{keys_path} holds keys for policy {material.policy_id!r}, not {policy_id!r}"
        )
    decryptor = PolicyDecryptor(default_context(), material)
    written = 0
    try:
        with RelayClient(_base_url(connect)) as client, \
                click.open_file(out_path, "w") as out:
            while True:
                for item in client.fetch_outputs(policy_id):
                    for rec in decryptor.feed(item):
                        out.write(format_output(rec) + "\n")
                        written += 1
                out.flush()
                if not follow:
                    break
                time.sleep(poll)
    except CipherStreamError as exc:
        _fail(exc)
    except KeyboardInterrupt:
        pass
    click.echo(f"policy {policy_id}: wrote {written} records", err=True)


if __name__ == "__main__":
    main()
