"""The relay's query host.

CloudEngine keeps the in-memory state of one relay process: registered
streams, per-policy transformers, and per-policy output queues that
subscribers drain.  Everything it holds comes from relay-role bundles,
so it can transform but never decrypt.

MultiEngine runs one CloudEngine per forked worker process and routes
by stream: a policy lives wholly inside one worker, a tuple is
forwarded to every worker hosting a listener for its stream, and the
parent serializes per stream, so no stream is ever processed
concurrently.  Outputs travel back with the ack and are queued in the
parent, where subscribers drain them.

Both engines support internal pipes: a pipe republishes another
policy's outputs under its own policy id, which is how a two-stage
query (join feeding a downstream select) materializes its intermediate
stream without another decryption round.

Nothing here is durable; a restart loses buffers and queues.
"""

from __future__ import annotations

import dataclasses
import multiprocessing
import threading
from collections import deque

from .algebra import BilinearContext, default_context
from .bundles import load_cloud_bundle
from .errors import CipherStreamError, StreamStateError
from .operators import CloudPolicyMaterial, SecureTuple, make_transformer
from .policy import universe_for
from .wire import (
    ERR_DUPLICATE,
    ERR_ORDER,
    ERR_UNKNOWN_POLICY,
    ERR_UNKNOWN_STREAM,
    StreamRegistration,
    decode_output,
    decode_register_stream,
    encode_output,
    encode_register_stream,
)


def _unknown_stream(stream_id):
    return StreamStateError(f"unknown stream {stream_id!r}", code=ERR_UNKNOWN_STREAM)


class CloudEngine:
    """Single-process policy host."""

    def __init__(self, ctx: BilinearContext | None = None):
        self.ctx = ctx or default_context()
        self._lock = threading.RLock()
        self._streams = {}
        self._stream_locks = {}
        self._last_ts = {}
        self._policies = {}
        self._listeners = {}
        self._pipes = {}
        self._queues = {}

    # ------------------------------------------------- registration

    def register_stream(self, reg: StreamRegistration):
        reg.profile.validate(reg.schema)
        with self._lock:
            known = self._streams.get(reg.stream_id)
            if known == reg:
                return
            if known is not None:
                raise StreamStateError(
                    f"stream {reg.stream_id!r} already registered with a different "
                    "schema or profile",
                    code=ERR_DUPLICATE,
                )
            self._streams[reg.stream_id] = reg
            self._stream_locks[reg.stream_id] = threading.Lock()
            self._last_ts[reg.stream_id] = -1
            self._listeners[reg.stream_id] = []

    def register_policy(self, material: CloudPolicyMaterial):
        with self._lock:
            if material.policy_id in self._policies:
                raise StreamStateError(
                    f"policy {material.policy_id!r} already registered",
                    code=ERR_DUPLICATE,
                )
            for sid in material.stream_ids:
                if sid not in self._streams:
                    raise _unknown_stream(sid)
            locks = [self._stream_locks[s] for s in sorted(set(material.stream_ids))]
            for lock in locks:
                lock.acquire()
            try:
                runtime = _PolicyRuntime(
                    make_transformer(self.ctx, material), threading.Lock()
                )
                self._policies[material.policy_id] = runtime
                self._queues[material.policy_id] = deque()
                for side, sid in enumerate(material.stream_ids):
                    self._listeners[sid].append((material.policy_id, runtime, side))
            finally:
                for lock in locks:
                    lock.release()

    def register_pipe(self, policy_id: str, source: str):
        """Republish outputs of ``source`` under ``policy_id``."""
        with self._lock:
            if policy_id in self._policies or policy_id in self._queues:
                raise StreamStateError(
                    f"policy {policy_id!r} already registered", code=ERR_DUPLICATE
                )
            if source not in self._queues:
                raise StreamStateError(
                    f"pipe source {source!r} not registered", code=ERR_UNKNOWN_POLICY
                )
            self._queues[policy_id] = deque()
            self._pipes.setdefault(source, []).append(policy_id)

    # ------------------------------------------------------ traffic

    def ingest(self, st: SecureTuple) -> int:
        """Feed one tuple to every listening policy; count the outputs."""
        with self._lock:
            if st.stream_id not in self._streams:
                raise _unknown_stream(st.stream_id)
            stream_lock = self._stream_locks[st.stream_id]
        with stream_lock:
            last = self._last_ts[st.stream_id]
            if st.ts <= last:
                raise StreamStateError(
                    f"ts {st.ts} not after {last} on stream {st.stream_id!r}",
                    code=ERR_ORDER,
                )
            self._last_ts[st.stream_id] = st.ts
            produced = 0
            for policy_id, runtime, side in self._listeners[st.stream_id]:
                with runtime.lock:
                    items = runtime.transformer.feed(st, side=side)
                produced += self._publish(policy_id, items)
            return produced

    def _publish(self, policy_id, items) -> int:
        count = 0
        for item in items:
            self._queues[policy_id].append(item)
            count += 1
            for pipe_id in self._pipes.get(policy_id, ()):
                self._queues[pipe_id].append(
                    dataclasses.replace(item, policy_id=pipe_id)
                )
                count += 1
        return count

    def drain(self, policy_id: str) -> list:
        """Queued outputs in generation order; delivered at most once."""
        queue = self._queues.get(policy_id)
        if queue is None:
            raise StreamStateError(
                f"unknown policy {policy_id!r}", code=ERR_UNKNOWN_POLICY
            )
        items = []
        while queue:
            items.append(queue.popleft())
        return items

    def universe(self, stream_id: str):
        return universe_for(self.registration(stream_id).schema)

    def registration(self, stream_id: str) -> StreamRegistration:
        with self._lock:
            reg = self._streams.get(stream_id)
        if reg is None:
            raise _unknown_stream(stream_id)
        return reg

    def stream_ids(self) -> list:
        with self._lock:
            return sorted(self._streams)

    def policy_ids(self) -> list:
        with self._lock:
            return sorted(self._queues)

    def pending(self) -> dict:
        with self._lock:
            return {pid: len(q) for pid, q in self._queues.items()}


class _PolicyRuntime:
    __slots__ = ("transformer", "lock")

    def __init__(self, transformer, lock):
        self.transformer = transformer
        self.lock = lock


# ----------------------------------------------------------- workers

def _worker_main(conn):
    engine = CloudEngine()
    universes = {}
    while True:
        try:
            op, payload = conn.recv()
        except EOFError:
            return
        if op == "stop":
            return
        try:
            if op == "stream":
                reg = decode_register_stream(payload)
                engine.register_stream(reg)
                universes[reg.stream_id] = universe_for(reg.schema)
                conn.send(("ok", 0, []))
            elif op == "policy":
                engine.register_policy(load_cloud_bundle(payload))
                conn.send(("ok", 0, []))
            elif op == "tuple":
                sid = SecureTuple.peek_stream_id(payload)
                st = SecureTuple.from_bytes(payload, universes[sid])
                engine.ingest(st)
                outs = []
                for pid in engine.policy_ids():
                    outs.extend(encode_output(i) for i in engine.drain(pid))
                conn.send(("ok", 0, outs))
            else:
                conn.send(("err", 0, f"unknown op {op!r}"))
        except CipherStreamError as exc:
            conn.send(("err", getattr(exc, "code", None) or 0, str(exc)))


class _Worker:
    def __init__(self, mp_ctx):
        self.conn, child = mp_ctx.Pipe()
        self.proc = mp_ctx.Process(target=_worker_main, args=(child,), daemon=True)
        self.proc.start()
        child.close()
        self.lock = threading.Lock()
        self.policies = 0

    def call(self, op, payload):
        with self.lock:
            self.conn.send((op, payload))
            status, code, result = self.conn.recv()
        if status != "ok":
            raise StreamStateError(result, code=code or None)
        return result

    def stop(self):
        try:
            with self.lock:
                self.conn.send(("stop", b""))
        except (BrokenPipeError, OSError):
            pass
        self.proc.join(timeout=5)
        self.conn.close()


class MultiEngine:
    """Streams partitioned across forked worker processes.

    The parent is the single authority on stream order and holds the
    subscriber queues; workers hold all transformer state.
    """

    def __init__(self, workers: int = 1, ctx: BilinearContext | None = None):
        if workers < 1:
            raise ValueError("need at least one worker")
        mp_ctx = multiprocessing.get_context("fork")
        self._workers = [_Worker(mp_ctx) for _ in range(workers)]
        self._lock = threading.RLock()
        self._streams = {}
        self._stream_locks = {}
        self._last_ts = {}
        self._policy_worker = {}
        self._listeners = {}
        self._pipes = {}
        self._queues = {}

    def register_stream(self, reg: StreamRegistration):
        reg.profile.validate(reg.schema)
        with self._lock:
            known = self._streams.get(reg.stream_id)
            if known == reg:
                return
            if known is not None:
                raise StreamStateError(
                    f"stream {reg.stream_id!r} already registered with a different "
                    "schema or profile",
                    code=ERR_DUPLICATE,
                )
            payload = encode_register_stream(reg)
            for worker in self._workers:
                worker.call("stream", payload)
            self._streams[reg.stream_id] = reg
            self._stream_locks[reg.stream_id] = threading.Lock()
            self._last_ts[reg.stream_id] = -1
            self._listeners[reg.stream_id] = set()

    def register_policy(self, bundle: bytes):
        material = load_cloud_bundle(bundle)
        with self._lock:
            if material.policy_id in self._queues:
                raise StreamStateError(
                    f"policy {material.policy_id!r} already registered",
                    code=ERR_DUPLICATE,
                )
            for sid in material.stream_ids:
                if sid not in self._streams:
                    raise _unknown_stream(sid)
            worker = self._place(material.stream_ids)
            locks = [self._stream_locks[s] for s in sorted(set(material.stream_ids))]
            for lock in locks:
                lock.acquire()
            try:
                worker.call("policy", bundle)
                worker.policies += 1
                self._policy_worker[material.policy_id] = worker
                self._queues[material.policy_id] = deque()
                for sid in material.stream_ids:
                    self._listeners[sid].add(worker)
            finally:
                for lock in locks:
                    lock.release()

    def _place(self, stream_ids) -> "_Worker":
        """Pick the worker for a new policy: prefer one already fed by
        every stream the policy reads, then spread by policy count."""
        fed_by_all = [
            w
            for w in self._workers
            if all(w in self._listeners[s] for s in stream_ids)
        ]
        pool = fed_by_all or self._workers
        return min(pool, key=lambda w: w.policies)

    def register_pipe(self, policy_id: str, source: str):
        with self._lock:
            if policy_id in self._queues:
                raise StreamStateError(
                    f"policy {policy_id!r} already registered", code=ERR_DUPLICATE
                )
            if source not in self._queues:
                raise StreamStateError(
                    f"pipe source {source!r} not registered", code=ERR_UNKNOWN_POLICY
                )
            self._queues[policy_id] = deque()
            self._pipes.setdefault(source, []).append(policy_id)

    def ingest(self, data: bytes) -> int:
        """Route one encoded tuple; returns the number of outputs."""
        sid = SecureTuple.peek_stream_id(data)
        with self._lock:
            if sid not in self._streams:
                raise _unknown_stream(sid)
            stream_lock = self._stream_locks[sid]
        with stream_lock:
            last = self._last_ts[sid]
            ts = SecureTuple.peek_ts(data)
            if ts <= last:
                raise StreamStateError(
                    f"ts {ts} not after {last} on stream {sid!r}", code=ERR_ORDER
                )
            self._last_ts[sid] = ts
            produced = 0
            for worker in self._listeners[sid]:
                for blob in worker.call("tuple", data):
                    item = decode_output(blob)
                    queue = self._queues.get(item.policy_id)
                    if queue is None:
                        continue
                    queue.append(item)
                    produced += 1
                    for pipe_id in self._pipes.get(item.policy_id, ()):
                        queue_p = self._queues[pipe_id]
                        queue_p.append(dataclasses.replace(item, policy_id=pipe_id))
                        produced += 1
            return produced

    def drain(self, policy_id: str) -> list:
        queue = self._queues.get(policy_id)
        if queue is None:
            raise StreamStateError(
                f"unknown policy {policy_id!r}", code=ERR_UNKNOWN_POLICY
            )
        items = []
        while queue:
            items.append(queue.popleft())
        return items

    def stream_ids(self) -> list:
        with self._lock:
            return sorted(self._streams)

    def registration(self, stream_id: str) -> StreamRegistration:
        with self._lock:
            reg = self._streams.get(stream_id)
        if reg is None:
            raise _unknown_stream(stream_id)
        return reg

    def policy_ids(self) -> list:
        with self._lock:
            return sorted(self._queues)

    def pending(self) -> dict:
        with self._lock:
            return {pid: len(q) for pid, q in self._queues.items()}

    def close(self):
        for worker in self._workers:
            worker.stop()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
