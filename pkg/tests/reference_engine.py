"""Plaintext oracle for the secure operator pipeline.

Computes, from raw tuples, exactly what the encrypted pipeline should
emit for a given policy: same records, same join pairs (including
buffer-eviction effects), same window sums (including dropped partial
windows and the seeding rule of the cumulative variant).  Used to
check the full encrypt/transform/decrypt path output-for-output.
"""

from collections import deque

from cipherstream.operators import AggOut, JoinOut, PolicySpec, RecordOut
from cipherstream.policy import TS_FIELD, predicate_holds


def _passes(predicates, tup):
    return all(
        predicate_holds(p, tup.ts if p.field == TS_FIELD else tup.values[p.field])
        for p in predicates
    )


def _project(spec, tup):
    return RecordOut(tup.ts, {name: tup.values[name] for name in spec.map_fields})


def _full(tup):
    return RecordOut(tup.ts, dict(tup.values))


def _single_stream(spec, tuples):
    out = []
    if spec.kind == "map":
        return [_project(spec, t) for t in tuples]
    if spec.kind == "filter":
        return [_full(t) for t in tuples if _passes(spec.predicates, t)]
    if spec.kind == "map_filter":
        return [_project(spec, t) for t in tuples if _passes(spec.predicates, t)]

    field, ws, start = spec.agg_field, spec.window, spec.start
    if ws == 1 and start == 0:
        return [AggOut(field, t.ts, t.ts + 1, t.values[field], 1) for t in tuples]

    if spec.kind == "agg1":
        buf = []
        for t in tuples:
            buf.append(t.values[field])
            if t.ts % ws == ws - 1:
                if len(buf) == ws:
                    out.append(AggOut(field, t.ts - ws + 1, t.ts + 1, sum(buf), ws))
                buf = []
        return out

    if spec.kind in ("agg2", "filter_agg2"):
        first_ts = tuples[0].ts if tuples else 0
        acc = 0
        for t in tuples:
            acc += t.values[field]
            if t.ts % ws == ws - 1:
                w_start = t.ts - ws + 1
                if w_start >= max(first_ts, start):
                    out.append(AggOut(field, w_start, t.ts + 1, acc, ws))
                acc = 0
        return out

    # cumulative variant: a window needs its full buffer and a seeded
    # previous boundary before anything is released
    seeded = start == 0
    buf = []
    for t in tuples:
        if t.ts >= start:
            buf.append(t.values[field])
        if t.ts % ws == (start - 1) % ws and t.ts >= start - 1:
            if seeded and len(buf) == ws:
                out.append(AggOut(field, t.ts - ws + 1, t.ts + 1, sum(buf), ws))
            seeded = True
            buf = []
    return out


def _joined(spec, events):
    buffers = (deque(maxlen=spec.buffers[0]), deque(maxlen=spec.buffers[1]))
    projected = spec.kind == "map_filter_join"
    out = []
    for side, tup in events:
        if projected:
            preds = spec.predicates if side == 0 else spec.right_predicates()
            if not _passes(preds, tup):
                continue
            record = _project(spec, tup)
        else:
            record = _full(tup)
        key = tup.values[spec.join_field]
        for other_key, other_record in buffers[1 - side]:
            if key == other_key:
                if side == 0:
                    out.append(JoinOut(record, other_record))
                else:
                    out.append(JoinOut(other_record, record))
        buffers[side].append((key, record))
    return out


def reference_outputs(spec: PolicySpec, tuples_or_events) -> list:
    """Expected plaintext outputs for one policy.

    Single-stream policies take a list of DataTuples in ts order;
    join policies take interleaved (side, DataTuple) arrival events.
    """
    if "join" in spec.kind:
        return _joined(spec, tuples_or_events)
    return _single_stream(spec, list(tuples_or_events))
