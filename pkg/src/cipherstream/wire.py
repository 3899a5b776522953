"""Binary frame protocol between owners, the relay, and users.

A frame is msg_type (one byte), payload length (32-bit big-endian),
payload.  Frames are self-delimiting, so any number of them can be
concatenated in one request or response body.  All strings are UTF-8
with a 16-bit length prefix; group elements use their compressed
canonical encodings.

Payloads:

* REGISTER_STREAM: stream id, schema, encryption profile
* REGISTER_POLICY: a relay key bundle (see bundles)
* TUPLE: one encoded SecureTuple (stream id is inside)
* OUTPUT: one transformed output item
* ACK: 32-bit count of outputs the processed frame produced
* ERROR: 16-bit code plus message
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .abe import tct_from_bytes, tct_to_bytes
from .errors import WireFormatError
from .operators import EncProfile, OutputItem, OutputPart
from .policy import StreamSchema

MSG_REGISTER_STREAM = 1
MSG_REGISTER_POLICY = 2
MSG_TUPLE = 3
MSG_OUTPUT = 4
MSG_ACK = 5
MSG_ERROR = 6

MSG_TYPES = (
    MSG_REGISTER_STREAM,
    MSG_REGISTER_POLICY,
    MSG_TUPLE,
    MSG_OUTPUT,
    MSG_ACK,
    MSG_ERROR,
)

ERR_BAD_FRAME = 1
ERR_UNKNOWN_STREAM = 2
ERR_UNKNOWN_POLICY = 3
ERR_DUPLICATE = 4
ERR_ORDER = 5
ERR_BUNDLE = 6
ERR_INTERNAL = 7

_TCT_LEN = 1152


def _pack_str(s: str) -> bytes:
    raw = s.encode()
    return struct.pack(">H", len(raw)) + raw


def _unpack_str(data: bytes, off: int):
    (n,) = struct.unpack_from(">H", data, off)
    off += 2
    raw = data[off : off + n]
    if len(raw) != n:
        raise WireFormatError("truncated string")
    return raw.decode(), off + n


def encode_frame(msg_type: int, payload: bytes = b"") -> bytes:
    if msg_type not in MSG_TYPES:
        raise WireFormatError(f"unknown frame type {msg_type}")
    return struct.pack(">BI", msg_type, len(payload)) + payload


def decode_frames(data: bytes) -> list:
    """Split a byte string into (msg_type, payload) pairs."""
    frames = []
    off = 0
    while off < len(data):
        if off + 5 > len(data):
            raise WireFormatError("truncated frame header")
        msg_type, length = struct.unpack_from(">BI", data, off)
        off += 5
        payload = data[off : off + length]
        if len(payload) != length:
            raise WireFormatError("truncated frame payload")
        if msg_type not in MSG_TYPES:
            raise WireFormatError(f"unknown frame type {msg_type}")
        frames.append((msg_type, payload))
        off += length
    return frames


# --------------------------------------------------------- payloads

@dataclass(frozen=True)
class StreamRegistration:
    stream_id: str
    schema: StreamSchema
    profile: EncProfile


def encode_register_stream(reg: StreamRegistration) -> bytes:
    schema = reg.schema.to_bytes()
    profile = reg.profile.to_bytes()
    return b"".join(
        [
            _pack_str(reg.stream_id),
            struct.pack(">I", len(schema)),
            schema,
            struct.pack(">I", len(profile)),
            profile,
        ]
    )


def decode_register_stream(payload: bytes) -> StreamRegistration:
    stream_id, off = _unpack_str(payload, 0)
    try:
        (n,) = struct.unpack_from(">I", payload, off)
        off += 4
        schema = StreamSchema.from_bytes(payload[off : off + n])
        off += n
        (n,) = struct.unpack_from(">I", payload, off)
        off += 4
        profile = EncProfile.from_bytes(payload[off : off + n])
        off += n
    except struct.error as exc:
        raise WireFormatError(f"bad registration: {exc}") from exc
    if off != len(payload):
        raise WireFormatError("trailing bytes after registration")
    return StreamRegistration(stream_id, schema, profile)


def encode_output(item: OutputItem) -> bytes:
    out = [
        _pack_str(item.policy_id),
        _pack_str(item.kind),
        struct.pack(">B", len(item.meta)),
    ]
    out.extend(struct.pack(">q", m) for m in item.meta)
    out.append(struct.pack(">H", len(item.parts)))
    for part in item.parts:
        flags = (part.tct is not None) | (part.blob is not None) << 1
        out.append(_pack_str(part.label) + struct.pack(">B", flags))
        if part.tct is not None:
            out.append(tct_to_bytes(part.tct))
        if part.blob is not None:
            out.append(struct.pack(">I", len(part.blob)) + part.blob)
    return b"".join(out)


def decode_output(payload: bytes) -> OutputItem:
    try:
        policy_id, off = _unpack_str(payload, 0)
        kind, off = _unpack_str(payload, off)
        (nmeta,) = struct.unpack_from(">B", payload, off)
        off += 1
        meta = []
        for _ in range(nmeta):
            (m,) = struct.unpack_from(">q", payload, off)
            meta.append(m)
            off += 8
        (nparts,) = struct.unpack_from(">H", payload, off)
        off += 2
        parts = []
        for _ in range(nparts):
            label, off = _unpack_str(payload, off)
            (flags,) = struct.unpack_from(">B", payload, off)
            off += 1
            tct = blob = None
            if flags & 1:
                tct = tct_from_bytes(payload[off : off + _TCT_LEN])
                off += _TCT_LEN
            if flags & 2:
                (n,) = struct.unpack_from(">I", payload, off)
                off += 4
                blob = bytes(payload[off : off + n])
                if len(blob) != n:
                    raise WireFormatError("truncated part blob")
                off += n
            parts.append(OutputPart(label, tct=tct, blob=blob))
    except struct.error as exc:
        raise WireFormatError(f"bad output item: {exc}") from exc
    if off != len(payload):
        raise WireFormatError("trailing bytes after output item")
    return OutputItem(policy_id, kind, tuple(meta), tuple(parts))


def encode_ack(outputs: int) -> bytes:
    return struct.pack(">I", outputs)


def decode_ack(payload: bytes) -> int:
    if len(payload) != 4:
        raise WireFormatError("ack payload must be 4 bytes")
    return struct.unpack(">I", payload)[0]


def encode_error(code: int, message: str) -> bytes:
    return struct.pack(">H", code) + message.encode()


def decode_error(payload: bytes):
    if len(payload) < 2:
        raise WireFormatError("error payload too short")
    (code,) = struct.unpack_from(">H", payload, 0)
    return code, payload[2:].decode(errors="replace")
