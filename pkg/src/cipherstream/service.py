"""HTTP face of the relay.

The binary frame protocol rides in request and response bodies:

* POST /v1/frames: body is any number of concatenated frames
  (REGISTER_STREAM, REGISTER_POLICY, TUPLE).  Frames are processed in
  order; the response body carries one ACK or ERROR frame per input
  frame, in the same order.  A body that fails to parse at all gets a
  single ERROR frame back.
* GET /v1/policies/{id}/outputs: drains the policy's queued OUTPUT
  frames.  Delivery is at most once; outputs are gone once fetched.

Two JSON endpoints (/v1/streams, /v1/policies) expose registry state
for operators and tests.
"""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from pydantic import BaseModel

from .engine import MultiEngine
from .errors import (
    BundleError,
    CipherStreamError,
    PolicyError,
    StreamStateError,
    WireFormatError,
)
from .wire import (
    ERR_BAD_FRAME,
    ERR_BUNDLE,
    ERR_INTERNAL,
    ERR_UNKNOWN_POLICY,
    MSG_ACK,
    MSG_ERROR,
    MSG_OUTPUT,
    MSG_REGISTER_POLICY,
    MSG_REGISTER_STREAM,
    MSG_TUPLE,
    decode_frames,
    decode_register_stream,
    encode_ack,
    encode_error,
    encode_frame,
    encode_output,
)

FRAME_MEDIA_TYPE = "application/octet-stream"


class StreamInfo(BaseModel):
    stream_id: str
    fields: dict[str, int]
    ts_width: int
    windows: list[int]


class PolicyInfo(BaseModel):
    policy_id: str
    pending: int


def _error_code(exc: CipherStreamError) -> int:
    if isinstance(exc, StreamStateError) and exc.code is not None:
        return exc.code
    if isinstance(exc, WireFormatError):
        return ERR_BAD_FRAME
    if isinstance(exc, (BundleError, PolicyError)):
        return ERR_BUNDLE
    return ERR_INTERNAL


def create_app(engine: MultiEngine) -> FastAPI:
    app = FastAPI(title="cipherstream relay", docs_url=None, redoc_url=None)
    app.state.engine = engine

    def handle(msg_type: int, payload: bytes) -> bytes:
        if msg_type == MSG_REGISTER_STREAM:
            engine.register_stream(decode_register_stream(payload))
            return encode_frame(MSG_ACK, encode_ack(0))
        if msg_type == MSG_REGISTER_POLICY:
            engine.register_policy(payload)
            return encode_frame(MSG_ACK, encode_ack(0))
        if msg_type == MSG_TUPLE:
            return encode_frame(MSG_ACK, encode_ack(engine.ingest(payload)))
        return encode_frame(
            MSG_ERROR,
            encode_error(ERR_BAD_FRAME, f"frame type {msg_type} not accepted here"),
        )

    # the frame codec owns all body parsing, so the route takes the
    # raw request rather than a typed body
    @app.post("/v1/frames")
    async def frames(request: Request):
        body = await request.body()
        replies = []
        try:
            parsed = decode_frames(body)
        except WireFormatError as exc:
            replies.append(
                encode_frame(MSG_ERROR, encode_error(ERR_BAD_FRAME, str(exc)))
            )
        else:
            for msg_type, payload in parsed:
                try:
                    replies.append(handle(msg_type, payload))
                except CipherStreamError as exc:
                    replies.append(
                        encode_frame(
                            MSG_ERROR, encode_error(_error_code(exc), str(exc))
                        )
                    )
        return Response(content=b"".join(replies), media_type=FRAME_MEDIA_TYPE)

    @app.get("/v1/policies/{policy_id}/outputs")
    def outputs(policy_id: str):
        try:
            items = engine.drain(policy_id)
        except StreamStateError as exc:
            frame = encode_frame(
                MSG_ERROR, encode_error(exc.code or ERR_UNKNOWN_POLICY, str(exc))
            )
            return Response(content=frame, media_type=FRAME_MEDIA_TYPE, status_code=404)
        body = b"".join(encode_frame(MSG_OUTPUT, encode_output(i)) for i in items)
        return Response(content=body, media_type=FRAME_MEDIA_TYPE)

    @app.get("/v1/streams")
    def streams() -> list[StreamInfo]:
        infos = []
        for sid in engine.stream_ids():
            reg = engine.registration(sid)
            infos.append(
                StreamInfo(
                    stream_id=sid,
                    fields={n: s.width for n, s in reg.schema.fields.items()},
                    ts_width=reg.schema.ts_width,
                    windows=list(reg.schema.windows),
                )
            )
        return infos

    @app.get("/v1/policies")
    def policies() -> list[PolicyInfo]:
        pending = engine.pending()
        return [PolicyInfo(policy_id=pid, pending=n) for pid, n in sorted(pending.items())]

    return app
