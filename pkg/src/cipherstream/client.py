"""httpx client for the relay's frame endpoints.

All CLIs talk to the relay through this: frames are posted to
/v1/frames, outputs fetched from /v1/policies/{id}/outputs.  ERROR
reply frames surface as RelayError.
"""

from __future__ import annotations

import httpx

from .errors import RelayError, WireFormatError
from .wire import (
    MSG_ACK,
    MSG_ERROR,
    MSG_OUTPUT,
    MSG_REGISTER_POLICY,
    MSG_REGISTER_STREAM,
    MSG_TUPLE,
    StreamRegistration,
    decode_ack,
    decode_error,
    decode_frames,
    decode_output,
    encode_frame,
    encode_register_stream,
)


class RelayClient:
    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self._http = client or httpx.Client(base_url=self.base_url, timeout=120.0)

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # ------------------------------------------------------- frames

    def send_frames(self, frames) -> list:
        """Post concatenated frames; returns decoded reply frames."""
        body = b"".join(encode_frame(t, p) for t, p in frames)
        resp = self._http.post("/v1/frames", content=body)
        resp.raise_for_status()
        return decode_frames(resp.content)

    def _send_one(self, msg_type: int, payload: bytes) -> int:
        replies = self.send_frames([(msg_type, payload)])
        if len(replies) != 1:
            raise WireFormatError(f"expected one reply frame, got {len(replies)}")
        rtype, rpayload = replies[0]
        if rtype == MSG_ERROR:
            raise RelayError(*decode_error(rpayload))
        if rtype != MSG_ACK:
            raise WireFormatError(f"unexpected reply frame type {rtype}")
        return decode_ack(rpayload)

    def register_stream(self, reg: StreamRegistration):
        self._send_one(MSG_REGISTER_STREAM, encode_register_stream(reg))

    def register_policy(self, bundle: bytes):
        self._send_one(MSG_REGISTER_POLICY, bundle)

    def send_tuple(self, data: bytes) -> int:
        """Returns the number of outputs the tuple produced."""
        return self._send_one(MSG_TUPLE, data)

    def fetch_outputs(self, policy_id: str) -> list:
        """Drain the policy's queued outputs (delivered at most once)."""
        resp = self._http.get(f"/v1/policies/{policy_id}/outputs")
        frames = decode_frames(resp.content)
        items = []
        for rtype, payload in frames:
            if rtype == MSG_ERROR:
                raise RelayError(*decode_error(payload))
            if rtype != MSG_OUTPUT:
                raise WireFormatError(f"unexpected frame type {rtype} in outputs")
            items.append(decode_output(payload))
        return items

    # ------------------------------------------------ introspection

    def streams(self) -> list:
        resp = self._http.get("/v1/streams")
        resp.raise_for_status()
        return resp.json()

    def policies(self) -> list:
        resp = self._http.get("/v1/policies")
        resp.raise_for_status()
        return resp.json()
