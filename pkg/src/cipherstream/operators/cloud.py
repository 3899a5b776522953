"""Cloud side: per-policy ciphertext transformation state machines.

Each registered policy gets one transformer.  Transformers consume
SecureTuples from the policy's stream(s) and produce OutputItems whose
payloads are transformed ciphertexts; nothing here can decrypt.  Hints
let the cloud skip tuples a predicate provably rejects, but every
emitted output still rests on a successful transform, so routing is an
optimization and the crypto stays the gate.

Join matching follows the token rule: arrivals are matched against the
entire opposite buffer before insertion, buffers are FIFO and
count-bounded.  Aggregation state (window buffers, the cumulative
variable for variant 3) is single-writer per policy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..abe import TransformedCiphertext, tct_div, tct_mul, trans, unwrap_key
from ..algebra import G1Element, BilinearContext
from ..algebra.context import GT_ONE
from ..errors import PolicyError, WireFormatError
from ..policy import TS_FIELD, predicate_holds
from .keys import CloudPolicyMaterial
from .model import (
    LABEL_FILTER,
    LABEL_JOIN_PAYLOAD,
    LABEL_JOIN_TOKEN,
    LABEL_JOIN_WTOKEN,
    SecureTuple,
    label_agg1,
    label_agg2,
    label_agg3_cum,
    label_agg3_val,
    label_map,
    label_rec,
)

from cryptography.hazmat.primitives.ciphers.aead import AESGCM


@dataclass(frozen=True)
class OutputPart:
    label: str
    tct: TransformedCiphertext | None = None
    blob: bytes | None = None


@dataclass(frozen=True)
class OutputItem:
    policy_id: str
    kind: str
    meta: tuple
    parts: tuple


def hints_reject(predicates, st: SecureTuple) -> bool:
    """True when the tuple's plaintext hints prove a predicate fails."""
    for p in predicates:
        v = st.ts if p.field == TS_FIELD else st.hints.get(p.field)
        if v is not None and not predicate_holds(p, v):
            return True
    return False


def _open_unblinded(tct: TransformedCiphertext, blob: bytes) -> bytes:
    """Recover a hybrid payload from a transform under blinding z = 1."""
    mask = tct.u / tct.v
    if len(blob) < 13:
        raise WireFormatError("hybrid blob too short")
    return AESGCM(unwrap_key(mask)).decrypt(blob[:12], blob[12:], b"")


class PolicyTransformer:
    def __init__(self, ctx: BilinearContext, material: CloudPolicyMaterial):
        self.ctx = ctx
        self.material = material
        self.spec = material.spec
        self.policy_id = material.policy_id

    def _tk(self, name: str):
        return self.material.tks[name]

    def feed(self, st: SecureTuple, side: int = 0) -> list:
        raise NotImplementedError


class MapTransformer(PolicyTransformer):
    """Map and MapFilter: per-projected-field transforms."""

    def feed(self, st, side=0):
        if hints_reject(self.spec.predicates, st):
            return []
        tk = self._tk("main:payload")
        parts = []
        for name in self.spec.map_fields:
            comp = st.component(label_map(name))
            if comp is None:
                continue
            tct = trans(self.ctx, tk, comp.ct)
            if tct is not None:
                parts.append(OutputPart(name, tct=tct))
        if not parts:
            return []
        return [OutputItem(self.policy_id, self.spec.kind, (st.ts,), tuple(parts))]


class FilterTransformer(PolicyTransformer):
    def feed(self, st, side=0):
        comp = st.component(LABEL_FILTER)
        if comp is None or hints_reject(self.spec.predicates, st):
            return []
        tct = trans(self.ctx, self._tk("main:payload"), comp.ct)
        if tct is None:
            return []
        part = OutputPart("tuple", tct=tct, blob=comp.blob)
        return [OutputItem(self.policy_id, "filter", (st.ts,), (part,))]


class _BufferedMatcher(PolicyTransformer):
    """Shared token-match machinery for the join flavors."""

    def __init__(self, ctx, material):
        super().__init__(ctx, material)
        self.buffers = (
            deque(maxlen=self.spec.buffers[0]),
            deque(maxlen=self.spec.buffers[1]),
        )

    def _entry(self, st: SecureTuple, side: int):
        """(ts, comparable token power, output parts) or None to drop."""
        raise NotImplementedError

    def feed(self, st, side=0):
        entry = self._entry(st, side)
        if entry is None:
            return []
        ts, power, parts = entry
        out = []
        for other_ts, other_power, other_parts in self.buffers[1 - side]:
            if power != other_power:
                continue
            if side == 0:
                pair = ((ts, parts), (other_ts, other_parts))
            else:
                pair = ((other_ts, other_parts), (ts, parts))
            (lts, lparts), (rts, rparts) = pair
            prefixed = tuple(
                OutputPart(f"left:{p.label}", tct=p.tct, blob=p.blob) for p in lparts
            ) + tuple(
                OutputPart(f"right:{p.label}", tct=p.tct, blob=p.blob) for p in rparts
            )
            out.append(OutputItem(self.policy_id, self.spec.kind, (lts, rts), prefixed))
        self.buffers[side].append((ts, power, parts))
        return out


class JoinTransformer(_BufferedMatcher):
    def _entry(self, st, side):
        token = st.component(LABEL_JOIN_TOKEN)
        payload = st.component(LABEL_JOIN_PAYLOAD)
        if token is None or payload is None:
            return None
        prefix = ("left", "right")[side]
        tct = trans(self.ctx, self._tk(f"{prefix}:payload"), payload.ct)
        if tct is None:
            return None
        power = token.det ** self.material.join_tokens[side]
        return st.ts, power.to_bytes(), (OutputPart("tuple", tct=tct, blob=payload.blob),)


class MapFilterJoinTransformer(_BufferedMatcher):
    def _entry(self, st, side):
        wtoken = st.component(LABEL_JOIN_WTOKEN)
        if wtoken is None:
            return None
        preds = self.spec.predicates if side == 0 else self.spec.right_predicates()
        if hints_reject(preds, st):
            return None
        prefix = ("left", "right")[side]
        gate = trans(self.ctx, self._tk(f"{prefix}:unwrap"), wtoken.ct)
        if gate is None:
            return None
        token = G1Element.from_bytes(_open_unblinded(gate, wtoken.blob))
        power = token ** self.material.join_tokens[side]
        tk = self._tk(f"{prefix}:payload")
        parts = []
        for name in self.spec.map_fields:
            comp = st.component(label_map(name))
            if comp is None:
                continue
            tct = trans(self.ctx, tk, comp.ct)
            if tct is not None:
                parts.append(OutputPart(name, tct=tct))
        if not parts:
            return None
        return st.ts, power.to_bytes(), tuple(parts)


class AggWindowTransformer(PolicyTransformer):
    """Variant 1 (and any window=1 policy): buffer, product at boundary."""

    def __init__(self, ctx, material):
        super().__init__(ctx, material)
        self.buffer = []

    def _label(self):
        spec = self.spec
        if spec.window == 1:
            return label_rec(spec.agg_field)
        return label_agg1(spec.agg_field, spec.window)

    def feed(self, st, side=0):
        comp = st.component(self._label())
        if comp is None:
            return []
        tct = trans(self.ctx, self._tk("main:payload"), comp.ct)
        if tct is not None:
            self.buffer.append(tct)
        ws = self.spec.window
        if st.ts % ws != ws - 1:
            return []
        out = []
        if len(self.buffer) == ws:
            total = self.buffer[0]
            for t in self.buffer[1:]:
                total = tct_mul(total, t)
            start = st.ts - ws + 1
            out.append(
                OutputItem(
                    self.policy_id,
                    self.spec.kind,
                    (start, st.ts + 1),
                    (OutputPart("sum", tct=total),),
                )
            )
        self.buffer = []
        return out


class AggBoundaryTransformer(PolicyTransformer):
    """Variant 2 (plain or filter-gated): one transform per boundary."""

    def feed(self, st, side=0):
        comp = st.component(label_agg2(self.spec.agg_field, self.spec.window))
        if comp is None:
            return []
        tct = trans(self.ctx, self._tk("main:payload"), comp.ct)
        if tct is None:
            return []
        start = st.ts - self.spec.window + 1
        return [
            OutputItem(
                self.policy_id,
                self.spec.kind,
                (start, st.ts + 1),
                (OutputPart("sum", tct=tct),),
            )
        ]


class AggCumulativeTransformer(PolicyTransformer):
    """Variant 3: masked values plus a telescoping cumulative."""

    def __init__(self, ctx, material):
        super().__init__(ctx, material)
        self.buffer = []
        self.cumulative = None
        if material.agg_offset is not None:
            self.cumulative = TransformedCiphertext(material.agg_offset, GT_ONE)

    def feed(self, st, side=0):
        spec = self.spec
        out = []
        val = st.component(label_agg3_val(spec.agg_field))
        if val is not None and st.ts >= spec.start:
            tct = trans(self.ctx, self._tk("main:payload"), val.ct)
            if tct is not None:
                self.buffer.append(tct)
        cum = st.component(label_agg3_cum(spec.agg_field))
        if cum is not None and st.ts % spec.window == (spec.start - 1) % spec.window:
            tz = trans(self.ctx, self._tk("main:payload"), cum.ct)
            if tz is not None:
                if self.cumulative is not None and len(self.buffer) == spec.window:
                    start = st.ts - spec.window + 1
                    out.append(
                        OutputItem(
                            self.policy_id,
                            spec.kind,
                            (start, st.ts + 1),
                            (
                                OutputPart("sum", tct=self._product()),
                                OutputPart("masks", tct=tct_div(tz, self.cumulative)),
                            ),
                        )
                    )
                self.cumulative = tz
                self.buffer = []
        return out

    def _product(self):
        total = self.buffer[0]
        for t in self.buffer[1:]:
            total = tct_mul(total, t)
        return total


def make_transformer(ctx: BilinearContext, material: CloudPolicyMaterial) -> PolicyTransformer:
    kind = material.spec.kind
    if kind in ("map", "map_filter"):
        return MapTransformer(ctx, material)
    if kind == "filter":
        return FilterTransformer(ctx, material)
    if kind == "join":
        return JoinTransformer(ctx, material)
    if kind == "map_filter_join":
        return MapFilterJoinTransformer(ctx, material)
    if kind in ("agg1", "agg2", "agg3", "filter_agg2", "filter_agg3"):
        spec = material.spec
        if kind == "agg1" or (spec.window == 1 and spec.start == 0):
            return AggWindowTransformer(ctx, material)
        if kind in ("agg2", "filter_agg2"):
            return AggBoundaryTransformer(ctx, material)
        return AggCumulativeTransformer(ctx, material)
    raise PolicyError(f"unknown policy kind {kind!r}")
