"""Owner side: per-stream key material and tuple encryption.

A StreamOwner holds the stream's ABE master, the deterministic
equality-token key for its join field, and the running mask state for
its aggregation profiles.  ``encrypt`` turns one plaintext tuple into a
SecureTuple carrying exactly the components the profile declares:

* one ABE component per projected field (map), with the filter
  attribute sets attached when the stream is filterable
* one hybrid whole-tuple component under the union of filter attribute
  sets, plus plaintext routing hints
* a whole-tuple join payload under the join marker, with the equality
  token either bare or (for filter-gated joins) hybrid-wrapped
* per aggregated field: the window=1 record component and, per variant,
  masked window components, boundary sums, or the masked-value plus
  cumulative-mask pair

Aggregation requires consecutive timestamps (a window can only be
closed on its final tuple); other layouts accept any increasing ts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..abe import AbeMaster, AbePublic, abe_gen, encrypt, encrypt_bytes
from ..algebra import R, BilinearContext, random_scalar
from ..detcipher import DetCipher, DetKey
from ..errors import PolicyError, StreamStateError
from ..policy import (
    TS_FIELD,
    StreamSchema,
    attr_set,
    join_attr,
    map_attr,
    universe_for,
    window_attr,
)
from .model import (
    COMP_ABE,
    COMP_DET,
    COMP_HYBRID,
    LABEL_FILTER,
    LABEL_JOIN_PAYLOAD,
    LABEL_JOIN_TOKEN,
    LABEL_JOIN_WTOKEN,
    DataTuple,
    EncProfile,
    SecureTuple,
    TupleComponent,
    label_agg1,
    label_agg2,
    label_agg3_cum,
    label_agg3_val,
    label_map,
    label_rec,
)


@dataclass
class OwnerKeys:
    """The owner's durable secrets, detached from running stream state.

    Restoring from these starts a fresh stream run (mask accumulators
    and the cumulative reset); the long-term material that policies and
    tokens bind to is preserved.
    """

    master: AbeMaster
    det_key: object = None
    agg1: dict = field(default_factory=dict)
    agg3: dict = field(default_factory=dict)


class _Agg1State:
    def __init__(self, windows, secrets=None):
        self.secrets = secrets or {ws: random_scalar() for ws in windows}
        self.acc = {ws: 0 for ws in self.secrets}

    def mask(self, ws: int, ts: int) -> int:
        if ts % ws == ws - 1:
            r = (self.secrets[ws] - self.acc[ws]) % R
            self.acc[ws] = 0
            return r
        r = random_scalar()
        self.acc[ws] = (self.acc[ws] + r) % R
        return r


class _Agg2State:
    def __init__(self, windows):
        self.sums = {ws: 0 for ws in windows}


class _Agg3State:
    def __init__(self, s_star=None):
        self.s_star = s_star if s_star is not None else random_scalar()
        self.cum = 0

    def advance(self) -> int:
        r = random_scalar()
        self.cum = (self.cum + r) % R
        return r


class StreamOwner:
    """Single-writer encryptor and key authority for one stream."""

    def __init__(
        self,
        ctx: BilinearContext,
        stream_id: str,
        schema: StreamSchema,
        profile: EncProfile,
        join_secret: bytes | None = None,
        keys: OwnerKeys | None = None,
    ):
        profile.validate(schema)
        self.ctx = ctx
        self.stream_id = stream_id
        self.schema = schema
        self.profile = profile
        self.universe = universe_for(schema)
        if keys is None:
            self.public, self.master = abe_gen(ctx, self.universe.attrs)
        else:
            self.master = keys.master
            missing = [a for a in self.universe.attrs if a not in keys.master.t]
            if missing:
                raise PolicyError(f"saved keys do not cover {missing[:3]}")
            self.public = AbePublic(
                ctx.gt_pow(self.master.y),
                {a: ctx.g1_pow(t_a) for a, t_a in self.master.t.items()},
            )
        self.det = None
        self.det_key = None
        if profile.join_field is not None:
            domain = 1 << schema.width_of(profile.join_field)
            if keys is not None and keys.det_key is not None:
                self.det_key = keys.det_key
            elif join_secret is not None:
                self.det_key = DetKey.generate(k1=join_secret, domain=domain)
            else:
                raise PolicyError("join profile needs the shared equality-token secret")
            self.det = DetCipher(ctx, self.det_key)
        saved1 = keys.agg1 if keys else {}
        saved3 = keys.agg3 if keys else {}
        self._agg1 = {}
        self._agg2 = {}
        self._agg3 = {}
        for agg in profile.aggregates:
            if agg.variant == 1:
                self._agg1[agg.field] = _Agg1State(agg.windows, saved1.get(agg.field))
            elif agg.variant == 2:
                self._agg2[agg.field] = _Agg2State(agg.windows)
            else:
                self._agg3[agg.field] = _Agg3State(saved3.get(agg.field))
        self._last_ts = None

    def export_keys(self) -> OwnerKeys:
        return OwnerKeys(
            self.master,
            self.det_key,
            {name: dict(state.secrets) for name, state in self._agg1.items()},
            {name: state.s_star for name, state in self._agg3.items()},
        )

    @property
    def needs_dense_ts(self) -> bool:
        return bool(self.profile.aggregates)

    def agg1_secret(self, field: str, ws: int) -> int:
        return self._agg1[field].secrets[ws]

    def agg3_offset_element(self, field: str):
        """Public initialization value gT^(s*) for the cloud's cumulative."""
        return self.ctx.gt_pow(self._agg3[field].s_star)

    def _check_ts(self, ts: int):
        if self._last_ts is None:
            self._first_ts = ts
        else:
            if ts <= self._last_ts:
                raise StreamStateError(f"ts {ts} not after {self._last_ts}")
            if self.needs_dense_ts and ts != self._last_ts + 1:
                raise StreamStateError(
                    f"aggregation needs consecutive ts, got {ts} after {self._last_ts}"
                )
        self._last_ts = ts

    def _filter_attrs(self, tup: DataTuple) -> set:
        attrs = set()
        for name in self.profile.filter_fields:
            v = tup.ts if name == TS_FIELD else tup.values[name]
            attrs |= attr_set(name, v, self.schema.bases, self.schema.width_of(name))
        return attrs

    def _ts_attrs(self, ts: int) -> set:
        return attr_set("ts", ts, self.schema.bases, self.schema.ts_width)

    def encrypt(self, tup: DataTuple) -> SecureTuple:
        tup.check_schema(self.schema)
        self._check_ts(tup.ts)
        ctx, schema, profile = self.ctx, self.schema, self.profile
        filter_attrs = self._filter_attrs(tup)
        comps = {}

        def add(label, kind, **kw):
            comps[label] = TupleComponent(label, kind, **kw)

        for name in profile.map_fields:
            ct = encrypt(
                ctx,
                self.public,
                ctx.gt_pow(tup.values[name]),
                {map_attr(name)} | filter_attrs,
            )
            add(label_map(name), COMP_ABE, ct=ct)

        if profile.filter_fields:
            payload = tup.format().encode()
            ct, blob = encrypt_bytes(ctx, self.public, payload, filter_attrs)
            add(LABEL_FILTER, COMP_HYBRID, ct=ct, blob=blob)

        if profile.join_field is not None:
            token = self.det.encrypt(tup.values[profile.join_field])
            payload = tup.format().encode()
            ct, blob = encrypt_bytes(
                ctx, self.public, payload, {join_attr(profile.join_field)}
            )
            add(LABEL_JOIN_PAYLOAD, COMP_HYBRID, ct=ct, blob=blob)
            if profile.wrap_join_token:
                wct, wblob = encrypt_bytes(
                    ctx,
                    self.public,
                    token.to_bytes(),
                    {join_attr(profile.join_field)} | filter_attrs,
                )
                add(LABEL_JOIN_WTOKEN, COMP_HYBRID, ct=wct, blob=wblob)
            else:
                add(LABEL_JOIN_TOKEN, COMP_DET, det=token)

        ts_attrs = None
        for agg in profile.aggregates:
            v = tup.values[agg.field]
            rec = encrypt(
                ctx, self.public, ctx.gt_pow(v), {map_attr(agg.field), window_attr(1)}
            )
            add(label_rec(agg.field), COMP_ABE, ct=rec)
            if agg.variant == 1:
                state = self._agg1[agg.field]
                for ws in agg.windows:
                    if ws == 1:
                        continue
                    masked = ctx.gt_pow((v + state.mask(ws, tup.ts)) % R)
                    ct = encrypt(
                        ctx, self.public, masked, {map_attr(agg.field), window_attr(ws)}
                    )
                    add(label_agg1(agg.field, ws), COMP_ABE, ct=ct)
            elif agg.variant == 2:
                state = self._agg2[agg.field]
                for ws in agg.windows:
                    if ws == 1:
                        continue
                    state.sums[ws] += v
                    if tup.ts % ws == ws - 1:
                        start = tup.ts - ws + 1
                        if start < self._first_ts:
                            # the stream joined mid-window; drop the partial sum
                            state.sums[ws] = 0
                            continue
                        ct = encrypt(
                            ctx,
                            self.public,
                            ctx.gt_pow(state.sums[ws]),
                            {map_attr(agg.field), window_attr(ws)} | self._ts_attrs(start),
                        )
                        add(label_agg2(agg.field, ws), COMP_ABE, ct=ct)
                        state.sums[ws] = 0
            else:
                if ts_attrs is None:
                    ts_attrs = self._ts_attrs(tup.ts)
                state = self._agg3[agg.field]
                r = state.advance()
                val = encrypt(
                    ctx,
                    self.public,
                    ctx.gt_pow((v + r) % R),
                    {map_attr(agg.field)} | ts_attrs,
                )
                add(label_agg3_val(agg.field), COMP_ABE, ct=val)
                cum = encrypt(
                    ctx,
                    self.public,
                    ctx.gt_pow((state.s_star + state.cum) % R),
                    {map_attr("ts")} | ts_attrs,
                )
                add(label_agg3_cum(agg.field), COMP_ABE, ct=cum)

        hints = {
            name: tup.values[name]
            for name in profile.filter_fields
            if name != TS_FIELD
        }
        return SecureTuple(self.stream_id, tup.ts, hints, comps)
