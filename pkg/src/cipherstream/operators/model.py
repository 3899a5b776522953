"""Shared data model of the secure operators.

Plaintext tuples, the owner-side encryption profile (which component
layouts a stream carries), policy descriptions, the encrypted tuple
container, and the output records both the reference engine and the
secure pipeline produce.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

from ..abe import AbeCiphertext, AttributeIndex, ct_from_bytes, ct_to_bytes
from ..algebra import G1Element
from ..errors import DomainError, PolicyError, WireFormatError
from ..policy import TS_FIELD, Predicate, StreamSchema, format_predicates, parse_predicates


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

COMP_ABE = 0
COMP_HYBRID = 1
COMP_DET = 2

LABEL_FILTER = "filter:payload"
LABEL_JOIN_PAYLOAD = "join:payload"
LABEL_JOIN_TOKEN = "join:token"
LABEL_JOIN_WTOKEN = "join:wtoken"


def label_map(field: str) -> str:
    return f"map:{field}"


def label_rec(field: str) -> str:
    return f"rec:{field}"


def label_agg1(field: str, ws: int) -> str:
    return f"agg1:{field}:{ws}"


def label_agg2(field: str, ws: int) -> str:
    return f"agg2:{field}:{ws}"


def label_agg3_val(field: str) -> str:
    return f"agg3:{field}:val"


def label_agg3_cum(field: str) -> str:
    return f"agg3:{field}:cum"

POLICY_KINDS = (
    "map",
    "filter",
    "join",
    "agg1",
    "agg2",
    "agg3",
    "map_filter",
    "map_filter_join",
    "filter_agg2",
    "filter_agg3",
)

AGG_VARIANTS = (1, 2, 3)


@dataclass(frozen=True)
class DataTuple:
    ts: int
    values: dict

    def __post_init__(self):
        if self.ts < 0:
            raise DomainError(f"negative ts {self.ts}")

    def check_schema(self, schema: StreamSchema):
        if set(self.values) != set(schema.fields):
            raise DomainError(
                f"tuple fields {sorted(self.values)} do not match schema "
                f"{sorted(schema.fields)}"
            )
        for name, v in self.values.items():
            width = schema.width_of(name)
            if not 0 <= v < (1 << width):
                raise DomainError(f"{name}={v} out of range for {width}-bit field")
        if self.ts >= (1 << schema.ts_width):
            raise DomainError(f"ts {self.ts} out of range for {schema.ts_width}-bit clock")

    @classmethod
    def parse(cls, line: str) -> "DataTuple":
        """One record per line: "ts,attr=value,..."."""
        parts = [p.strip() for p in line.strip().split(",") if p.strip()]
        if not parts:
            raise DomainError(f"empty tuple record {line!r}")
        try:
            ts = int(parts[0], 0)
        except ValueError:
            raise DomainError(f"bad ts in {line!r}") from None
        values = {}
        for part in parts[1:]:
            name, _, raw = part.partition("=")
            name = name.strip()
            if not name or not raw:
                raise DomainError(f"bad field assignment {part!r}")
            try:
                values[name] = int(raw.strip(), 0)
            except ValueError:
                raise DomainError(f"bad value in {part!r}") from None
        return cls(ts, values)

    def format(self) -> str:
        fields = ",".join(f"{k}={v}" for k, v in sorted(self.values.items()))
        return f"{self.ts},{fields}" if fields else str(self.ts)


@dataclass(frozen=True)
class AggProfile:
    field: str
    variant: int
    windows: tuple = ()

    def __post_init__(self):
        if self.variant not in AGG_VARIANTS:
            raise PolicyError(f"unknown aggregation variant {self.variant}")
        if self.variant in (1, 2) and not self.windows:
            raise PolicyError("variants 1 and 2 need explicit window sizes")
        if self.variant == 3 and self.windows:
            raise PolicyError("variant 3 serves any smooth window size; no fixed set")


@dataclass(frozen=True)
class EncProfile:
    """What the owner attaches to each tuple of a stream."""

    map_fields: tuple = ()
    filter_fields: tuple = ()
    join_field: str | None = None
    wrap_join_token: bool = False
    aggregates: tuple = ()

    def validate(self, schema: StreamSchema):
        known = set(schema.fields)
        for name in self.map_fields:
            if name not in known:
                raise PolicyError(f"map field {name!r} not in schema")
            if schema.width_of(name) > 16:
                raise PolicyError(f"map field {name!r} wider than 16 bits")
        for name in self.filter_fields:
            if name not in known and name != TS_FIELD:
                raise PolicyError(f"filter field {name!r} not in schema")
        if self.join_field is not None:
            if self.join_field not in known:
                raise PolicyError(f"join field {self.join_field!r} not in schema")
            if schema.width_of(self.join_field) > 16:
                raise PolicyError("join field wider than the equality-token domain")
        if self.wrap_join_token:
            if self.join_field is None:
                raise PolicyError("wrapped join token needs a join field")
            if not self.filter_fields:
                raise PolicyError("wrapped join token needs filter attributes to gate on")
        seen = set()
        for agg in self.aggregates:
            if agg.field not in known:
                raise PolicyError(f"aggregate field {agg.field!r} not in schema")
            if schema.width_of(agg.field) > 8:
                raise PolicyError(f"aggregate field {agg.field!r} wider than 8 bits")
            if (agg.field, agg.variant) in seen:
                raise PolicyError(f"duplicate aggregate profile for {agg.field!r}")
            seen.add((agg.field, agg.variant))
            for ws in agg.windows:
                if ws not in schema.windows and ws != 1:
                    raise PolicyError(f"window size {ws} not offered by the schema")

    def to_bytes(self) -> bytes:
        out = [struct.pack(">B", len(self.map_fields))]
        out.extend(_pack_str(f) for f in self.map_fields)
        out.append(struct.pack(">B", len(self.filter_fields)))
        out.extend(_pack_str(f) for f in self.filter_fields)
        out.append(struct.pack(">B", self.join_field is not None))
        if self.join_field is not None:
            out.append(_pack_str(self.join_field))
        out.append(struct.pack(">B", self.wrap_join_token))
        out.append(struct.pack(">B", len(self.aggregates)))
        for agg in self.aggregates:
            out.append(_pack_str(agg.field))
            out.append(struct.pack(">BB", agg.variant, len(agg.windows)))
            out.extend(struct.pack(">H", ws) for ws in agg.windows)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncProfile":
        try:
            profile, off = cls._read(data, 0)
        except struct.error as exc:
            raise WireFormatError(f"bad profile encoding: {exc}") from exc
        if off != len(data):
            raise WireFormatError("trailing bytes after profile")
        return profile

    @classmethod
    def _read(cls, data: bytes, off: int):
        (n,) = struct.unpack_from(">B", data, off)
        off += 1
        map_fields = []
        for _ in range(n):
            name, off = _unpack_str(data, off)
            map_fields.append(name)
        (n,) = struct.unpack_from(">B", data, off)
        off += 1
        filter_fields = []
        for _ in range(n):
            name, off = _unpack_str(data, off)
            filter_fields.append(name)
        (has_join,) = struct.unpack_from(">B", data, off)
        off += 1
        join_field = None
        if has_join:
            join_field, off = _unpack_str(data, off)
        wrap, naggs = struct.unpack_from(">BB", data, off)
        off += 2
        aggs = []
        for _ in range(naggs):
            name, off = _unpack_str(data, off)
            variant, nws = struct.unpack_from(">BB", data, off)
            off += 2
            windows = []
            for _ in range(nws):
                (ws,) = struct.unpack_from(">H", data, off)
                off += 2
                windows.append(ws)
            aggs.append(AggProfile(name, variant, tuple(windows)))
        profile = cls(
            tuple(map_fields),
            tuple(filter_fields),
            join_field,
            bool(wrap),
            tuple(aggs),
        )
        return profile, off


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    map_fields: tuple = ()
    predicates: tuple = ()
    predicates_right: tuple = ()
    join_field: str | None = None
    buffers: tuple = (0, 0)
    agg_field: str | None = None
    window: int = 0
    start: int = 0

    def right_predicates(self) -> tuple:
        return self.predicates_right or self.predicates

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise PolicyError(f"unknown policy kind {self.kind!r}")
        if self.kind in ("map", "map_filter", "map_filter_join") and not self.map_fields:
            raise PolicyError(f"{self.kind} policy needs projected fields")
        if self.kind in ("filter", "map_filter", "map_filter_join"):
            if not self.predicates:
                raise PolicyError(f"{self.kind} policy needs predicates")
        elif self.predicates:
            raise PolicyError(f"{self.kind} policies do not take attribute predicates")
        if "join" in self.kind:
            if self.join_field is None:
                raise PolicyError(f"{self.kind} policy needs a join field")
            if min(self.buffers) < 1:
                raise PolicyError("join buffers must hold at least one tuple")
        if self.kind.startswith("agg") or self.kind.startswith("filter_agg"):
            if self.agg_field is None:
                raise PolicyError(f"{self.kind} policy needs an aggregate field")
            if self.window < 1:
                raise PolicyError("window size must be >= 1")
        if self.start < 0:
            raise PolicyError("start index must be >= 0")
        if self.start > 0 and self.kind not in ("filter_agg2", "filter_agg3"):
            raise PolicyError("start index only applies to gated aggregation")
        if self.kind == "filter_agg2":
            if self.start % max(self.window, 1) != 0:
                raise PolicyError("variant-2 start must be aligned to the window grid")
            if self.window == 1 and self.start > 0:
                raise PolicyError(
                    "per-tuple sums carry no clock attributes; gate a start index "
                    "through the cumulative variant instead"
                )
        for p in self.predicates + self.predicates_right:
            if not isinstance(p, Predicate):
                raise PolicyError("predicates must be Predicate instances")
        if self.predicates_right and self.kind != "map_filter_join":
            raise PolicyError("per-side predicates only apply to filtered joins")

    def to_bytes(self) -> bytes:
        def pred_blob(preds):
            raw = format_predicates(preds).encode() if preds else b""
            return struct.pack(">I", len(raw)) + raw

        out = [_pack_str(self.kind), struct.pack(">B", len(self.map_fields))]
        out.extend(_pack_str(f) for f in self.map_fields)
        out.append(pred_blob(self.predicates))
        out.append(pred_blob(self.predicates_right))
        out.append(struct.pack(">B", self.join_field is not None))
        if self.join_field is not None:
            out.append(_pack_str(self.join_field))
        out.append(struct.pack(">II", *self.buffers))
        out.append(struct.pack(">B", self.agg_field is not None))
        if self.agg_field is not None:
            out.append(_pack_str(self.agg_field))
        out.append(struct.pack(">IQ", self.window, self.start))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PolicySpec":
        def read_preds(off):
            (n,) = struct.unpack_from(">I", data, off)
            off += 4
            raw = data[off : off + n]
            if len(raw) != n:
                raise WireFormatError("truncated predicate block")
            preds = parse_predicates(raw.decode()) if raw else ()
            return tuple(preds), off + n

        try:
            kind, off = _unpack_str(data, 0)
            (nmap,) = struct.unpack_from(">B", data, off)
            off += 1
            map_fields = []
            for _ in range(nmap):
                name, off = _unpack_str(data, off)
                map_fields.append(name)
            predicates, off = read_preds(off)
            predicates_right, off = read_preds(off)
            (has_join,) = struct.unpack_from(">B", data, off)
            off += 1
            join_field = None
            if has_join:
                join_field, off = _unpack_str(data, off)
            b0, b1 = struct.unpack_from(">II", data, off)
            off += 8
            (has_agg,) = struct.unpack_from(">B", data, off)
            off += 1
            agg_field = None
            if has_agg:
                agg_field, off = _unpack_str(data, off)
            window, start = struct.unpack_from(">IQ", data, off)
            off += 12
        except struct.error as exc:
            raise WireFormatError(f"bad policy encoding: {exc}") from exc
        if off != len(data):
            raise WireFormatError("trailing bytes after policy")
        return cls(
            kind,
            tuple(map_fields),
            predicates,
            predicates_right,
            join_field,
            (b0, b1),
            agg_field,
            window,
            start,
        )


@dataclass(frozen=True)
class TupleComponent:
    label: str
    kind: int
    ct: AbeCiphertext | None = None
    blob: bytes | None = None
    det: G1Element | None = None


@dataclass(frozen=True)
class SecureTuple:
    stream_id: str
    ts: int
    hints: dict
    comps: dict

    def component(self, label: str) -> TupleComponent | None:
        return self.comps.get(label)

    @staticmethod
    def peek_stream_id(data: bytes) -> str:
        """Stream id from an encoded tuple, without decoding components."""
        try:
            (slen,) = struct.unpack_from(">H", data, 0)
            return data[10 : 10 + slen].decode()
        except (struct.error, UnicodeDecodeError) as exc:
            raise WireFormatError(f"bad tuple header: {exc}") from exc

    @staticmethod
    def peek_ts(data: bytes) -> int:
        """Timestamp from an encoded tuple, without decoding components."""
        try:
            return struct.unpack_from(">HQ", data, 0)[1]
        except struct.error as exc:
            raise WireFormatError(f"bad tuple header: {exc}") from exc

    def to_bytes(self, index: AttributeIndex) -> bytes:
        sid = self.stream_id.encode()
        out = [struct.pack(">HQ", len(sid), self.ts), sid]
        out.append(struct.pack(">B", len(self.hints)))
        for name in sorted(self.hints):
            raw = name.encode()
            out.append(struct.pack(">H", len(raw)) + raw + struct.pack(">Q", self.hints[name]))
        out.append(struct.pack(">H", len(self.comps)))
        for label, comp in self.comps.items():
            raw = label.encode()
            out.append(struct.pack(">HB", len(raw), comp.kind) + raw)
            if comp.kind == COMP_DET:
                out.append(comp.det.to_bytes())
            else:
                ct = ct_to_bytes(comp.ct, index)
                out.append(struct.pack(">I", len(ct)) + ct)
                if comp.kind == COMP_HYBRID:
                    out.append(struct.pack(">I", len(comp.blob)) + comp.blob)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, index: AttributeIndex) -> "SecureTuple":
        try:
            slen, ts = struct.unpack_from(">HQ", data, 0)
            off = 10
            stream_id = data[off : off + slen].decode()
            off += slen
            (nhints,) = struct.unpack_from(">B", data, off)
            off += 1
            hints = {}
            for _ in range(nhints):
                (nlen,) = struct.unpack_from(">H", data, off)
                off += 2
                name = data[off : off + nlen].decode()
                off += nlen
                (hints[name],) = struct.unpack_from(">Q", data, off)
                off += 8
            (ncomps,) = struct.unpack_from(">H", data, off)
            off += 2
            comps = {}
            for _ in range(ncomps):
                llen, kind = struct.unpack_from(">HB", data, off)
                off += 3
                label = data[off : off + llen].decode()
                off += llen
                if kind == COMP_DET:
                    det = G1Element.from_bytes(data[off : off + 48])
                    off += 48
                    comps[label] = TupleComponent(label, kind, det=det)
                elif kind in (COMP_ABE, COMP_HYBRID):
                    (clen,) = struct.unpack_from(">I", data, off)
                    off += 4
                    ct = ct_from_bytes(data[off : off + clen], index)
                    off += clen
                    blob = None
                    if kind == COMP_HYBRID:
                        (blen,) = struct.unpack_from(">I", data, off)
                        off += 4
                        blob = bytes(data[off : off + blen])
                        if len(blob) != blen:
                            raise WireFormatError("truncated component blob")
                        off += blen
                    comps[label] = TupleComponent(label, kind, ct=ct, blob=blob)
                else:
                    raise WireFormatError(f"unknown component kind {kind}")
            if off != len(data):
                raise WireFormatError("trailing bytes after tuple")
            return cls(stream_id, ts, hints, comps)
        except (struct.error, UnicodeDecodeError, ValueError) as exc:
            raise WireFormatError(f"bad tuple encoding: {exc}") from exc


@dataclass(frozen=True)
class RecordOut:
    ts: int
    values: dict

    def __hash__(self):
        return hash((self.ts, tuple(sorted(self.values.items()))))


@dataclass(frozen=True)
class JoinOut:
    left: RecordOut
    right: RecordOut


@dataclass(frozen=True)
class AggOut:
    field: str
    window_start: int
    window_end: int
    total: int
    count: int

    @property
    def average(self) -> Fraction:
        return Fraction(self.total, self.count)
