"""Stream schemas and the attribute universe they induce.

A stream schema fixes the numeric fields of a tuple, the digit bases
used to encode them, and the window sizes the owner is willing to serve.
Everything the crypto layer needs is derived from the schema: the full
attribute universe (all digit attributes of all fields, the per-field
markers, and one window marker per supported size) in a deterministic
order, so that owner, cloud and users agree on attribute indices without
further coordination.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..abe import AttributeIndex
from ..errors import PolicyError, WireFormatError
from .bits import DEFAULT_BASES, digit_attr, digits_for, wildcard_attr

DEFAULT_WINDOWS = (4, 8, 16, 32)

_SCHEMA_VERSION = 1


def map_attr(field: str) -> str:
    """Marker granting access to the field's projected value."""
    return f"map|{field}"


def join_attr(field: str) -> str:
    """Marker granting access to the field's join token."""
    return f"join|{field}"


def window_attr(ws: int) -> str:
    """Marker granting access to components of window size ``ws``."""
    return f"window|{ws}"


@dataclass(frozen=True)
class AttributeSpec:
    width: int = 8

    def __post_init__(self):
        if not 1 <= self.width <= 32:
            raise PolicyError(f"field width must be in [1, 32], got {self.width}")


TS_FIELD = "ts"


@dataclass(frozen=True)
class StreamSchema:
    fields: dict
    bases: tuple = DEFAULT_BASES
    windows: tuple = DEFAULT_WINDOWS
    ts_width: int = 16

    def __post_init__(self):
        if not self.fields:
            raise PolicyError("schema needs at least one field")
        for name, spec in self.fields.items():
            if not name or "|" in name or "," in name or "=" in name:
                raise PolicyError(f"bad field name {name!r}")
            if name == TS_FIELD:
                raise PolicyError(f"{TS_FIELD!r} is reserved for the timestamp")
            if not isinstance(spec, AttributeSpec):
                raise PolicyError(f"field {name!r} needs an AttributeSpec")
        if len(set(self.bases)) != len(self.bases) or any(b < 2 for b in self.bases):
            raise PolicyError(f"bad digit bases {self.bases!r}")
        for ws in self.windows:
            if ws < 1:
                raise PolicyError(f"bad window size {ws}")
        if not 1 <= self.ts_width <= 32:
            raise PolicyError(f"ts width must be in [1, 32], got {self.ts_width}")

    @classmethod
    def of(cls, *names, width=8, bases=DEFAULT_BASES, windows=DEFAULT_WINDOWS, ts_width=16):
        """Schema with uniform field width, fields in the given order."""
        return cls(
            {name: AttributeSpec(width) for name in names},
            bases=tuple(bases),
            windows=tuple(windows),
            ts_width=ts_width,
        )

    def width_of(self, field: str) -> int:
        if field == TS_FIELD:
            return self.ts_width
        try:
            return self.fields[field].width
        except KeyError:
            raise PolicyError(f"unknown field {field!r}") from None

    def to_bytes(self) -> bytes:
        out = [struct.pack(">BH", _SCHEMA_VERSION, len(self.fields))]
        for name, spec in self.fields.items():
            raw = name.encode()
            out.append(struct.pack(">H", len(raw)) + raw + struct.pack(">B", spec.width))
        out.append(struct.pack(">B", len(self.bases)) + bytes(self.bases))
        out.append(struct.pack(">H", len(self.windows)))
        out.extend(struct.pack(">H", ws) for ws in self.windows)
        out.append(struct.pack(">B", self.ts_width))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "StreamSchema":
        try:
            version, nfields = struct.unpack_from(">BH", data, 0)
            if version != _SCHEMA_VERSION:
                raise WireFormatError(f"unsupported schema version {version}")
            off = 3
            fields = {}
            for _ in range(nfields):
                (nlen,) = struct.unpack_from(">H", data, off)
                off += 2
                name = data[off : off + nlen].decode()
                if len(name.encode()) != nlen:
                    raise WireFormatError("truncated field name")
                off += nlen
                (width,) = struct.unpack_from(">B", data, off)
                off += 1
                fields[name] = AttributeSpec(width)
            (nbases,) = struct.unpack_from(">B", data, off)
            off += 1
            bases = tuple(data[off : off + nbases])
            if len(bases) != nbases:
                raise WireFormatError("truncated base list")
            off += nbases
            (nwin,) = struct.unpack_from(">H", data, off)
            off += 2
            windows = tuple(
                struct.unpack_from(">H", data, off + 2 * i)[0] for i in range(nwin)
            )
            off += 2 * nwin
            (ts_width,) = struct.unpack_from(">B", data, off)
            off += 1
            if off != len(data):
                raise WireFormatError("trailing bytes after schema")
            return cls(fields, bases=bases, windows=windows, ts_width=ts_width)
        except (struct.error, UnicodeDecodeError, PolicyError) as exc:
            raise WireFormatError(f"bad schema encoding: {exc}") from exc


def universe_for(schema: StreamSchema) -> AttributeIndex:
    """Deterministic attribute universe of a schema."""
    attrs = set()
    widths = {name: spec.width for name, spec in schema.fields.items()}
    widths[TS_FIELD] = schema.ts_width
    for name, width in widths.items():
        attrs.add(wildcard_attr(name))
        attrs.add(map_attr(name))
        attrs.add(join_attr(name))
        for base in schema.bases:
            for pos in range(digits_for(base, width)):
                for digit in range(base):
                    attrs.add(digit_attr(name, base, pos, digit))
    for ws in set(schema.windows) | {1}:
        attrs.add(window_attr(ws))
    return AttributeIndex(sorted(attrs))
