"""Sliding-window encryption: window sums without per-tuple access.

Three constructions over the pairing target group, all tumbling windows
starting at index 0, trailing partial windows undelivered:

1. Per window size, a masked element stream gT^(m_i + r_i) where the
   masks of every complete window sum to the window secret SK_ws.  The
   subscriber multiplies a window together, strips gT^SK_ws and takes a
   discrete log.

2. One shared masked stream with fully random masks (never removable),
   plus an auxiliary encryption of each complete window's plaintext sum
   gT^s(M,ws) emitted at the boundary under the ws key.  Decryption
   touches only the auxiliary stream.

3. One shared masked stream, plus a running cumulative gT^(s* + sum of
   masks so far) encrypted under the ws key at that window's boundaries
   (and once up front with the first output, carrying the offset s*).
   Dividing consecutive cumulatives yields the window's mask sum, which
   unmasks the element product.

The auxiliary scheme is ElGamal over the target group.  Shared streams
are framed with ws = 0; every component is (ws, kind, payload) with
kind one of mask, auxsum, cumulative.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .algebra import (
    GTElement,
    R,
    BilinearContext,
    random_scalar,
    scalar_from_bytes,
    scalar_to_bytes,
)
from .errors import DlogRangeError, DomainError, StreamStateError, WireFormatError

KIND_MASK = 0
KIND_AUXSUM = 1
KIND_CUMULATIVE = 2
_KIND_NAMES = {KIND_MASK: "mask", KIND_AUXSUM: "auxsum", KIND_CUMULATIVE: "cumulative"}

SHARED_STREAM = 0

VALUE_BOUND = 1 << 8
SUM_TABLE_SIZE = 1 << 14


@dataclass(frozen=True)
class SweComponent:
    ws: int
    kind: int
    payload: tuple

    @property
    def kind_name(self) -> str:
        return _KIND_NAMES[self.kind]

    def to_bytes(self) -> bytes:
        body = b"".join(e.to_bytes() for e in self.payload)
        return struct.pack(">HB", self.ws, self.kind) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "SweComponent":
        try:
            ws, kind = struct.unpack_from(">HB", data, 0)
        except struct.error as exc:
            raise WireFormatError("short component header") from exc
        body = data[3:]
        if kind == KIND_MASK:
            sizes = (576,)
        elif kind in (KIND_AUXSUM, KIND_CUMULATIVE):
            sizes = (576, 576)
        else:
            raise WireFormatError(f"unknown component kind {kind}")
        if len(body) != sum(sizes):
            raise WireFormatError("component payload length mismatch")
        elems = []
        off = 0
        for size in sizes:
            try:
                elems.append(GTElement.from_bytes(body[off : off + size]))
            except ValueError as exc:
                raise WireFormatError(f"bad group element: {exc}") from exc
            off += size
        return cls(ws, kind, tuple(elems))


def _elgamal_enc(ctx: BilinearContext, pub: GTElement, msg: GTElement):
    k = random_scalar()
    return (ctx.gt_pow(k), msg * ctx.pow_cached(pub, k))


def _elgamal_dec(c1: GTElement, c2: GTElement, secret: int) -> GTElement:
    return c2 / c1**secret


@dataclass(frozen=True)
class SweUserKey:
    construction: int
    ws: int
    secret: int

    def to_bytes(self) -> bytes:
        return struct.pack(">BH", self.construction, self.ws) + scalar_to_bytes(self.secret)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SweUserKey":
        if len(data) != 35:
            raise WireFormatError("user key must be 35 bytes")
        construction, ws = struct.unpack_from(">BH", data, 0)
        if construction not in (1, 2, 3):
            raise WireFormatError(f"unknown construction {construction}")
        return cls(construction, ws, scalar_from_bytes(data[3:]))


class WindowKeySet:
    """Owner-side key material for one stream and a set of window sizes."""

    def __init__(self, construction: int, secrets: dict, s_star: int | None = None):
        if construction not in (1, 2, 3):
            raise DomainError(f"unknown construction {construction}")
        if not secrets:
            raise DomainError("window-size set is empty")
        for ws in secrets:
            if ws < 1:
                raise DomainError(f"bad window size {ws}")
        if construction == 3 and s_star is None:
            raise DomainError("construction 3 needs the cumulative offset")
        self.construction = construction
        self.secrets = dict(secrets)
        self.s_star = s_star

    @property
    def windows(self):
        return sorted(self.secrets)

    def user_key(self, ws: int) -> SweUserKey:
        if ws not in self.secrets:
            raise DomainError(f"window size {ws} not in key set")
        return SweUserKey(self.construction, ws, self.secrets[ws])

    def to_bytes(self) -> bytes:
        out = [struct.pack(">BB", self.construction, len(self.secrets))]
        for ws in self.windows:
            out.append(struct.pack(">H", ws) + scalar_to_bytes(self.secrets[ws]))
        if self.construction == 3:
            out.append(scalar_to_bytes(self.s_star))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "WindowKeySet":
        try:
            construction, n = struct.unpack_from(">BB", data, 0)
            off = 2
            secrets = {}
            for _ in range(n):
                (ws,) = struct.unpack_from(">H", data, off)
                secrets[ws] = scalar_from_bytes(data[off + 2 : off + 34])
                off += 34
            s_star = None
            if construction == 3:
                s_star = scalar_from_bytes(data[off : off + 32])
                off += 32
            if off != len(data):
                raise WireFormatError("trailing bytes after key set")
            return cls(construction, secrets, s_star)
        except (struct.error, ValueError, DomainError) as exc:
            raise WireFormatError(f"bad key set encoding: {exc}") from exc


def swe_gen(ctx: BilinearContext, windows, construction: int) -> WindowKeySet:
    secrets = {ws: random_scalar() for ws in set(windows)}
    s_star = random_scalar() if construction == 3 else None
    return WindowKeySet(construction, secrets, s_star)


class SweEncryptor:
    """Incremental encryptor; one instance per stream, single writer."""

    def __init__(self, ctx: BilinearContext, keys: WindowKeySet):
        self.ctx = ctx
        self.keys = keys
        self.index = 0
        if keys.construction == 1:
            self._mask_acc = {ws: 0 for ws in keys.secrets}
        elif keys.construction == 2:
            self._sum_acc = {ws: 0 for ws in keys.secrets}
        else:
            self._cum_masks = 0
            self._emitted_initial = False

    def _aux_pub(self, ws: int) -> GTElement:
        return self.ctx.gt_pow(self.keys.secrets[ws])

    def feed(self, value: int) -> list:
        if not 0 <= value < VALUE_BOUND:
            raise DomainError(f"value {value} out of domain [0, {VALUE_BOUND})")
        ctx, keys = self.ctx, self.keys
        out = []
        if keys.construction == 1:
            for ws, sk in keys.secrets.items():
                if self.index % ws == ws - 1:
                    r = (sk - self._mask_acc[ws]) % R
                    self._mask_acc[ws] = 0
                else:
                    r = random_scalar()
                    self._mask_acc[ws] = (self._mask_acc[ws] + r) % R
                out.append(SweComponent(ws, KIND_MASK, (ctx.gt_pow(value + r),)))
        elif keys.construction == 2:
            out.append(
                SweComponent(SHARED_STREAM, KIND_MASK, (ctx.gt_pow(value + random_scalar()),))
            )
            for ws in keys.secrets:
                self._sum_acc[ws] += value
                if self.index % ws == ws - 1:
                    ct = _elgamal_enc(ctx, self._aux_pub(ws), ctx.gt_pow(self._sum_acc[ws]))
                    out.append(SweComponent(ws, KIND_AUXSUM, ct))
                    self._sum_acc[ws] = 0
        else:
            if not self._emitted_initial:
                start = ctx.gt_pow(keys.s_star)
                for ws in keys.secrets:
                    ct = _elgamal_enc(ctx, self._aux_pub(ws), start)
                    out.append(SweComponent(ws, KIND_CUMULATIVE, ct))
                self._emitted_initial = True
            r = random_scalar()
            self._cum_masks = (self._cum_masks + r) % R
            out.append(SweComponent(SHARED_STREAM, KIND_MASK, (ctx.gt_pow(value + r),)))
            cum = ctx.gt_pow((keys.s_star + self._cum_masks) % R)
            for ws in keys.secrets:
                if self.index % ws == ws - 1:
                    ct = _elgamal_enc(ctx, self._aux_pub(ws), cum)
                    out.append(SweComponent(ws, KIND_CUMULATIVE, ct))
        self.index += 1
        return out


class SweDecryptor:
    """Incremental window-sum decryptor for one subscription."""

    def __init__(self, ctx: BilinearContext, key: SweUserKey, table_size: int = SUM_TABLE_SIZE):
        self.ctx = ctx
        self.key = key
        self.table_size = table_size
        self._prod = None
        self._count = 0
        self._prev_cum = None

    def _sum_of(self, elem: GTElement) -> int:
        try:
            return self.ctx.gt_dlog(elem, size=self.table_size)
        except DlogRangeError as exc:
            raise DlogRangeError(f"window sum unrecoverable (wrong key?): {exc}") from exc

    def feed(self, comp: SweComponent) -> list:
        key = self.key
        if key.construction == 1:
            if comp.kind != KIND_MASK or comp.ws != key.ws:
                return []
            self._prod = comp.payload[0] if self._prod is None else self._prod * comp.payload[0]
            self._count += 1
            if self._count == key.ws:
                sum_elem = self._prod / self.ctx.gt_pow(key.secret)
                self._prod, self._count = None, 0
                return [self._sum_of(sum_elem)]
            return []
        if key.construction == 2:
            if comp.kind != KIND_AUXSUM or comp.ws != key.ws:
                return []
            return [self._sum_of(_elgamal_dec(*comp.payload, key.secret))]
        if comp.kind == KIND_MASK and comp.ws == SHARED_STREAM:
            self._prod = comp.payload[0] if self._prod is None else self._prod * comp.payload[0]
            self._count += 1
            return []
        if comp.kind != KIND_CUMULATIVE or comp.ws != key.ws:
            return []
        cum = _elgamal_dec(*comp.payload, key.secret)
        if self._prev_cum is None:
            if self._count:
                raise StreamStateError("cumulative stream started mid-window")
            self._prev_cum = cum
            return []
        if self._count != key.ws:
            raise StreamStateError(
                f"boundary after {self._count} elements, window size {key.ws}"
            )
        mask_sum = cum / self._prev_cum
        sum_elem = self._prod / mask_sum
        self._prod, self._count, self._prev_cum = None, 0, cum
        return [self._sum_of(sum_elem)]


def swe_enc(ctx: BilinearContext, values, keys: WindowKeySet) -> list:
    enc = SweEncryptor(ctx, keys)
    out = []
    for v in values:
        out.extend(enc.feed(v))
    return out


def swe_dec(ctx: BilinearContext, ws: int, components, key: SweUserKey) -> list:
    if key.ws != ws:
        raise DomainError(f"key is for window size {key.ws}, not {ws}")
    dec = SweDecryptor(ctx, key)
    sums = []
    for comp in components:
        sums.extend(dec.feed(comp))
    return sums
