"""User side: final decryption of transformed policy outputs.

Every path finishes with one cheap step per output part: a single GT
exponentiation followed by a table lookup for group-encoded values, or
one AEAD open for hybrid payloads.  The heavy pairing work happened at
the relay; nothing here touches the access trees.
"""

from __future__ import annotations

from ..abe import dec, dec_bytes
from ..algebra import BilinearContext
from ..errors import WireFormatError
from .keys import UserPolicyMaterial
from .model import AggOut, DataTuple, JoinOut, RecordOut


class PolicyDecryptor:
    def __init__(self, ctx: BilinearContext, material: UserPolicyMaterial):
        self.ctx = ctx
        self.material = material
        self.spec = material.spec
        self._unmask = None
        if material.agg_secret is not None:
            self._unmask = ctx.gt_pow(material.agg_secret).inverse()

    def _z(self, role: str = "main:payload"):
        return self.material.secrets[role]

    def _field_value(self, part, z) -> int:
        return self.ctx.gt_dlog(dec(part.tct, z))

    def _record_from_blob(self, part, z) -> RecordOut:
        line = dec_bytes(part.tct, z, part.blob).decode()
        tup = DataTuple.parse(line)
        return RecordOut(tup.ts, dict(tup.values))

    def feed(self, item) -> list:
        if item.policy_id != self.material.policy_id:
            raise WireFormatError(
                f"output for {item.policy_id!r} fed to {self.material.policy_id!r}"
            )
        kind = self.spec.kind
        if kind in ("map", "map_filter"):
            return self._projected(item)
        if kind == "filter":
            return self._filtered(item)
        if kind == "join":
            return self._joined(item)
        if kind == "map_filter_join":
            return self._projected_join(item)
        return self._aggregated(item)

    def _projected(self, item):
        z = self._z()
        values = {p.label: self._field_value(p, z) for p in item.parts}
        return [RecordOut(item.meta[0], values)]

    def _filtered(self, item):
        return [self._record_from_blob(item.parts[0], self._z())]

    def _joined(self, item):
        parts = {p.label: p for p in item.parts}
        return [
            JoinOut(
                self._record_from_blob(parts["left:tuple"], self._z("left:payload")),
                self._record_from_blob(parts["right:tuple"], self._z("right:payload")),
            )
        ]

    def _projected_join(self, item):
        sides = {"left": {}, "right": {}}
        for part in item.parts:
            prefix, _, name = part.label.partition(":")
            sides[prefix][name] = self._field_value(part, self._z(f"{prefix}:payload"))
        left_ts, right_ts = item.meta
        return [
            JoinOut(RecordOut(left_ts, sides["left"]), RecordOut(right_ts, sides["right"]))
        ]

    def _aggregated(self, item):
        parts = {p.label: p for p in item.parts}
        z = self._z()
        if "masks" in parts:
            total_elem = dec(parts["sum"].tct, z) / dec(parts["masks"].tct, z)
        else:
            total_elem = dec(parts["sum"].tct, z)
            if self._unmask is not None:
                total_elem = total_elem * self._unmask
        start, end = item.meta
        total = self.ctx.gt_dlog(total_elem)
        return [AggOut(self.spec.agg_field, start, end, total, end - start)]
