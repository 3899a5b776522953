"""Role-tagged key bundle files.

Three bundle kinds move key material between the parties:

* owner: a stream's durable secrets (master key, token key, mask
  secrets) plus schema and profile; feeds stream-init/owner-encrypt
  and policy issuance
* relay (cloud): per-policy transform keys, join session tokens, and
  the public cumulative offset; everything in it is safe to hand to
  the untrusted relay
* user: per-policy decryption secrets

Record types are split by number range: anything at or above
SECRET_FLOOR is decryption-capable material.  The relay loader
rejects wrong role tags and, independently, any secret-range record,
so a mislabeled or hand-edited bundle cannot smuggle keys into the
relay process.
"""

from __future__ import annotations

import struct

from .abe import AbeMaster, tk_from_bytes, tk_to_bytes
from .algebra import BilinearContext, GTElement, scalar_from_bytes, scalar_to_bytes
from .detcipher import DetKey
from .errors import BundleError, BundleRoleError
from .operators import (
    CloudPolicyMaterial,
    EncProfile,
    PolicySpec,
    StreamOwner,
    UserPolicyMaterial,
)
from .operators.owner import OwnerKeys
from .policy import StreamSchema, universe_for

MAGIC = b"CSB1"

ROLE_OWNER = 1
ROLE_CLOUD = 2
ROLE_USER = 3

RT_SPEC = 1
RT_STREAM_IDS = 2
RT_SCHEMA = 3
RT_PROFILE = 4
RT_TK = 5
RT_JOIN_TOKEN = 6
RT_AGG_OFFSET = 7
RT_FIELD_WIDTHS = 8

SECRET_FLOOR = 64
RT_USER_SECRET = 64
RT_AGG_SECRET = 65
RT_ABE_MASTER = 66
RT_DET_KEY = 67
RT_AGG1_SECRET = 68
RT_AGG3_SECRET = 69


def _pack_str(s: str) -> bytes:
    raw = s.encode()
    return struct.pack(">H", len(raw)) + raw


def _unpack_str(data: bytes, off: int):
    (n,) = struct.unpack_from(">H", data, off)
    off += 2
    raw = data[off : off + n]
    if len(raw) != n:
        raise BundleError("truncated string")
    return raw.decode(), off + n


def _assemble(role: int, ident: str, records) -> bytes:
    out = [MAGIC, struct.pack(">B", role), _pack_str(ident)]
    out.append(struct.pack(">H", len(records)))
    for rtype, payload in records:
        out.append(struct.pack(">BI", rtype, len(payload)))
        out.append(payload)
    return b"".join(out)


def bundle_records(data: bytes):
    """(role, ident, [(rtype, payload), ...]) without interpreting records."""
    if data[:4] != MAGIC:
        raise BundleError("not a key bundle")
    try:
        (role,) = struct.unpack_from(">B", data, 4)
        ident, off = _unpack_str(data, 5)
        (n,) = struct.unpack_from(">H", data, off)
        off += 2
        records = []
        for _ in range(n):
            rtype, length = struct.unpack_from(">BI", data, off)
            off += 5
            payload = data[off : off + length]
            if len(payload) != length:
                raise BundleError("truncated record")
            records.append((rtype, payload))
            off += length
    except struct.error as exc:
        raise BundleError(f"malformed bundle: {exc}") from exc
    if off != len(data):
        raise BundleError("trailing bytes after bundle")
    return role, ident, records


# ----------------------------------------------------------- cloud

def write_cloud_bundle(material: CloudPolicyMaterial) -> bytes:
    records = [(RT_SPEC, material.spec.to_bytes())]
    ids = [struct.pack(">B", len(material.stream_ids))]
    ids.extend(_pack_str(s) for s in material.stream_ids)
    records.append((RT_STREAM_IDS, b"".join(ids)))
    for name in sorted(material.tks):
        records.append((RT_TK, _pack_str(name) + tk_to_bytes(material.tks[name])))
    for side, token in enumerate(material.join_tokens):
        records.append(
            (RT_JOIN_TOKEN, struct.pack(">B", side) + scalar_to_bytes(token))
        )
    if material.agg_offset is not None:
        records.append((RT_AGG_OFFSET, material.agg_offset.to_bytes()))
    return _assemble(ROLE_CLOUD, material.policy_id, records)


def load_cloud_bundle(data: bytes) -> CloudPolicyMaterial:
    role, ident, records = bundle_records(data)
    for rtype, _ in records:
        if rtype >= SECRET_FLOOR:
            raise BundleRoleError(
                f"record type {rtype} is decryption material; refusing to load "
                "it into the relay"
            )
    if role != ROLE_CLOUD:
        raise BundleRoleError(f"bundle role {role} is not a relay bundle")
    spec = None
    stream_ids = ()
    tks = {}
    join_tokens = {}
    agg_offset = None
    for rtype, payload in records:
        if rtype == RT_SPEC:
            spec = PolicySpec.from_bytes(payload)
        elif rtype == RT_STREAM_IDS:
            (n,) = struct.unpack_from(">B", payload, 0)
            off = 1
            ids = []
            for _ in range(n):
                sid, off = _unpack_str(payload, off)
                ids.append(sid)
            stream_ids = tuple(ids)
        elif rtype == RT_TK:
            name, off = _unpack_str(payload, 0)
            tks[name] = tk_from_bytes(payload[off:])
        elif rtype == RT_JOIN_TOKEN:
            side = payload[0]
            join_tokens[side] = scalar_from_bytes(payload[1:])
        elif rtype == RT_AGG_OFFSET:
            agg_offset = GTElement.from_bytes(payload)
        else:
            raise BundleError(f"unexpected record type {rtype} in relay bundle")
    if spec is None or not stream_ids:
        raise BundleError("relay bundle missing policy spec or stream ids")
    return CloudPolicyMaterial(
        ident,
        spec,
        stream_ids,
        tks,
        tuple(join_tokens[i] for i in sorted(join_tokens)),
        agg_offset,
    )


# ------------------------------------------------------------ user

def write_user_bundle(material: UserPolicyMaterial) -> bytes:
    records = [(RT_SPEC, material.spec.to_bytes())]
    ids = [struct.pack(">B", len(material.stream_ids))]
    ids.extend(_pack_str(s) for s in material.stream_ids)
    records.append((RT_STREAM_IDS, b"".join(ids)))
    widths = [struct.pack(">B", len(material.field_widths))]
    for name in sorted(material.field_widths):
        widths.append(_pack_str(name) + struct.pack(">B", material.field_widths[name]))
    records.append((RT_FIELD_WIDTHS, b"".join(widths)))
    for name in sorted(material.secrets):
        records.append(
            (RT_USER_SECRET, _pack_str(name) + scalar_to_bytes(material.secrets[name]))
        )
    if material.agg_secret is not None:
        records.append((RT_AGG_SECRET, scalar_to_bytes(material.agg_secret)))
    return _assemble(ROLE_USER, material.policy_id, records)


def load_user_bundle(data: bytes) -> UserPolicyMaterial:
    role, ident, records = bundle_records(data)
    if role != ROLE_USER:
        raise BundleRoleError(f"bundle role {role} is not a user bundle")
    spec = None
    stream_ids = ()
    secrets = {}
    field_widths = {}
    agg_secret = None
    for rtype, payload in records:
        if rtype == RT_SPEC:
            spec = PolicySpec.from_bytes(payload)
        elif rtype == RT_STREAM_IDS:
            (n,) = struct.unpack_from(">B", payload, 0)
            off = 1
            ids = []
            for _ in range(n):
                sid, off = _unpack_str(payload, off)
                ids.append(sid)
            stream_ids = tuple(ids)
        elif rtype == RT_FIELD_WIDTHS:
            (n,) = struct.unpack_from(">B", payload, 0)
            off = 1
            for _ in range(n):
                name, off = _unpack_str(payload, off)
                field_widths[name] = payload[off]
                off += 1
        elif rtype == RT_USER_SECRET:
            name, off = _unpack_str(payload, 0)
            secrets[name] = scalar_from_bytes(payload[off:])
        elif rtype == RT_AGG_SECRET:
            agg_secret = scalar_from_bytes(payload)
        else:
            raise BundleError(f"unexpected record type {rtype} in user bundle")
    if spec is None or not stream_ids:
        raise BundleError("user bundle missing policy spec or stream ids")
    return UserPolicyMaterial(ident, spec, stream_ids, secrets, field_widths, agg_secret)


# ----------------------------------------------------------- owner

def write_owner_bundle(owner: StreamOwner) -> bytes:
    keys = owner.export_keys()
    records = [
        (RT_SCHEMA, owner.schema.to_bytes()),
        (RT_PROFILE, owner.profile.to_bytes()),
    ]
    master = [scalar_to_bytes(keys.master.y)]
    universe = owner.universe.attrs
    master.append(struct.pack(">H", len(universe)))
    master.extend(scalar_to_bytes(keys.master.t[a]) for a in universe)
    records.append((RT_ABE_MASTER, b"".join(master)))
    if keys.det_key is not None:
        records.append((RT_DET_KEY, keys.det_key.to_bytes()))
    for name in sorted(keys.agg1):
        for ws in sorted(keys.agg1[name]):
            records.append(
                (
                    RT_AGG1_SECRET,
                    _pack_str(name)
                    + struct.pack(">H", ws)
                    + scalar_to_bytes(keys.agg1[name][ws]),
                )
            )
    for name in sorted(keys.agg3):
        records.append((RT_AGG3_SECRET, _pack_str(name) + scalar_to_bytes(keys.agg3[name])))
    return _assemble(ROLE_OWNER, owner.stream_id, records)


def load_owner_bundle(ctx: BilinearContext, data: bytes) -> StreamOwner:
    role, ident, records = bundle_records(data)
    if role != ROLE_OWNER:
        raise BundleRoleError(f"bundle role {role} is not an owner bundle")
    schema = profile = master_blob = det_blob = None
    agg1 = {}
    agg3 = {}
    for rtype, payload in records:
        if rtype == RT_SCHEMA:
            schema = StreamSchema.from_bytes(payload)
        elif rtype == RT_PROFILE:
            profile = EncProfile.from_bytes(payload)
        elif rtype == RT_ABE_MASTER:
            master_blob = payload
        elif rtype == RT_DET_KEY:
            det_blob = payload
        elif rtype == RT_AGG1_SECRET:
            name, off = _unpack_str(payload, 0)
            (ws,) = struct.unpack_from(">H", payload, off)
            agg1.setdefault(name, {})[ws] = scalar_from_bytes(payload[off + 2 :])
        elif rtype == RT_AGG3_SECRET:
            name, off = _unpack_str(payload, 0)
            agg3[name] = scalar_from_bytes(payload[off:])
        else:
            raise BundleError(f"unexpected record type {rtype} in owner bundle")
    if schema is None or profile is None or master_blob is None:
        raise BundleError("owner bundle missing schema, profile, or master key")
    universe = universe_for(schema)
    y = scalar_from_bytes(master_blob[:32])
    (n,) = struct.unpack_from(">H", master_blob, 32)
    if n != len(universe):
        raise BundleError("master key does not match the schema's universe")
    if len(master_blob) != 34 + 32 * n:
        raise BundleError("bad master key length")
    t = {}
    for i, attr in enumerate(universe.attrs):
        off = 34 + 32 * i
        t[attr] = scalar_from_bytes(master_blob[off : off + 32])
    det_key = None
    if det_blob is not None:
        if profile.join_field is None:
            raise BundleError("token key present but profile declares no join field")
        domain = 1 << schema.width_of(profile.join_field)
        det_key = DetKey.from_bytes(det_blob, domain)
    keys = OwnerKeys(AbeMaster(y, t), det_key, agg1, agg3)
    return StreamOwner(ctx, ident, schema, profile, keys=keys)
