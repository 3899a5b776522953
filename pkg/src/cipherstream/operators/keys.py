"""Policy key issuance: one PolicySpec in, cloud and user material out.

The owner compiles the policy into access trees, blinds a transform key
per payload role with a fresh user secret z, and hands the cloud only
what it needs to transform: blinded transform keys, join session tokens
z_i = s / k_i (safe to expose, the paper sends them to the cloud), and
for variant-3 aggregation the public initialization value gT^(s*).
Everything that decrypts stays on the user side: the z secrets, the
variant-1 window secret, and the deterministic-token half key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..abe import AND, OR, TransformKey, TreeNode, keygen
from ..algebra import GTElement, R, random_scalar
from ..errors import PolicyError
from ..policy import (
    Predicate,
    StreamSchema,
    compile_predicate,
    cond_ge,
    join_attr,
    map_attr,
    window_attr,
)
from .model import EncProfile, PolicySpec
from .owner import StreamOwner

try:
    from gmpy2 import invert, mpz
except ImportError:  # pragma: no cover
    invert = mpz = None


@dataclass
class CloudPolicyMaterial:
    policy_id: str
    spec: PolicySpec
    stream_ids: tuple
    tks: dict = field(default_factory=dict)
    join_tokens: tuple = ()
    agg_offset: GTElement | None = None


@dataclass
class UserPolicyMaterial:
    policy_id: str
    spec: PolicySpec
    stream_ids: tuple
    secrets: dict = field(default_factory=dict)
    field_widths: dict = field(default_factory=dict)
    agg_secret: int | None = None


@dataclass
class IssuedPolicy:
    policy_id: str
    cloud: CloudPolicyMaterial
    user: UserPolicyMaterial


def _filter_tree(schema: StreamSchema, predicates) -> TreeNode:
    if not predicates:
        raise PolicyError("empty predicate list")
    trees = [
        compile_predicate(p, schema.bases, schema.width_of(p.field)) for p in predicates
    ]
    return trees[0] if len(trees) == 1 else AND(*trees)


def _map_tree(map_fields) -> TreeNode:
    leaves = [TreeNode.leaf(map_attr(name)) for name in map_fields]
    return leaves[0] if len(leaves) == 1 else OR(*leaves)


def _agg_tree(field_name: str, ws: int) -> TreeNode:
    return AND(TreeNode.leaf(map_attr(field_name)), TreeNode.leaf(window_attr(ws)))


def _ts_ge(schema: StreamSchema, k: int) -> TreeNode:
    return cond_ge("ts", k, schema.ts_width)


def _ts_mod(schema: StreamSchema, k: int, m: int) -> TreeNode:
    return compile_predicate(
        Predicate("ts", "mod", k, modulus=m), schema.bases, schema.ts_width
    )


def _agg3_tree(schema: StreamSchema, field_name: str, ws: int, start: int) -> TreeNode:
    value = TreeNode.leaf(map_attr(field_name))
    if start > 0:
        value = AND(value, _ts_ge(schema, start))
    boundary = [TreeNode.leaf(map_attr("ts"))]
    if start > 1:
        boundary.append(_ts_ge(schema, start - 1))
    if ws > 1:
        boundary.append(_ts_mod(schema, (start - 1) % ws, ws))
    return OR(value, boundary[0] if len(boundary) == 1 else AND(*boundary))


def _policy_trees(schema: StreamSchema, spec: PolicySpec, side: int = 0) -> dict:
    """Access trees per payload role; 'unwrap' is the cloud-openable one."""
    kind = spec.kind
    preds = spec.predicates if side == 0 else spec.right_predicates()
    if kind == "map":
        return {"payload": _map_tree(spec.map_fields)}
    if kind == "filter":
        return {"payload": _filter_tree(schema, preds)}
    if kind == "join":
        return {"payload": TreeNode.leaf(join_attr(spec.join_field))}
    if kind == "map_filter":
        return {"payload": AND(_map_tree(spec.map_fields), _filter_tree(schema, preds))}
    if kind == "map_filter_join":
        return {
            "payload": AND(_map_tree(spec.map_fields), _filter_tree(schema, preds)),
            "unwrap": AND(
                TreeNode.leaf(join_attr(spec.join_field)), _filter_tree(schema, preds)
            ),
        }
    if kind in ("agg1", "agg2"):
        return {"payload": _agg_tree(spec.agg_field, spec.window)}
    if kind == "agg3":
        if spec.window == 1:
            return {"payload": _agg_tree(spec.agg_field, 1)}
        return {"payload": _agg3_tree(schema, spec.agg_field, spec.window, 0)}
    if kind == "filter_agg2":
        tree = _agg_tree(spec.agg_field, spec.window)
        if spec.start > 0:
            tree = AND(tree, _ts_ge(schema, spec.start))
        return {"payload": tree}
    if kind == "filter_agg3":
        if spec.window == 1 and spec.start == 0:
            return {"payload": _agg_tree(spec.agg_field, 1)}
        return {"payload": _agg3_tree(schema, spec.agg_field, spec.window, spec.start)}
    raise PolicyError(f"unknown policy kind {kind!r}")


def _validate_against_profile(spec: PolicySpec, profile: EncProfile, side: int = 0):
    kind = spec.kind
    if spec.map_fields and not set(spec.map_fields) <= set(profile.map_fields):
        raise PolicyError("policy projects fields the stream does not encrypt for")
    preds = spec.predicates if side == 0 else spec.right_predicates()
    if kind in ("filter", "map_filter", "map_filter_join"):
        bad = {p.field for p in preds} - set(profile.filter_fields)
        if bad:
            raise PolicyError(f"predicates over undeclared filter fields {sorted(bad)}")
    if "join" in kind:
        if spec.join_field != profile.join_field:
            raise PolicyError("policy join field does not match the stream profile")
        if kind == "map_filter_join" and not profile.wrap_join_token:
            raise PolicyError("stream does not wrap its join token")
        if kind == "join" and profile.wrap_join_token:
            raise PolicyError("stream gates its join token behind filters")
    if spec.agg_field is not None:
        variant = int(kind[-1])
        match = [a for a in profile.aggregates if a.field == spec.agg_field]
        if not match:
            raise PolicyError(f"stream does not aggregate {spec.agg_field!r}")
        if spec.window == 1 and spec.start == 0:
            return  # served by the always-present record component
        for agg in match:
            if agg.variant == variant and (variant == 3 or spec.window in agg.windows):
                return
        raise PolicyError(
            f"stream offers no variant-{variant} aggregation of {spec.agg_field!r} "
            f"at window {spec.window}"
        )


def issue_policy(
    policy_id: str, spec: PolicySpec, owner: StreamOwner, right: StreamOwner | None = None
) -> IssuedPolicy:
    two_sided = "join" in spec.kind
    if two_sided and right is None:
        raise PolicyError(f"{spec.kind} policy spans two streams")
    if not two_sided and right is not None:
        raise PolicyError(f"{spec.kind} policy takes a single stream")
    owners = (owner, right) if two_sided else (owner,)
    if two_sided and owner.ctx is not right.ctx:
        raise PolicyError("join streams must share the pairing context")

    stream_ids = tuple(o.stream_id for o in owners)
    cloud = CloudPolicyMaterial(policy_id, spec, stream_ids)
    user = UserPolicyMaterial(policy_id, spec, stream_ids)

    for side, side_owner in enumerate(owners):
        _validate_against_profile(spec, side_owner.profile, side)
        prefix = ("left", "right")[side] if two_sided else "main"
        for role, tree in _policy_trees(side_owner.schema, spec, side).items():
            if role == "unwrap":
                cloud.tks[f"{prefix}:unwrap"] = keygen(
                    side_owner.ctx, side_owner.master, tree, 1
                )
                continue
            z = random_scalar()
            cloud.tks[f"{prefix}:payload"] = keygen(
                side_owner.ctx, side_owner.master, tree, z
            )
            user.secrets[f"{prefix}:payload"] = z
        user.field_widths.update(
            {name: s.width for name, s in side_owner.schema.fields.items()}
        )

    if two_sided:
        s = random_scalar()
        k2s = [int(invert(mpz(o.det_key.k2), mpz(R))) for o in owners]
        cloud.join_tokens = tuple((s * k2inv) % R for k2inv in k2s)

    if spec.kind == "agg1" and spec.window > 1:
        user.agg_secret = owner.agg1_secret(spec.agg_field, spec.window)
    if spec.kind in ("agg3", "filter_agg3") and spec.window > 1 and spec.start == 0:
        cloud.agg_offset = owner.agg3_offset_element(spec.agg_field)

    return IssuedPolicy(policy_id, cloud, user)
