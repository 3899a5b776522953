"""Text format for policy descriptions, used by the issuance CLI.

One directive per line; '#' starts a comment.  The kind line is
required, everything else depends on it:

    policy watch-ge8
    kind map_filter_join
    map price volume
    where price ge 8
    where ts le 40
    where-right volume eq 3
    join stockId
    buffers 4 4
    agg price
    window 8
    start 16

'where' lines use the predicate syntax (ATTR OP CONST [MOD]); they
apply to both join sides unless 'where-right' lines override the
right side.  The policy line names the policy; it is optional here
because the issuing CLI can supply the id instead.
"""

from __future__ import annotations

from .errors import PolicyError
from .operators import PolicySpec
from .policy import format_predicates, parse_predicates


def parse_policy(text: str) -> PolicySpec:
    return parse_policy_file(text)[1]


def parse_policy_file(text: str):
    """(policy id or None, PolicySpec) from policy text."""
    policy_id = None
    kind = None
    map_fields = []
    where = []
    where_right = []
    join_field = None
    buffers = (0, 0)
    agg_field = None
    window = 0
    start = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, _, rest = line.partition(" ")
        rest = rest.strip()
        if directive == "policy":
            if policy_id is not None:
                raise PolicyError(f"line {lineno}: duplicate policy line")
            if not rest:
                raise PolicyError(f"line {lineno}: policy line needs a name")
            policy_id = rest
        elif directive == "kind":
            if kind is not None:
                raise PolicyError(f"line {lineno}: duplicate kind line")
            kind = rest
        elif directive == "map":
            map_fields.extend(rest.split())
        elif directive == "where":
            where.append(rest)
        elif directive == "where-right":
            where_right.append(rest)
        elif directive == "join":
            join_field = rest
        elif directive == "buffers":
            parts = rest.split()
            if len(parts) != 2:
                raise PolicyError(f"line {lineno}: buffers takes two sizes")
            try:
                buffers = (int(parts[0], 0), int(parts[1], 0))
            except ValueError:
                raise PolicyError(f"line {lineno}: bad buffer size in {raw!r}") from None
        elif directive in ("agg", "window", "start"):
            if directive == "agg":
                agg_field = rest
                continue
            try:
                value = int(rest, 0)
            except ValueError:
                raise PolicyError(f"line {lineno}: bad integer in {raw!r}") from None
            if directive == "window":
                window = value
            else:
                start = value
        else:
            raise PolicyError(f"line {lineno}: unknown directive {directive!r}")
    if kind is None:
        raise PolicyError("policy text has no kind line")
    return policy_id, PolicySpec(
        kind,
        map_fields=tuple(map_fields),
        predicates=tuple(parse_predicates("\n".join(where))) if where else (),
        predicates_right=tuple(parse_predicates("\n".join(where_right))) if where_right else (),
        join_field=join_field,
        buffers=buffers,
        agg_field=agg_field,
        window=window,
        start=start,
    )


def format_policy(spec: PolicySpec, policy_id: str | None = None) -> str:
    lines = []
    if policy_id is not None:
        lines.append(f"policy {policy_id}")
    lines.append(f"kind {spec.kind}")
    if spec.map_fields:
        lines.append("map " + " ".join(spec.map_fields))
    for p in spec.predicates:
        lines.append("where " + format_predicates([p]).strip())
    for p in spec.predicates_right:
        lines.append("where-right " + format_predicates([p]).strip())
    if spec.join_field is not None:
        lines.append(f"join {spec.join_field}")
        lines.append(f"buffers {spec.buffers[0]} {spec.buffers[1]}")
    if spec.agg_field is not None:
        lines.append(f"agg {spec.agg_field}")
        lines.append(f"window {spec.window}")
    if spec.start:
        lines.append(f"start {spec.start}")
    return "\n".join(lines) + "\n"
