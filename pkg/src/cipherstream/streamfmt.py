"""Text format for stream definitions, used by the stream-init CLI.

One directive per line; '#' starts a comment:

    stream quotes
    field hour 5
    field stockId 7
    field price 7
    field volume 7
    bases 2 3
    windows 4 8 16 32
    ts-width 16
    map price volume
    filter stockId hour ts
    join price
    wrap-token
    agg price 1 8       # field, variant, then windows for variants 1/2
    agg volume 3

The stream and field lines are required; bases, windows, and ts-width
fall back to the schema defaults.  The remaining directives build the
encryption profile.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PolicyError
from .operators import AggProfile, EncProfile
from .policy import AttributeSpec, StreamSchema


@dataclass(frozen=True)
class StreamConfig:
    stream_id: str
    schema: StreamSchema
    profile: EncProfile


def parse_stream_config(text: str) -> StreamConfig:
    stream_id = None
    fields = {}
    bases = None
    windows = None
    ts_width = None
    map_fields = []
    filter_fields = []
    join_field = None
    wrap = False
    aggs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, _, rest = line.partition(" ")
        args = rest.split()

        def ints(values=None):
            try:
                return [int(a, 0) for a in (args if values is None else values)]
            except ValueError:
                raise PolicyError(f"line {lineno}: bad integer in {raw!r}") from None

        if directive == "stream":
            if len(args) != 1:
                raise PolicyError(f"line {lineno}: stream takes one id")
            stream_id = args[0]
        elif directive == "field":
            if len(args) != 2:
                raise PolicyError(f"line {lineno}: field takes a name and a width")
            try:
                fields[args[0]] = AttributeSpec(int(args[1], 0))
            except ValueError:
                raise PolicyError(f"line {lineno}: bad width in {raw!r}") from None
        elif directive == "bases":
            bases = tuple(ints())
        elif directive == "windows":
            windows = tuple(ints())
        elif directive == "ts-width":
            if len(args) != 1:
                raise PolicyError(f"line {lineno}: ts-width takes one integer")
            (ts_width,) = ints()
        elif directive == "map":
            map_fields.extend(args)
        elif directive == "filter":
            filter_fields.extend(args)
        elif directive == "join":
            if len(args) != 1:
                raise PolicyError(f"line {lineno}: join takes one field")
            join_field = args[0]
        elif directive == "wrap-token":
            if args:
                raise PolicyError(f"line {lineno}: wrap-token takes no arguments")
            wrap = True
        elif directive == "agg":
            if len(args) < 2:
                raise PolicyError(f"line {lineno}: agg takes a field and a variant")
            nums = ints(args[1:])
            aggs.append(AggProfile(args[0], nums[0], windows=tuple(nums[1:])))
        else:
            raise PolicyError(f"line {lineno}: unknown directive {directive!r}")
    if stream_id is None:
        raise PolicyError("stream config has no stream line")
    if not fields:
        raise PolicyError("stream config declares no fields")
    schema_kw = {}
    if bases is not None:
        schema_kw["bases"] = bases
    if windows is not None:
        schema_kw["windows"] = windows
    if ts_width is not None:
        schema_kw["ts_width"] = ts_width
    schema = StreamSchema(fields, **schema_kw)
    profile = EncProfile(
        map_fields=tuple(map_fields),
        filter_fields=tuple(filter_fields),
        join_field=join_field,
        wrap_join_token=wrap,
        aggregates=tuple(aggs),
    )
    profile.validate(schema)
    return StreamConfig(stream_id, schema, profile)


def format_stream_config(config: StreamConfig) -> str:
    lines = [f"stream {config.stream_id}"]
    for name, spec in config.schema.fields.items():
        lines.append(f"field {name} {spec.width}")
    lines.append("bases " + " ".join(str(b) for b in config.schema.bases))
    lines.append("windows " + " ".join(str(w) for w in config.schema.windows))
    lines.append(f"ts-width {config.schema.ts_width}")
    profile = config.profile
    if profile.map_fields:
        lines.append("map " + " ".join(profile.map_fields))
    if profile.filter_fields:
        lines.append("filter " + " ".join(profile.filter_fields))
    if profile.join_field is not None:
        lines.append(f"join {profile.join_field}")
    if profile.wrap_join_token:
        lines.append("wrap-token")
    for agg in profile.aggregates:
        parts = [agg.field, str(agg.variant)] + [str(w) for w in agg.windows]
        lines.append("agg " + " ".join(parts))
    return "\n".join(lines) + "\n"
