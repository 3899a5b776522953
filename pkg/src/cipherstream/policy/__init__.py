from .bits import bag_of_bits, attr_set, digit_attr, wildcard_attr, digits_for
from .compile import (
    Predicate,
    compile_conjunction,
    compile_predicate,
    cond_ge,
    cond_le,
    predicate_holds,
)
from .universe import (
    TS_FIELD,
    AttributeSpec,
    StreamSchema,
    join_attr,
    map_attr,
    universe_for,
    window_attr,
)
from .textfmt import parse_predicates, format_predicates

__all__ = [
    "bag_of_bits",
    "attr_set",
    "digit_attr",
    "wildcard_attr",
    "digits_for",
    "Predicate",
    "compile_predicate",
    "compile_conjunction",
    "cond_ge",
    "cond_le",
    "predicate_holds",
    "TS_FIELD",
    "StreamSchema",
    "AttributeSpec",
    "universe_for",
    "map_attr",
    "window_attr",
    "join_attr",
    "parse_predicates",
    "format_predicates",
]
