import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cipherstream.errors import DomainError, PolicyError, WireFormatError
from cipherstream.policy import (
    AttributeSpec,
    Predicate,
    StreamSchema,
    attr_set,
    compile_conjunction,
    compile_predicate,
    digits_for,
    format_predicates,
    join_attr,
    map_attr,
    parse_predicates,
    universe_for,
    window_attr,
    wildcard_attr,
)

BASES = (2, 3, 5)


def holds(pred: Predicate, v: int) -> bool:
    if pred.op == "eq":
        return v == pred.const
    if pred.op == "le":
        return v <= pred.const
    if pred.op == "ge":
        return v >= pred.const
    return v % pred.modulus == pred.const % pred.modulus


def check_exhaustive(pred: Predicate, width: int):
    tree = compile_predicate(pred, BASES, width)
    for v in range(1 << width):
        got = tree.satisfied(attr_set(pred.field, v, BASES, width))
        assert got == holds(pred, v), f"{pred} at v={v}: tree={got}"


@pytest.mark.parametrize("op", ["eq", "le", "ge"])
def test_comparisons_exhaustive_6bit(op):
    for k in range(64):
        check_exhaustive(Predicate("a", op, k), 6)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6, 8, 9])
def test_mod_exhaustive_6bit(m):
    for k in range(m):
        check_exhaustive(Predicate("a", "mod", k, modulus=m), 6)


def test_comparison_edge_thresholds_8bit():
    # lowest/highest thresholds and the all-zero / all-one suffix shapes
    # that the naive recursion gets wrong
    for k in (0, 1, 2, 3, 4, 127, 128, 192, 255):
        check_exhaustive(Predicate("a", "ge", k), 8)
        check_exhaustive(Predicate("a", "le", k), 8)


def test_ge_zero_is_wildcard():
    tree = compile_predicate(Predicate("a", "ge", 0), BASES, 8)
    assert tree.is_leaf and tree.attr == wildcard_attr("a")
    tree = compile_predicate(Predicate("a", "le", 255), BASES, 8)
    assert tree.is_leaf and tree.attr == wildcard_attr("a")


def test_mod_prime_is_single_leaf():
    tree = compile_predicate(Predicate("a", "mod", 2, modulus=5), BASES, 8)
    assert tree.is_leaf and tree.attr == "att|a|5|0|2"


def test_mod_prime_power_uses_base_digits():
    # v = 3 (mod 4) tests the two low base-2 digits
    tree = compile_predicate(Predicate("a", "mod", 7, modulus=4), BASES, 6)
    assert not tree.is_leaf and tree.threshold == 2
    attrs = {c.attr for c in tree.children}
    assert attrs == {"att|a|2|0|1", "att|a|2|1|1"}
    for v in range(64):
        assert tree.satisfied(attr_set("a", v, BASES, 6)) == (v % 4 == 3)


def test_mod_composite_crt():
    tree = compile_predicate(Predicate("a", "mod", 10, modulus=6), BASES, 6)
    for v in range(64):
        expect = v % 2 == 0 and v % 3 == 1
        assert tree.satisfied(attr_set("a", v, BASES, 6)) == expect


def test_mod_rejects_foreign_factor():
    with pytest.raises(PolicyError):
        compile_predicate(Predicate("a", "mod", 1, modulus=7), BASES, 8)
    with pytest.raises(PolicyError):
        compile_predicate(Predicate("a", "mod", 1, modulus=14), BASES, 8)


def test_mod_rejects_oversized_prime_power():
    with pytest.raises(PolicyError):
        compile_predicate(Predicate("a", "mod", 1, modulus=1 << 9), BASES, 8)


def test_out_of_range_constants():
    with pytest.raises(DomainError):
        compile_predicate(Predicate("a", "eq", 256), BASES, 8)
    with pytest.raises(DomainError):
        compile_predicate(Predicate("a", "ge", 300), BASES, 8)


def test_predicate_validation():
    with pytest.raises(PolicyError):
        Predicate("a", "lt", 3)
    with pytest.raises(PolicyError):
        Predicate("a", "mod", 3)
    with pytest.raises(PolicyError):
        Predicate("a", "eq", 3, modulus=4)
    with pytest.raises(PolicyError):
        Predicate("a", "eq", -1)


def test_conjunction():
    tree = compile_conjunction(
        [Predicate("a", "ge", 10), Predicate("b", "le", 20)], BASES, 6
    )
    for va in range(0, 64, 7):
        for vb in range(0, 64, 7):
            attrs = attr_set("a", va, BASES, 6) | attr_set("b", vb, BASES, 6)
            assert tree.satisfied(attrs) == (va >= 10 and vb <= 20)
    with pytest.raises(PolicyError):
        compile_conjunction([], BASES, 6)


@settings(max_examples=80, deadline=None)
@given(
    op=st.sampled_from(["eq", "le", "ge"]),
    k=st.integers(0, 1023),
    v=st.integers(0, 1023),
)
def test_comparison_property_10bit(op, k, v):
    pred = Predicate("a", op, k)
    tree = compile_predicate(pred, BASES, 10)
    assert tree.satisfied(attr_set("a", v, BASES, 10)) == holds(pred, v)


def test_attr_set_size_linear_in_bases():
    sets = [(2,), (2, 3), (2, 3, 5), (2, 3, 5, 7)]
    for bases in sets:
        expect = 1 + sum(digits_for(b, 8) for b in bases)
        assert len(attr_set("a", 33, bases, 8)) == expect


def test_digits_for():
    assert digits_for(2, 8) == 8
    assert digits_for(3, 8) == 6
    assert digits_for(5, 8) == 4
    assert digits_for(2, 1) == 1
    with pytest.raises(PolicyError):
        digits_for(1, 8)


def test_parse_predicates():
    text = """
    # selection
    price ge 100
    stockId == 7
    ts mod 3 4
    """
    preds = parse_predicates(text)
    assert preds == [
        Predicate("price", "ge", 100),
        Predicate("stockId", "eq", 7),
        Predicate("ts", "mod", 3, modulus=4),
    ]
    assert parse_predicates(format_predicates(preds)) == preds


@pytest.mark.parametrize(
    "line",
    ["price", "price ge", "price ge ten", "price ge 1 2", "ts mod 3", "price lt 3"],
)
def test_parse_rejects(line):
    with pytest.raises(PolicyError):
        parse_predicates(line)


def test_parse_empty():
    with pytest.raises(PolicyError):
        parse_predicates("# nothing\n\n")


def test_universe_contents():
    schema = StreamSchema.of("price", "hour", width=4, windows=(4, 8), ts_width=8)
    uni = universe_for(schema)
    assert wildcard_attr("price") in uni
    assert map_attr("hour") in uni
    assert join_attr("price") in uni
    assert map_attr("ts") in uni
    assert window_attr(1) in uni
    assert window_attr(8) in uni
    assert window_attr(16) not in uni
    # every digit attribute of every field value is covered
    for v in range(16):
        assert attr_set("price", v, schema.bases, 4) <= set(uni.attrs)
    for ts in range(0, 256, 37):
        assert attr_set("ts", ts, schema.bases, 8) <= set(uni.attrs)
    # deterministic ordering
    assert uni.attrs == universe_for(schema).attrs
    assert uni.attrs == sorted(uni.attrs)


def test_universe_size():
    schema = StreamSchema.of("a", width=8, windows=(4,), ts_width=8)
    per_field = 3 + sum(b * digits_for(b, 8) for b in BASES)
    assert len(universe_for(schema).attrs) == 2 * per_field + 2


def test_schema_roundtrip():
    schema = StreamSchema(
        {"price": AttributeSpec(8), "vol": AttributeSpec(16)},
        bases=(2, 3),
        windows=(4, 32),
    )
    again = StreamSchema.from_bytes(schema.to_bytes())
    assert again == schema
    assert again.width_of("vol") == 16


def test_schema_rejects():
    with pytest.raises(PolicyError):
        StreamSchema({})
    with pytest.raises(PolicyError):
        StreamSchema.of("bad|name")
    with pytest.raises(PolicyError):
        StreamSchema.of("ts")
    with pytest.raises(PolicyError):
        StreamSchema.of("a", width=40)
    with pytest.raises(PolicyError):
        StreamSchema.of("a", ts_width=0)
    with pytest.raises(PolicyError):
        StreamSchema({"a": AttributeSpec(8)}, windows=(0,))
    with pytest.raises(PolicyError):
        StreamSchema({"a": AttributeSpec(8)}, bases=(2, 2))
    schema = StreamSchema.of("a")
    with pytest.raises(PolicyError):
        schema.width_of("b")
    with pytest.raises(WireFormatError):
        StreamSchema.from_bytes(schema.to_bytes()[:-1])
    with pytest.raises(WireFormatError):
        StreamSchema.from_bytes(b"\xff" + schema.to_bytes()[1:])
