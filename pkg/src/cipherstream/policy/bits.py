"""Bag-of-digits attribute encoding for numeric tuple fields.

A numeric value is published as one attribute string per digit of its
representation in every supported base, so a key can test individual
digits of the value without ever seeing the value itself.  Attribute
strings follow a fixed layout:

    att|<field>|<base>|<position>|<digit>   one digit, position 0 = least
                                            significant
    dc|<field>                              don't-care marker, present in
                                            every encoding of the field

The don't-care marker lets a compiled condition include a branch that is
trivially true for the field (for example "value >= 0").
"""

from __future__ import annotations

from ..errors import DomainError, PolicyError

DEFAULT_BASES = (2, 3, 5)


def digits_for(base: int, width: int) -> int:
    """Number of base-``base`` digits needed to cover ``width`` bits."""
    if base < 2:
        raise PolicyError(f"digit base must be >= 2, got {base}")
    if width < 1:
        raise PolicyError(f"field width must be >= 1, got {width}")
    limit = 1 << width
    count = 0
    span = 1
    while span < limit:
        span *= base
        count += 1
    return count


def digit_attr(field: str, base: int, position: int, digit: int) -> str:
    return f"att|{field}|{base}|{position}|{digit}"


def wildcard_attr(field: str) -> str:
    return f"dc|{field}"


def bag_of_bits(field: str, value: int, base: int, width: int) -> list[str]:
    """Digit attributes of ``value`` in one base, padded to full width."""
    if not 0 <= value < (1 << width):
        raise DomainError(f"value {value} out of range for {width}-bit field {field!r}")
    out = []
    v = value
    for i in range(digits_for(base, width)):
        out.append(digit_attr(field, base, i, v % base))
        v //= base
    return out


def attr_set(field: str, value: int, bases=DEFAULT_BASES, width: int = 8) -> set[str]:
    """Full attribute set for one field value: all digits in all bases plus
    the don't-care marker."""
    attrs = {wildcard_attr(field)}
    for base in bases:
        attrs.update(bag_of_bits(field, value, base, width))
    return attrs
