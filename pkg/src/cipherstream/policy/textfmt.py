"""Text format for policy predicates.

One predicate per line, whitespace separated:

    ATTR OP CONST [MOD]

where OP is one of eq, le, ge, mod (symbolic aliases ==, <=, >= are
accepted) and MOD is the modulus, required exactly for op = mod.  Blank
lines and lines starting with '#' are skipped.

    price ge 100
    stockId eq 7
    ts mod 3 4        # ts = 3 (mod 4)
"""

from __future__ import annotations

from ..errors import PolicyError
from .compile import Predicate

_ALIASES = {"==": "eq", "<=": "le", ">=": "ge", "%": "mod"}


def parse_predicates(text: str) -> list[Predicate]:
    preds = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise PolicyError(f"line {lineno}: expected 'ATTR OP CONST [MOD]', got {raw!r}")
        attr, op, *nums = parts
        op = _ALIASES.get(op, op)
        try:
            nums = [int(n, 0) for n in nums]
        except ValueError:
            raise PolicyError(f"line {lineno}: bad integer in {raw!r}") from None
        if op == "mod":
            if len(nums) != 2:
                raise PolicyError(f"line {lineno}: mod needs CONST and MOD")
            pred = Predicate(attr, "mod", nums[0], modulus=nums[1])
        else:
            if len(nums) != 1:
                raise PolicyError(f"line {lineno}: op {op!r} takes a single constant")
            try:
                pred = Predicate(attr, op, nums[0])
            except PolicyError as exc:
                raise PolicyError(f"line {lineno}: {exc}") from None
        preds.append(pred)
    if not preds:
        raise PolicyError("no predicates found")
    return preds


def format_predicates(preds) -> str:
    lines = []
    for p in preds:
        if p.op == "mod":
            lines.append(f"{p.field} mod {p.const} {p.modulus}")
        else:
            lines.append(f"{p.field} {p.op} {p.const}")
    return "\n".join(lines) + "\n"
