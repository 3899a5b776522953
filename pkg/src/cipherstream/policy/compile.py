"""Compile numeric comparisons into threshold trees over digit attributes.

Supported predicate forms on a numeric field ``v``:

    v == k          conjunction of all binary digits of k
    v >= k          binary comparison tree (see ``cond_ge``)
    v <= k          binary comparison tree (see ``cond_le``)
    v mod m == k    digit tests in the prime bases dividing m

The comparison trees walk the bits of the threshold from most to least
significant.  At a 1-bit of ``k`` (for ``>=``) the value must match and
the remaining bits still have to win, so the recursion tightens with an
AND; at a 0-bit the value can either beat the threshold outright at this
bit or fall through to the lower bits, an OR.  When every remaining
threshold bit is zero, any suffix wins, that branch is trivially true
and is expressed with the field's don't-care attribute.  The mirrored
rules apply for ``<=``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..abe import AND, OR, TreeNode
from ..errors import DomainError, PolicyError
from .bits import DEFAULT_BASES, digit_attr, digits_for, wildcard_attr

OPS = ("eq", "le", "ge", "mod")


@dataclass(frozen=True)
class Predicate:
    field: str
    op: str
    const: int
    modulus: int | None = None

    def __post_init__(self):
        if self.op not in OPS:
            raise PolicyError(f"unknown predicate op {self.op!r}")
        if self.op == "mod":
            if self.modulus is None or self.modulus < 2:
                raise PolicyError("mod predicate needs a modulus >= 2")
        elif self.modulus is not None:
            raise PolicyError(f"op {self.op!r} does not take a modulus")
        if self.const < 0:
            raise PolicyError("predicate constants must be non-negative")


def _bit(k: int, i: int) -> int:
    return (k >> i) & 1


def _true_leaf(field: str) -> TreeNode:
    return TreeNode.leaf(wildcard_attr(field))


def _bit_leaf(field: str, i: int, d: int) -> TreeNode:
    return TreeNode.leaf(digit_attr(field, 2, i, d))


def cond_ge(field: str, k: int, width: int) -> TreeNode:
    """Tree satisfied exactly by the encodings of values >= k."""
    if not 0 <= k < (1 << width):
        raise DomainError(f"threshold {k} out of range for {width}-bit field {field!r}")

    def rec(i: int) -> TreeNode:
        suffix = k & ((2 << i) - 1)
        if suffix == 0:
            return _true_leaf(field)
        if i == 0:
            return _bit_leaf(field, 0, 1)
        rest = rec(i - 1)
        if _bit(k, i) == 1:
            if rest.attr == wildcard_attr(field):
                return _bit_leaf(field, i, 1)
            return AND(_bit_leaf(field, i, 1), rest)
        return OR(_bit_leaf(field, i, 1), rest)

    return rec(width - 1)


def cond_le(field: str, k: int, width: int) -> TreeNode:
    """Tree satisfied exactly by the encodings of values <= k."""
    if not 0 <= k < (1 << width):
        raise DomainError(f"threshold {k} out of range for {width}-bit field {field!r}")

    def rec(i: int) -> TreeNode:
        suffix = k & ((2 << i) - 1)
        if suffix == (2 << i) - 1:
            return _true_leaf(field)
        if i == 0:
            return _bit_leaf(field, 0, 0)
        rest = rec(i - 1)
        if _bit(k, i) == 0:
            if rest.attr == wildcard_attr(field):
                return _bit_leaf(field, i, 0)
            return AND(_bit_leaf(field, i, 0), rest)
        return OR(_bit_leaf(field, i, 0), rest)

    return rec(width - 1)


def _cond_eq(field: str, k: int, width: int) -> TreeNode:
    if not 0 <= k < (1 << width):
        raise DomainError(f"constant {k} out of range for {width}-bit field {field!r}")
    leaves = [_bit_leaf(field, i, _bit(k, i)) for i in range(width)]
    if len(leaves) == 1:
        return leaves[0]
    return AND(*leaves)


def _factor_over(m: int, bases) -> list[tuple[int, int]]:
    factors = []
    rest = m
    for q in sorted(bases):
        t = 0
        while rest % q == 0:
            rest //= q
            t += 1
        if t:
            factors.append((q, t))
    if rest != 1:
        raise PolicyError(
            f"modulus {m} has a prime factor outside the digit bases {tuple(sorted(bases))}"
        )
    return factors


def _cond_mod(field: str, k: int, m: int, bases, width: int) -> TreeNode:
    conjuncts = []
    for q, t in _factor_over(m, bases):
        if t > digits_for(q, width):
            raise PolicyError(
                f"modulus {m} needs {t} base-{q} digits, field {field!r} only has "
                f"{digits_for(q, width)}"
            )
        r = k % (q**t)
        for i in range(t):
            conjuncts.append(TreeNode.leaf(digit_attr(field, q, i, r % q)))
            r //= q
    if len(conjuncts) == 1:
        return conjuncts[0]
    return AND(*conjuncts)


def predicate_holds(pred: Predicate, v: int) -> bool:
    """Direct evaluation on the plaintext value."""
    if pred.op == "eq":
        return v == pred.const
    if pred.op == "le":
        return v <= pred.const
    if pred.op == "ge":
        return v >= pred.const
    return v % pred.modulus == pred.const % pred.modulus


def compile_predicate(pred: Predicate, bases=DEFAULT_BASES, width: int = 8) -> TreeNode:
    if pred.op == "eq":
        return _cond_eq(pred.field, pred.const, width)
    if pred.op == "ge":
        return cond_ge(pred.field, pred.const, width)
    if pred.op == "le":
        return cond_le(pred.field, pred.const, width)
    return _cond_mod(pred.field, pred.const, pred.modulus, bases, width)


def compile_conjunction(preds, bases=DEFAULT_BASES, width: int = 8) -> TreeNode:
    """AND together a list of predicates, unwrapping the trivial case."""
    preds = list(preds)
    if not preds:
        raise PolicyError("empty predicate list")
    trees = [compile_predicate(p, bases, width) for p in preds]
    if len(trees) == 1:
        return trees[0]
    return AND(*trees)
