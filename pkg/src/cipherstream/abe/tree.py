"""Threshold access trees.

Interior nodes are k-of-n gates (AND is n-of-n, OR is 1-of-n), leaves
carry attribute strings.  Secret shares flow down the tree at key
generation; reconstruction picks, per satisfied gate, the cheapest k
satisfied children and accumulates the Lagrange coefficient of every
leaf actually used, so the transform step pays one pairing per chosen
leaf and nothing for the rest of the tree.

Leaves are addressed by their preorder position, which is also the
share index order used at keygen.
"""

import struct

from gmpy2 import mpz

from ..algebra import R, lagrange_at_zero
from ..errors import PolicyError, WireFormatError

MAX_TREE_DEPTH = 32


class TreeNode:
    __slots__ = ("attr", "threshold", "children", "_nleaves")

    def __init__(self, attr=None, threshold=None, children=None):
        self.attr = attr
        self.threshold = threshold
        self.children = children
        self._nleaves = None
        if (attr is None) == (children is None):
            raise PolicyError("node must be either a leaf or a gate")
        if children is not None:
            if not children:
                raise PolicyError("gate with no children")
            if not 1 <= threshold <= len(children):
                raise PolicyError(
                    "threshold %r invalid for %d children" % (threshold, len(children))
                )
        elif not attr:
            raise PolicyError("leaf needs a non-empty attribute")

    @classmethod
    def leaf(cls, attr):
        return cls(attr=attr)

    @classmethod
    def gate(cls, threshold, children):
        return cls(threshold=threshold, children=list(children))

    @property
    def is_leaf(self):
        return self.attr is not None

    def num_leaves(self):
        if self._nleaves is None:
            if self.is_leaf:
                self._nleaves = 1
            else:
                self._nleaves = sum(c.num_leaves() for c in self.children)
        return self._nleaves

    def leaves(self):
        if self.is_leaf:
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def attributes(self):
        return {leaf.attr for leaf in self.leaves()}

    def satisfied(self, attrs):
        if self.is_leaf:
            return self.attr in attrs
        hits = sum(1 for c in self.children if c.satisfied(attrs))
        return hits >= self.threshold

    def select(self, attrs):
        """Leaf positions to use against an attribute set.

        Returns {preorder_leaf_position: lagrange_product} for a
        cheapest satisfying subset, or None if the tree is unsatisfied.
        """
        plan = self._plan(attrs, 0)
        if plan is None:
            return None
        return dict(plan[1])

    def _plan(self, attrs, base):
        if self.is_leaf:
            if self.attr in attrs:
                return (1, [(base, mpz(1))])
            return None
        offset = base
        viable = []
        for idx, child in enumerate(self.children, start=1):
            sub = child._plan(attrs, offset)
            if sub is not None:
                viable.append((sub[0], idx, sub[1]))
            offset += child.num_leaves()
        if len(viable) < self.threshold:
            return None
        viable.sort(key=lambda v: (v[0], v[1]))
        chosen = viable[: self.threshold]
        indices = [idx for _, idx, _ in chosen]
        cost = 0
        entries = []
        for sub_cost, idx, sub_entries in chosen:
            coeff = lagrange_at_zero(idx, indices)
            cost += sub_cost
            entries.extend((pos, mult * coeff % R) for pos, mult in sub_entries)
        return (cost, entries)

    # ------------------------------------------------------------ wire

    def to_bytes(self):
        if self.is_leaf:
            raw = self.attr.encode()
            return b"\x00" + struct.pack(">H", len(raw)) + raw
        out = [b"\x01" + struct.pack(">HH", self.threshold, len(self.children))]
        out.extend(c.to_bytes() for c in self.children)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data):
        node, used = cls._parse(data, 0, 0)
        if used != len(data):
            raise WireFormatError("trailing bytes after access tree")
        return node

    @classmethod
    def _parse(cls, data, off, depth):
        if depth > MAX_TREE_DEPTH:
            raise WireFormatError("access tree too deep")
        if off >= len(data):
            raise WireFormatError("truncated access tree")
        tag = data[off]
        off += 1
        if tag == 0:
            if off + 2 > len(data):
                raise WireFormatError("truncated leaf")
            (n,) = struct.unpack_from(">H", data, off)
            off += 2
            if off + n > len(data):
                raise WireFormatError("truncated leaf attribute")
            try:
                attr = data[off : off + n].decode()
            except UnicodeDecodeError as exc:
                raise WireFormatError("leaf attribute not utf-8") from exc
            return cls.leaf(attr), off + n
        if tag == 1:
            if off + 4 > len(data):
                raise WireFormatError("truncated gate")
            k, n = struct.unpack_from(">HH", data, off)
            off += 4
            children = []
            for _ in range(n):
                child, off = cls._parse(data, off, depth + 1)
                children.append(child)
            try:
                return cls.gate(k, children), off
            except PolicyError as exc:
                raise WireFormatError(str(exc)) from exc
        raise WireFormatError("unknown tree node tag %d" % tag)

    def __eq__(self, other):
        if not isinstance(other, TreeNode):
            return NotImplemented
        if self.is_leaf != other.is_leaf:
            return False
        if self.is_leaf:
            return self.attr == other.attr
        return (
            self.threshold == other.threshold
            and len(self.children) == len(other.children)
            and all(a == b for a, b in zip(self.children, other.children))
        )

    def __repr__(self):
        if self.is_leaf:
            return "Leaf(%r)" % self.attr
        return "Gate(%d of %d)" % (self.threshold, len(self.children))


def AND(*children):
    return TreeNode.gate(len(children), children)


def OR(*children):
    return TreeNode.gate(1, children)
