"""Key-policy attribute encryption with outsourced transforms.

The owner publishes per-attribute bases T_a = g1^t_a and Y = gT^y.  A
ciphertext for attribute set A masks the payload with Y^s and carries
T_a^s for each a in A.  A transform key embeds an access tree: shares
of y flow down the gates and each leaf for attribute a becomes
D = g2^(share / (z * t_a)), blinded by the recipient's secret z.

The relay holding the transform key can, when A satisfies the tree,
pair matching ciphertext components against leaf keys and collapse the
result to gT^(y*s/z) without learning the payload: every pairing
carries the 1/z blinding.  The recipient strips it with a single GT
exponentiation, so the expensive part of decryption is outsourced.

Transformed pairs multiply and divide componentwise, which is what the
windowed aggregation layers build on.
"""

import secrets

from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from gmpy2 import invert, mpz

from ..algebra import R, counters, random_poly, poly_eval, random_scalar
from ..algebra.context import GT_ONE, G1Element, G2Element, GTElement, PreparedG2
from ..errors import UnknownAttributeError, WireFormatError
from .tree import TreeNode

import struct
from hashlib import sha256


class AbeMaster:
    """Owner-side secrets: the mask exponent and per-attribute scalars."""

    __slots__ = ("y", "t")

    def __init__(self, y, t):
        self.y = y
        self.t = t


class AbePublic:
    """Encryption material: Y = gT^y and T_a = g1^t_a per attribute."""

    __slots__ = ("Y", "T")

    def __init__(self, Y, T):
        self.Y = Y
        self.T = T


class AbeCiphertext:
    __slots__ = ("attrs", "e", "comps")

    def __init__(self, attrs, e, comps):
        self.attrs = frozenset(attrs)
        self.e = e
        self.comps = comps


class TransformKey:
    __slots__ = ("tree", "d", "_prepared")

    def __init__(self, tree, d):
        self.tree = tree
        self.d = d
        self._prepared = {}

    def prepared(self, pos):
        prep = self._prepared.get(pos)
        if prep is None:
            prep = PreparedG2(self.d[pos])
            self._prepared[pos] = prep
        return prep


class TransformedCiphertext:
    """(U, V) with U = m * gT^(ys) and V = gT^(ys/z)."""

    __slots__ = ("u", "v")

    def __init__(self, u, v):
        self.u = u
        self.v = v


def abe_gen(ctx, attrs):
    """Fresh master/public pair covering the given attribute strings."""
    y = random_scalar()
    t = {}
    T = {}
    for a in attrs:
        t_a = random_scalar()
        while t_a == 0:
            t_a = random_scalar()
        t[a] = t_a
        T[a] = ctx.g1_pow(t_a)
    return AbePublic(ctx.gt_pow(y), T), AbeMaster(y, t)


def keygen(ctx, master, tree, z):
    """Transform key for an access tree, blinded by the recipient secret z.

    z = 1 yields a key whose transform output is directly unmasked;
    that variant is only ever issued for components the relay is meant
    to open (join-token unwrapping).
    """
    zinv = invert(mpz(z), R)
    d = {}

    def share(node, secret, base):
        if node.is_leaf:
            t_a = master.t.get(node.attr)
            if t_a is None:
                raise UnknownAttributeError("no master component for %r" % node.attr)
            d[base] = ctx.g2_pow(secret * zinv * invert(t_a, R) % R)
            return
        poly = random_poly(node.threshold - 1, secret)
        off = base
        for idx, child in enumerate(node.children, start=1):
            share(child, poly_eval(poly, idx), off)
            off += child.num_leaves()

    share(tree, master.y, 0)
    return TransformKey(tree, d)


def encrypt(ctx, pub, m, attrs, s=None):
    """Encrypt GT element m under an attribute set."""
    attrs = frozenset(attrs)
    missing = [a for a in attrs if a not in pub.T]
    if missing:
        raise UnknownAttributeError("attributes outside universe: %s" % sorted(missing))
    if s is None:
        s = random_scalar()
    e = m * ctx.pow_cached(pub.Y, s)
    comps = {a: ctx.pow_cached(pub.T[a], s) for a in attrs}
    return AbeCiphertext(attrs, e, comps)


def trans(ctx, tk, ct):
    """Relay-side transform; None when the tree rejects the attribute set."""
    counters.bump("transform")
    sel = tk.tree.select(ct.attrs)
    if sel is None:
        return None
    leaves = tk.tree.leaves()
    pairs = []
    for pos, lam in sel.items():
        comp = ct.comps[leaves[pos].attr]
        pairs.append((comp ** lam, tk.prepared(pos)))
    return TransformedCiphertext(ct.e, ctx.pair_product(pairs))


def dec(tct, z):
    """Recipient-side finish: one GT exponentiation."""
    counters.bump("user_exp")
    return tct.u / tct.v ** z


def tct_identity():
    return TransformedCiphertext(GT_ONE, GT_ONE)


def tct_mul(a, b):
    return TransformedCiphertext(a.u * b.u, a.v * b.v)


def tct_div(a, b):
    return TransformedCiphertext(a.u / b.u, a.v / b.v)


# ------------------------------------------------------------- hybrid

def unwrap_key(mask):
    return sha256(mask.to_bytes()).digest()


def encrypt_bytes(ctx, pub, data, attrs, s=None):
    """Wrap arbitrary bytes: random GT mask under the policy, AEAD body."""
    mask = ctx.gt_pow(random_scalar())
    ct = encrypt(ctx, pub, mask, attrs, s)
    nonce = secrets.token_bytes(12)
    blob = nonce + AESGCM(unwrap_key(mask)).encrypt(nonce, data, b"")
    return ct, blob


def dec_bytes(tct, z, blob):
    mask = dec(tct, z)
    return AESGCM(unwrap_key(mask)).decrypt(blob[:12], blob[12:], b"")


# --------------------------------------------------------------- wire

class AttributeIndex:
    """Stable attribute <-> small-integer mapping for compact encodings."""

    __slots__ = ("_attrs", "_pos")

    def __init__(self, attrs):
        self._attrs = list(attrs)
        self._pos = {a: i for i, a in enumerate(self._attrs)}
        if len(self._pos) != len(self._attrs):
            raise ValueError("duplicate attribute in universe")
        if len(self._attrs) > 0xFFFF:
            raise ValueError("universe too large for 16-bit indices")

    def index(self, attr):
        try:
            return self._pos[attr]
        except KeyError:
            raise UnknownAttributeError("attribute %r not in universe" % attr) from None

    def attr(self, idx):
        try:
            return self._attrs[idx]
        except IndexError:
            raise WireFormatError("attribute index %d out of range" % idx) from None

    @property
    def attrs(self):
        return list(self._attrs)

    def __contains__(self, attr):
        return attr in self._pos

    def __len__(self):
        return len(self._attrs)

    def __iter__(self):
        return iter(self._attrs)


def ct_to_bytes(ct, universe):
    order = sorted(ct.attrs, key=universe.index)
    out = [struct.pack(">H", len(order))]
    for a in order:
        out.append(struct.pack(">H", universe.index(a)))
        out.append(ct.comps[a].to_bytes())
    out.append(ct.e.to_bytes())
    return b"".join(out)


def ct_from_bytes(data, universe):
    if len(data) < 2:
        raise WireFormatError("truncated ciphertext")
    (n,) = struct.unpack_from(">H", data, 0)
    off = 2
    comps = {}
    try:
        for _ in range(n):
            if off + 50 > len(data):
                raise WireFormatError("truncated ciphertext component")
            (idx,) = struct.unpack_from(">H", data, off)
            attr = universe.attr(idx)
            comps[attr] = G1Element.from_bytes(data[off + 2 : off + 50])
            off += 50
        if off + 576 != len(data):
            raise WireFormatError("bad ciphertext length")
        e = GTElement.from_bytes(data[off:])
    except ValueError as exc:
        raise WireFormatError(str(exc)) from exc
    return AbeCiphertext(comps.keys(), e, comps)


def tk_to_bytes(tk):
    tree_blob = tk.tree.to_bytes()
    out = [struct.pack(">I", len(tree_blob)), tree_blob,
           struct.pack(">H", len(tk.d))]
    for pos in sorted(tk.d):
        out.append(struct.pack(">H", pos))
        out.append(tk.d[pos].to_bytes())
    return b"".join(out)


def tk_from_bytes(data):
    if len(data) < 4:
        raise WireFormatError("truncated transform key")
    (tree_len,) = struct.unpack_from(">I", data, 0)
    off = 4
    if off + tree_len + 2 > len(data):
        raise WireFormatError("truncated transform key tree")
    tree = TreeNode.from_bytes(data[off : off + tree_len])
    off += tree_len
    (n,) = struct.unpack_from(">H", data, off)
    off += 2
    if n != tree.num_leaves():
        raise WireFormatError("leaf key count does not match tree")
    d = {}
    for _ in range(n):
        if off + 98 > len(data):
            raise WireFormatError("truncated leaf key")
        (pos,) = struct.unpack_from(">H", data, off)
        if pos >= n or pos in d:
            raise WireFormatError("bad leaf position %d" % pos)
        try:
            d[pos] = G2Element.from_bytes(data[off + 2 : off + 98])
        except ValueError as exc:
            raise WireFormatError(str(exc)) from exc
        off += 98
    if off != len(data):
        raise WireFormatError("trailing bytes after transform key")
    return TransformKey(tree, d)


def tct_to_bytes(tct):
    return tct.u.to_bytes() + tct.v.to_bytes()


def tct_from_bytes(data):
    if len(data) != 1152:
        raise WireFormatError("transformed ciphertext must be 1152 bytes")
    try:
        return TransformedCiphertext(
            GTElement.from_bytes(data[:576]), GTElement.from_bytes(data[576:])
        )
    except ValueError as exc:
        raise WireFormatError(str(exc)) from exc
