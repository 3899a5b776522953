"""BLS12-381 curve groups.

G1: y^2 = x^3 + 4 over Fp.  G2: y^2 = x^3 + 4(1+i) over Fp2 (the sextic
twist).  Affine points are (x, y) tuples, infinity is None; scalar
multiplication runs on Jacobian coordinates with a 4-bit window.
Serialization follows the common 48/96-byte compressed convention
(compression bit, infinity bit, y-sign bit on the leading byte).
"""

from gmpy2 import mpz, invert, powmod

from .fields import (
    P,
    fp2_add,
    fp2_sub,
    fp2_neg,
    fp2_mul,
    fp2_sqr,
    fp2_mul_fp,
    fp2_inv,
    fp2_eq,
    fp2_sqrt,
    fp2_mul_xi,
    FP2_ZERO,
)

# Subgroup order (prime); both groups have exponent R
R = mpz(0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001)

B1 = mpz(4)
B2 = fp2_mul_fp((mpz(1), mpz(1)), mpz(4))  # 4(1+i)

G1_GEN = (
    mpz(0x17F1D3A73197D7942695638C4FA9AC0FC3688C4F9774B905A14E3A3F171BAC586C55E83FF97A1AEFFB3AF00ADB22C6BB),
    mpz(0x08B3F481E3AAA0F1A09E30ED741D8AE4FCF5E095D5D00AF600DB18CB2C04B3EDD03CC744A2888AE40CAA232946C5E7E1),
)

G2_GEN = (
    (
        mpz(0x024AA2B2F08F0A91260805272DC51051C6E47AD4FA403B02B4510B647AE3D1770BAC0326A805BBEFD48056C8C121BDB8),
        mpz(0x13E02B6052719F607DACD3A088274F65596BD0D09920B61AB5DA61BBDC7F5049334CF11213945D57E5AC7D055D042B7E),
    ),
    (
        mpz(0x0CE5D527727D6E118CC9CDC6DA2E351AADFD9BAA8CBDD3A76D429A695160D12C923AC9CC3BACA289E193548608B82801),
        mpz(0x0606C4A02EA734CC32ACD2B02BC28B99CB3E287E85A763AF267492AB572E99AB3F370D275CEC1DA1AAA9075FF05F79BE),
    ),
)


# ---------------------------------------------------------------- G1

def g1_is_on_curve(p):
    if p is None:
        return True
    x, y = p
    return (y * y - (x * x * x + B1)) % P == 0


def g1_neg(p):
    if p is None:
        return None
    return (p[0], (-p[1]) % P)


def g1_add(p, q):
    if p is None:
        return q
    if q is None:
        return p
    x1, y1 = p
    x2, y2 = q
    if x1 == x2:
        if (y1 + y2) % P == 0:
            return None
        lam = (3 * x1 * x1) * invert(2 * y1, P) % P
    else:
        lam = (y2 - y1) * invert((x2 - x1) % P, P) % P
    x3 = (lam * lam - x1 - x2) % P
    y3 = (lam * (x1 - x3) - y1) % P
    return (x3, y3)


def _g1j_double(pt):
    X1, Y1, Z1 = pt
    A = X1 * X1 % P
    B = Y1 * Y1 % P
    C = B * B % P
    D = 2 * ((X1 + B) * (X1 + B) - A - C) % P
    E = 3 * A % P
    F = E * E % P
    X3 = (F - 2 * D) % P
    Y3 = (E * (D - X3) - 8 * C) % P
    Z3 = 2 * Y1 * Z1 % P
    return (X3, Y3, Z3)


def _g1j_add(pt, qt):
    X1, Y1, Z1 = pt
    X2, Y2, Z2 = qt
    if Z1 == 0:
        return qt
    if Z2 == 0:
        return pt
    Z1Z1 = Z1 * Z1 % P
    Z2Z2 = Z2 * Z2 % P
    U1 = X1 * Z2Z2 % P
    U2 = X2 * Z1Z1 % P
    S1 = Y1 * Z2 * Z2Z2 % P
    S2 = Y2 * Z1 * Z1Z1 % P
    H = (U2 - U1) % P
    r = 2 * (S2 - S1) % P
    if H == 0:
        if r == 0:
            return _g1j_double(pt)
        return (mpz(1), mpz(1), mpz(0))
    I = 4 * H * H % P
    J = H * I % P
    V = U1 * I % P
    X3 = (r * r - J - 2 * V) % P
    Y3 = (r * (V - X3) - 2 * S1 * J) % P
    Z3 = ((Z1 + Z2) * (Z1 + Z2) - Z1Z1 - Z2Z2) * H % P
    return (X3, Y3, Z3)


def _g1j_to_affine(pt):
    X, Y, Z = pt
    if Z == 0:
        return None
    zi = invert(Z, P)
    zi2 = zi * zi % P
    return (X * zi2 % P, Y * zi2 * zi % P)


def g1_mul(p, k):
    k = int(k) % R
    if p is None or k == 0:
        return None
    if k == 1:
        return p
    # 4-bit fixed window
    base = (p[0], p[1], mpz(1))
    table = [None, base]
    for _ in range(14):
        table.append(_g1j_add(table[-1], base))
    acc = (mpz(1), mpz(1), mpz(0))
    started = False
    for shift in range((k.bit_length() + 3) // 4 * 4 - 4, -1, -4):
        if started:
            acc = _g1j_double(acc)
            acc = _g1j_double(acc)
            acc = _g1j_double(acc)
            acc = _g1j_double(acc)
        d = (k >> shift) & 0xF
        if d:
            acc = _g1j_add(acc, table[d]) if started else table[d]
            started = True
        elif not started:
            continue
    return _g1j_to_affine(acc)


def g1_eq(p, q):
    return p == q if (p is None or q is None) else (p[0] == q[0] and p[1] == q[1])


def _flags(first_byte):
    return first_byte >> 5


def g1_to_bytes(p):
    if p is None:
        return bytes([0xC0]) + bytes(47)
    x, y = p
    out = bytearray(int(x).to_bytes(48, "big"))
    out[0] |= 0x80
    if y > P - y:
        out[0] |= 0x20
    return bytes(out)


def g1_from_bytes(data):
    if len(data) != 48:
        raise ValueError("G1 point must be 48 bytes")
    flags = _flags(data[0])
    if not flags & 0x4:
        raise ValueError("expected compressed G1 encoding")
    if flags & 0x2:
        if any(data[1:]) or data[0] != 0xC0:
            raise ValueError("malformed G1 infinity encoding")
        return None
    x = mpz(int.from_bytes(data, "big") & ((1 << 381) - 1))
    if x >= P:
        raise ValueError("G1 x coordinate out of range")
    rhs = (x * x * x + B1) % P
    y = powmod(rhs, (P + 1) // 4, P)
    if (y * y) % P != rhs:
        raise ValueError("G1 x coordinate not on curve")
    big = y > P - y
    if big != bool(flags & 0x1):
        y = (P - y) % P
    return (x, y)


# ---------------------------------------------------------------- G2

def g2_is_on_curve(p):
    if p is None:
        return True
    x, y = p
    lhs = fp2_sqr(y)
    rhs = fp2_add(fp2_mul(fp2_sqr(x), x), B2)
    return fp2_eq(lhs, rhs)


def g2_neg(p):
    if p is None:
        return None
    return (p[0], fp2_neg(p[1]))


def g2_add(p, q):
    if p is None:
        return q
    if q is None:
        return p
    x1, y1 = p
    x2, y2 = q
    if fp2_eq(x1, x2):
        if fp2_eq(fp2_add(y1, y2), FP2_ZERO):
            return None
        lam = fp2_mul(fp2_mul_fp(fp2_sqr(x1), mpz(3)), fp2_inv(fp2_mul_fp(y1, mpz(2))))
    else:
        lam = fp2_mul(fp2_sub(y2, y1), fp2_inv(fp2_sub(x2, x1)))
    x3 = fp2_sub(fp2_sub(fp2_sqr(lam), x1), x2)
    y3 = fp2_sub(fp2_mul(lam, fp2_sub(x1, x3)), y1)
    return (x3, y3)


def _g2j_double(pt):
    X1, Y1, Z1 = pt
    A = fp2_sqr(X1)
    B = fp2_sqr(Y1)
    C = fp2_sqr(B)
    D = fp2_mul_fp(fp2_sub(fp2_sub(fp2_sqr(fp2_add(X1, B)), A), C), mpz(2))
    E = fp2_mul_fp(A, mpz(3))
    F = fp2_sqr(E)
    X3 = fp2_sub(F, fp2_mul_fp(D, mpz(2)))
    Y3 = fp2_sub(fp2_mul(E, fp2_sub(D, X3)), fp2_mul_fp(C, mpz(8)))
    Z3 = fp2_mul_fp(fp2_mul(Y1, Z1), mpz(2))
    return (X3, Y3, Z3)


def _g2j_add(pt, qt):
    X1, Y1, Z1 = pt
    X2, Y2, Z2 = qt
    if fp2_eq(Z1, FP2_ZERO):
        return qt
    if fp2_eq(Z2, FP2_ZERO):
        return pt
    Z1Z1 = fp2_sqr(Z1)
    Z2Z2 = fp2_sqr(Z2)
    U1 = fp2_mul(X1, Z2Z2)
    U2 = fp2_mul(X2, Z1Z1)
    S1 = fp2_mul(fp2_mul(Y1, Z2), Z2Z2)
    S2 = fp2_mul(fp2_mul(Y2, Z1), Z1Z1)
    H = fp2_sub(U2, U1)
    r = fp2_mul_fp(fp2_sub(S2, S1), mpz(2))
    if fp2_eq(H, FP2_ZERO):
        if fp2_eq(r, FP2_ZERO):
            return _g2j_double(pt)
        return ((mpz(1), mpz(0)), (mpz(1), mpz(0)), FP2_ZERO)
    I = fp2_mul_fp(fp2_sqr(H), mpz(4))
    J = fp2_mul(H, I)
    V = fp2_mul(U1, I)
    X3 = fp2_sub(fp2_sub(fp2_sqr(r), J), fp2_mul_fp(V, mpz(2)))
    Y3 = fp2_sub(fp2_mul(r, fp2_sub(V, X3)), fp2_mul_fp(fp2_mul(S1, J), mpz(2)))
    Z3 = fp2_mul(fp2_sub(fp2_sub(fp2_sqr(fp2_add(Z1, Z2)), Z1Z1), Z2Z2), H)
    return (X3, Y3, Z3)


def _g2j_to_affine(pt):
    X, Y, Z = pt
    if fp2_eq(Z, FP2_ZERO):
        return None
    zi = fp2_inv(Z)
    zi2 = fp2_sqr(zi)
    return (fp2_mul(X, zi2), fp2_mul(Y, fp2_mul(zi2, zi)))


def g2_mul(p, k):
    k = int(k) % R
    if p is None or k == 0:
        return None
    if k == 1:
        return p
    one = (mpz(1), mpz(0))
    base = (p[0], p[1], one)
    table = [None, base]
    for _ in range(14):
        table.append(_g2j_add(table[-1], base))
    acc = (one, one, FP2_ZERO)
    started = False
    for shift in range((k.bit_length() + 3) // 4 * 4 - 4, -1, -4):
        if started:
            acc = _g2j_double(acc)
            acc = _g2j_double(acc)
            acc = _g2j_double(acc)
            acc = _g2j_double(acc)
        d = (k >> shift) & 0xF
        if d:
            acc = _g2j_add(acc, table[d]) if started else table[d]
            started = True
    return _g2j_to_affine(acc)


def g2_eq(p, q):
    if p is None or q is None:
        return p == q
    return fp2_eq(p[0], q[0]) and fp2_eq(p[1], q[1])


def g2_to_bytes(p):
    if p is None:
        return bytes([0xC0]) + bytes(95)
    (x0, x1), (y0, y1) = p
    out = bytearray(int(x1).to_bytes(48, "big") + int(x0).to_bytes(48, "big"))
    out[0] |= 0x80
    if (y1, y0) > ((P - y1) % P, (P - y0) % P):
        out[0] |= 0x20
    return bytes(out)


def g2_from_bytes(data):
    if len(data) != 96:
        raise ValueError("G2 point must be 96 bytes")
    flags = _flags(data[0])
    if not flags & 0x4:
        raise ValueError("expected compressed G2 encoding")
    if flags & 0x2:
        if any(data[1:]) or data[0] != 0xC0:
            raise ValueError("malformed G2 infinity encoding")
        return None
    x1 = mpz(int.from_bytes(data[:48], "big") & ((1 << 381) - 1))
    x0 = mpz(int.from_bytes(data[48:], "big"))
    if x0 >= P or x1 >= P:
        raise ValueError("G2 x coordinate out of range")
    x = (x0, x1)
    rhs = fp2_add(fp2_mul(fp2_sqr(x), x), B2)
    y = fp2_sqrt(rhs)
    if y is None:
        raise ValueError("G2 x coordinate not on curve")
    y0, y1 = y
    big = (y1, y0) > ((P - y1) % P, (P - y0) % P)
    if big != bool(flags & 0x1):
        y = ((P - y0) % P, (P - y1) % P)
    return (x, y)
