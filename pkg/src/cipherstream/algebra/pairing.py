"""Optimal ate pairing on BLS12-381.

The Miller loop walks the curve parameter |u| (64 bits, weight 6) with
the second argument kept in affine twist coordinates; each step emits a
line value occupying three Fp2 slots which is folded into the
accumulator with a sparse product.  Keys that get paired against many
ciphertexts can be "prepared": the line coefficients depend only on the
G2 point, so they are computed once and replayed per pairing.

The final exponentiation uses the standard easy part followed by the
u-chain for the cofactor 3*(p^4-p^2+1)/r; the chain's exponent identity
is verified with integer arithmetic at import time, so a transcription
slip cannot silently produce a wrong pairing.
"""

from gmpy2 import mpz

from .fields import (
    P,
    FP12_ONE,
    fp2_sub,
    fp2_mul,
    fp2_sqr,
    fp2_mul_fp,
    fp2_inv,
    fp2_add,
    fp12_mul,
    fp12_sqr,
    fp12_cyc_sqr,
    fp12_conj,
    fp12_inv,
    fp12_frob,
    fp12_mul_l035,
)
from .curve import R

U = -0xD201000000010000
_ABS_U = -U
_U_BITS = [(_ABS_U >> i) & 1 for i in range(_ABS_U.bit_length() - 2, -1, -1)]

# Exponent identity behind the hard-part chain: with lam3 = (u-1)^2,
# lam2 = lam3*u, lam1 = lam2*u - lam3, lam0 = lam1*u + 3, we must have
# lam0 + lam1*p + lam2*p^2 + lam3*p^3 == 3*(p^4 - p^2 + 1)/r.
_LAM3 = (U - 1) ** 2
_LAM2 = _LAM3 * U
_LAM1 = _LAM2 * U - _LAM3
_LAM0 = _LAM1 * U + 3
_p = int(P)
_r = int(R)
assert (_p**4 - _p**2 + 1) % _r == 0
assert _LAM0 + _LAM1 * _p + _LAM2 * _p**2 + _LAM3 * _p**3 == 3 * ((_p**4 - _p**2 + 1) // _r)
assert _r == U**4 - U**2 + 1
assert _p == (U - 1) ** 2 * _r // 3 + U


def _dbl_step(t):
    """Double the twist point, returning (new point, line coeffs)."""
    x, y = t
    lam = fp2_mul(fp2_mul_fp(fp2_sqr(x), mpz(3)), fp2_inv(fp2_mul_fp(y, mpz(2))))
    c = fp2_sub(fp2_mul(lam, x), y)
    x3 = fp2_sub(fp2_sqr(lam), fp2_mul_fp(x, mpz(2)))
    y3 = fp2_sub(fp2_mul(lam, fp2_sub(x, x3)), y)
    return (x3, y3), (lam, c)


def _add_step(t, q):
    x1, y1 = t
    x2, y2 = q
    lam = fp2_mul(fp2_sub(y1, y2), fp2_inv(fp2_sub(x1, x2)))
    c = fp2_sub(fp2_mul(lam, x1), y1)
    x3 = fp2_sub(fp2_sub(fp2_sqr(lam), x1), x2)
    y3 = fp2_sub(fp2_mul(lam, fp2_sub(x1, x3)), y1)
    return (x3, y3), (lam, c)


def compute_lines(q):
    """Line coefficients for the full Miller loop at twist point q."""
    lines = []
    t = q
    for bit in _U_BITS:
        t, line = _dbl_step(t)
        lines.append(line)
        if bit:
            t, line = _add_step(t, q)
            lines.append(line)
    return lines


def miller_loop_lines(p, lines):
    """Evaluate precomputed lines at affine G1 point p and accumulate."""
    xp, yp = p
    nxp = (-xp) % P
    l0 = (yp, yp)  # xi * y_p with xi = 1+i
    f = FP12_ONE
    k = 0
    for bit in _U_BITS:
        f = fp12_sqr(f)
        lam, c = lines[k]
        k += 1
        f = fp12_mul_l035(f, l0, c, fp2_mul_fp(lam, nxp))
        if bit:
            lam, c = lines[k]
            k += 1
            f = fp12_mul_l035(f, l0, c, fp2_mul_fp(lam, nxp))
    return f


def miller_loop(p, q):
    """One-shot Miller loop with the lines computed on the fly."""
    xp, yp = p
    nxp = (-xp) % P
    l0 = (yp, yp)
    f = FP12_ONE
    t = q
    for bit in _U_BITS:
        f = fp12_sqr(f)
        t, (lam, c) = _dbl_step(t)
        f = fp12_mul_l035(f, l0, c, fp2_mul_fp(lam, nxp))
        if bit:
            t, (lam, c) = _add_step(t, q)
            f = fp12_mul_l035(f, l0, c, fp2_mul_fp(lam, nxp))
    return f


def _exp_by_u(a):
    """a^u in the cyclotomic subgroup (u < 0, so conjugate at the end)."""
    r = a
    for bit in _U_BITS:
        r = fp12_cyc_sqr(r)
        if bit:
            r = fp12_mul(r, a)
    return fp12_conj(r)


def final_exponentiation(f):
    # easy part: f^((p^6 - 1)(p^2 + 1))
    t = fp12_mul(fp12_conj(f), fp12_inv(f))
    f = fp12_mul(fp12_frob(fp12_frob(t)), t)
    # hard part via the u-chain (computes the pairing to the power 3,
    # which is itself a bilinear non-degenerate pairing)
    fu = _exp_by_u(f)
    t1 = fp12_mul(fu, fp12_conj(f))
    t1 = fp12_mul(_exp_by_u(t1), fp12_conj(t1))
    t2 = _exp_by_u(t1)
    t3 = _exp_by_u(t2)
    l1 = fp12_mul(t3, fp12_conj(t1))
    l0 = fp12_mul(_exp_by_u(l1), fp12_mul(fp12_sqr(f), f))
    out = fp12_mul(l0, fp12_frob(l1))
    out = fp12_mul(out, fp12_frob(fp12_frob(t2)))
    out = fp12_mul(out, fp12_frob(fp12_frob(fp12_frob(t1))))
    return out


def pairing(p, q):
    """e(p, q) for p in G1 (affine or None), q in G2."""
    if p is None or q is None:
        return FP12_ONE
    return final_exponentiation(fp12_conj(miller_loop(p, q)))


def miller_many(pairs):
    """Product of Miller loops; pairs may mix raw G2 points and line lists."""
    f = FP12_ONE
    for p, q in pairs:
        if p is None or q is None:
            continue
        if isinstance(q, list):
            f = fp12_mul(f, miller_loop_lines(p, q))
        else:
            f = fp12_mul(f, miller_loop(p, q))
    return f


def pairing_product(pairs):
    """prod e(p_i, q_i) with a single shared final exponentiation."""
    return final_exponentiation(fp12_conj(miller_many(pairs)))
