"""Pairing correctness: bilinearity, prepared lines, shared final exp."""

import secrets

from gmpy2 import mpz

from cipherstream.algebra import curve as C
from cipherstream.algebra import fields as F
from cipherstream.algebra import pairing as E


def rand_k():
    return mpz(secrets.randbelow(int(C.R)))


def test_non_degenerate():
    gt = E.pairing(C.G1_GEN, C.G2_GEN)
    assert not F.fp12_eq(gt, F.FP12_ONE)
    assert F.fp12_eq(E.final_exponentiation(F.FP12_ONE), F.FP12_ONE)


def test_bilinear():
    a, b = rand_k(), rand_k()
    lhs = E.pairing(C.g1_mul(C.G1_GEN, a), C.g2_mul(C.G2_GEN, b))
    base = E.pairing(C.G1_GEN, C.G2_GEN)
    assert F.fp12_eq(lhs, F.fp12_pow(base, a * b % C.R))


def test_linear_in_first_slot():
    a = rand_k()
    p = C.g1_mul(C.G1_GEN, a)
    q = C.g2_mul(C.G2_GEN, rand_k())
    lhs = F.fp12_mul(E.pairing(p, q), E.pairing(C.g1_neg(p), q))
    assert F.fp12_eq(lhs, F.FP12_ONE)


def test_identity_slots():
    q = C.g2_mul(C.G2_GEN, rand_k())
    assert F.fp12_eq(E.pairing(None, q), F.FP12_ONE)
    assert F.fp12_eq(E.pairing(C.G1_GEN, None), F.FP12_ONE)


def test_prepared_lines_match():
    p = C.g1_mul(C.G1_GEN, rand_k())
    q = C.g2_mul(C.G2_GEN, rand_k())
    lines = E.compute_lines(q)
    via_lines = E.final_exponentiation(F.fp12_conj(E.miller_loop_lines(p, lines)))
    assert F.fp12_eq(via_lines, E.pairing(p, q))


def test_product_shared_final_exp():
    pairs = []
    expect = F.FP12_ONE
    for _ in range(3):
        p = C.g1_mul(C.G1_GEN, rand_k())
        q = C.g2_mul(C.G2_GEN, rand_k())
        pairs.append((p, q))
        expect = F.fp12_mul(expect, E.pairing(p, q))
    assert F.fp12_eq(E.pairing_product(pairs), expect)


def test_pairing_output_order():
    gt = E.pairing(C.g1_mul(C.G1_GEN, rand_k()), C.G2_GEN)
    assert F.fp12_eq(F.fp12_pow(gt, C.R), F.FP12_ONE)


def test_cyclotomic_square_on_pairing_output():
    gt = E.pairing(C.g1_mul(C.G1_GEN, rand_k()), C.G2_GEN)
    assert F.fp12_eq(F.fp12_cyc_sqr(gt), F.fp12_sqr(gt))
    # conjugate inverts inside the cyclotomic subgroup
    assert F.fp12_eq(F.fp12_mul(gt, F.fp12_conj(gt)), F.FP12_ONE)


def test_cyc_exp_matches_generic():
    gt = E.pairing(C.G1_GEN, C.g2_mul(C.G2_GEN, rand_k()))
    k = rand_k()
    assert F.fp12_eq(F.cyc_exp(gt, k), F.fp12_pow(gt, k))
