"""Polynomial secret sharing helpers over the scalar field."""

import secrets

from gmpy2 import mpz, invert

from .curve import R


def random_scalar():
    return mpz(secrets.randbelow(int(R)))


def random_poly(degree, const):
    """Coefficients [const, c1, ..., c_degree], low order first."""
    return [mpz(const) % R] + [random_scalar() for _ in range(degree)]

def poly_eval(coeffs, x):
    acc = mpz(0)
    for c in reversed(coeffs):
        acc = (acc * x + c) % R
    return acc


def lagrange_at_zero(i, indices):
    """Coefficient of share i when interpolating f(0) from the given index set."""
    num = mpz(1)
    den = mpz(1)
    for j in indices:
        if j == i:
            continue
        num = num * (-j) % R
        den = den * (i - j) % R
    return num * invert(den, R) % R
