from .context import (
    R,
    G1Element,
    G2Element,
    GTElement,
    PreparedG2,
    BilinearContext,
    default_context,
    scalar_to_bytes,
    scalar_from_bytes,
)
from .lagrange import random_scalar, random_poly, poly_eval, lagrange_at_zero
from .prp import SmallDomainPRP
from . import counters

__all__ = [
    "R",
    "G1Element",
    "G2Element",
    "GTElement",
    "PreparedG2",
    "BilinearContext",
    "default_context",
    "scalar_to_bytes",
    "scalar_from_bytes",
    "random_scalar",
    "random_poly",
    "poly_eval",
    "lagrange_at_zero",
    "SmallDomainPRP",
    "counters",
]
