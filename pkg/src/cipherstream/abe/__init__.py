from .tree import TreeNode, AND, OR
from .scheme import (
    AbeMaster,
    AbePublic,
    AbeCiphertext,
    AttributeIndex,
    TransformKey,
    TransformedCiphertext,
    abe_gen,
    keygen,
    encrypt,
    encrypt_bytes,
    trans,
    dec,
    dec_bytes,
    tct_identity,
    tct_mul,
    tct_div,
    unwrap_key,
    ct_to_bytes,
    ct_from_bytes,
    tk_to_bytes,
    tk_from_bytes,
    tct_to_bytes,
    tct_from_bytes,
)

__all__ = [
    "TreeNode",
    "AND",
    "OR",
    "AbeMaster",
    "AbePublic",
    "AbeCiphertext",
    "AttributeIndex",
    "TransformKey",
    "TransformedCiphertext",
    "abe_gen",
    "keygen",
    "encrypt",
    "encrypt_bytes",
    "trans",
    "dec",
    "dec_bytes",
    "tct_identity",
    "tct_mul",
    "tct_div",
    "unwrap_key",
    "ct_to_bytes",
    "ct_from_bytes",
    "tk_to_bytes",
    "tk_from_bytes",
    "tct_to_bytes",
    "tct_from_bytes",
]
