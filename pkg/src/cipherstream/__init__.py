"""cipherstream: policy-carrying encrypted stream processing.

Owners encrypt tuple streams under attribute policies, an untrusted
relay transforms ciphertexts to enforce filters, joins and windowed
aggregates without seeing plaintexts, and subscribers finish with cheap
decryptions.
"""

__version__ = "0.1.0"
