"""Exception taxonomy shared across the package."""


class CipherStreamError(Exception):
    """Base class for all package errors."""


class DomainError(CipherStreamError):
    """A plaintext or scalar falls outside its configured domain."""


class DlogRangeError(CipherStreamError):
    """Discrete log lookup fell outside the covered exponent range."""


class UnknownAttributeError(CipherStreamError):
    """An attribute string is not part of the deployment universe."""


class PolicyError(CipherStreamError):
    """Malformed or unsupported policy/predicate specification."""


class WireFormatError(CipherStreamError):
    """A frame or serialized object failed to parse."""


class BundleError(CipherStreamError):
    """A key bundle failed structural validation."""


class BundleRoleError(BundleError):
    """A key bundle was loaded into the wrong role (hygiene violation)."""


class StreamStateError(CipherStreamError):
    """Out-of-order timestamp, unknown stream, or duplicate registration."""

    def __init__(self, message, code=None):
        super().__init__(message)
        self.code = code


class RelayError(CipherStreamError):
    """The relay answered a frame with an ERROR frame."""

    def __init__(self, code, message):
        super().__init__(f"relay error {code}: {message}")
        self.code = code
        self.message = message
