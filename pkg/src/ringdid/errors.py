"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
1:1 onto process exit statuses. Cryptographic rejection is *not* an error:
verifiers return ``False``.
"""

from __future__ import annotations


class RingDidError(Exception):
    exit_code = 4


# -- group / encoding -------------------------------------------------------

class RandomnessError(RingDidError):
    exit_code = 11


class EncodingError(RingDidError):
    """Base class for element/scalar decoding failures."""

    exit_code = 10


class TruncatedEncodingError(EncodingError):
    pass


class InvalidPointError(EncodingError):
    """Bytes of the right width that are not a point of the group."""


class IdentityElementError(EncodingError):
    pass


class NonCanonicalScalarError(EncodingError):
    pass


class KeyFileError(EncodingError):
    pass


# -- rings and signatures ---------------------------------------------------

class RingTooSmallError(RingDidError):
    exit_code = 12


class DuplicateKeyError(RingDidError):
    exit_code = 13


class SignerBindingError(RingDidError):
    exit_code = 14


class MalformedSignatureError(RingDidError):
    exit_code = 15


class LayoutMismatchError(MalformedSignatureError):
    pass


# -- identifiers ------------------------------------------------------------

class InvalidCharacterError(RingDidError):
    """A character outside the base58 alphabet."""

    exit_code = 21

    def __init__(self, char: str, position: int):
        super().__init__(f"invalid base58 character {char!r} at position {position}")
        self.char = char
        self.position = position


class DidParseError(RingDidError):
    exit_code = 20

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class BadPrefixError(DidParseError):
    pass


class LowercaseError(DidParseError):
    pass


class IdLengthError(DidParseError):
    pass


class InvalidDidCharacterError(DidParseError):
    pass


class EmptyIdentifierError(DidParseError):
    pass


class MembershipError(RingDidError):
    exit_code = 22


class RandomnessLengthError(RingDidError):
    exit_code = 22


class DegenerateIdentifierError(RingDidError):
    """Hash output too small to satisfy the 40..48 character bound."""

    exit_code = 22


# -- documents --------------------------------------------------------------

class DocumentError(RingDidError):
    exit_code = 30


class DocumentParseError(DocumentError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class MissingFieldError(DocumentError):
    def __init__(self, field: str):
        super().__init__(f"missing required field {field!r}")
        self.field = field


class MalformedDidFieldError(DocumentError):
    def __init__(self, field: str, cause: Exception):
        super().__init__(f"malformed DID in {field!r}: {cause}")
        self.field = field


class ServiceTypeError(DocumentError):
    pass


class RingDecodeError(DocumentError):
    pass


class DocumentValidationError(DocumentError):
    pass


class CorrespondenceError(DocumentError):
    pass


# -- registry ---------------------------------------------------------------

class NotFoundError(RingDidError):
    exit_code = 40


class RevokedError(RingDidError):
    exit_code = 41

    def __init__(self, did: str, revoked_at: str):
        super().__init__(f"{did} was revoked at {revoked_at}")
        self.did = did
        self.revoked_at = revoked_at


class ConflictError(RingDidError):
    exit_code = 42


class UnresolvableRingError(RingDidError):
    exit_code = 43

    def __init__(self, endpoint: str, cause: Exception):
        super().__init__(f"ring endpoint {endpoint} cannot be resolved: {cause}")
        self.endpoint = endpoint


class IntegrityError(RingDidError):
    exit_code = 44


class UnauthorizedError(RingDidError):
    exit_code = 45


class OperationNotPermittedError(RingDidError):
    exit_code = 46


class AlreadyRevokedError(RingDidError):
    exit_code = 47


# -- identification ---------------------------------------------------------

class NoMembershipError(RingDidError):
    exit_code = 50


class ReplayError(RingDidError):
    exit_code = 51


class ResolutionError(RingDidError):
    exit_code = 52
