"""``did:ring`` identifiers: parsing, formatting and generation.

Method-specific ids of ``did:ring`` follow::

    ring-did   = "did:ring:" idstring
    idstring   = 40*48(base58char)

Other methods are parsed with the generic DID grammar (lowercase method
name, ``idchar`` body) so credential DIDs can live next to ring DIDs.
Percent-encoding is not supported.
"""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass
from typing import Optional

from .base58 import ALPHABET, b58encode
from .errors import (
    BadPrefixError,
    DegenerateIdentifierError,
    EmptyIdentifierError,
    IdLengthError,
    InvalidDidCharacterError,
    LowercaseError,
    MembershipError,
    RandomnessLengthError,
    RandomnessError,
)
from .group import Entropy, GroupElement
from .ring import Ring

RING_METHOD = "ring"
ID_MIN_LENGTH = 40
ID_MAX_LENGTH = 48
IDENTIFIER_RANDOMNESS_BYTES = 32
MIN_RANDOMNESS_BYTES = 16

_METHOD_CHARS = frozenset(string.ascii_lowercase + string.digits)
_ID_CHARS = frozenset(string.ascii_letters + string.digits + ".-_")
_BASE58 = frozenset(ALPHABET)


@dataclass(frozen=True)
class Did:
    method: str
    method_specific_id: str

    def __str__(self) -> str:
        return format_did(self)

    @property
    def is_ring(self) -> bool:
        return self.method == RING_METHOD


def _check_prefix(text: str) -> None:
    head = text[:4]
    if head == "did:":
        return
    if head.lower() == "did:":
        pos = next(i for i, c in enumerate(head) if c != "did:"[i])
        raise LowercaseError("DID scheme must be lowercase 'did'", pos)
    raise BadPrefixError("DID must start with 'did:'", 0)


def _check_ring_id(idstring: str, offset: int) -> None:
    for k, c in enumerate(idstring):
        if c not in _BASE58:
            raise InvalidDidCharacterError(f"{c!r} is not a base58 character", offset + k)
    if not ID_MIN_LENGTH <= len(idstring) <= ID_MAX_LENGTH:
        raise IdLengthError(
            f"ring id has {len(idstring)} characters, expected "
            f"{ID_MIN_LENGTH}..{ID_MAX_LENGTH}",
            offset,
        )


def parse_did(text: str) -> Did:
    """Parse a bare DID (no path, query or fragment)."""
    _check_prefix(text)
    sep = text.find(":", 4)
    if sep < 0:
        raise BadPrefixError("missing ':' after the method name", len(text))
    method = text[4:sep]
    if not method:
        raise BadPrefixError("empty method name", 4)
    for k, c in enumerate(method, 4):
        if c in string.ascii_uppercase:
            raise LowercaseError("method name must be lowercase", k)
        if c not in _METHOD_CHARS:
            raise InvalidDidCharacterError(f"{c!r} is not allowed in a method name", k)

    offset = sep + 1
    idstring = text[offset:]
    if not idstring:
        raise EmptyIdentifierError("empty method-specific id", offset)

    if method == RING_METHOD:
        _check_ring_id(idstring, offset)
    else:
        for k, c in enumerate(idstring, offset):
            if c not in _ID_CHARS and c != ":":
                raise InvalidDidCharacterError(f"{c!r} is not allowed in a DID", k)
        if idstring.endswith(":"):
            raise InvalidDidCharacterError("id may not end with ':'", len(text) - 1)
    return Did(method, idstring)


def parse_ring_did(text: str) -> Did:
    did = parse_did(text)
    if not did.is_ring:
        raise BadPrefixError(f"expected method 'ring', got {did.method!r}", 4)
    return did


def format_did(did: Did) -> str:
    text = f"did:{did.method}:{did.method_specific_id}"
    if not did.method_specific_id:
        raise EmptyIdentifierError("empty method-specific id", len(text))
    # Validation by re-parsing keeps one source of truth for the grammar.
    if parse_did(text) != did:
        raise InvalidDidCharacterError("DID does not round-trip", 0)
    return text


def split_did_url(text: str) -> tuple[Did, Optional[str]]:
    """Split ``did:...#fragment`` into the DID and the fragment (if any)."""
    base, sep, fragment = text.partition("#")
    did = parse_did(base)
    if sep and not fragment:
        raise InvalidDidCharacterError("empty fragment", len(text))
    return did, (fragment if sep else None)


def is_valid_ring_idstring(idstring: str) -> bool:
    try:
        _check_ring_id(idstring, 0)
    except (InvalidDidCharacterError, IdLengthError):
        return False
    return True


# ---------------------------------------------------------------------------
# Identifier generation
# ---------------------------------------------------------------------------

def identifier_preimage(pk_s: GroupElement, r: bytes, ring: Ring) -> bytes:
    """``pk_s || r || b"ring" || pk_1 || ... || pk_n``, fixed-width pieces."""
    if pk_s not in ring:
        raise MembershipError("signer key is not a member of the ring")
    if len(r) < MIN_RANDOMNESS_BYTES:
        raise RandomnessLengthError(
            f"identifier randomness needs at least {MIN_RANDOMNESS_BYTES} bytes, got {len(r)}"
        )
    if len(r) != IDENTIFIER_RANDOMNESS_BYTES:
        # a fixed width keeps the concatenation injective
        raise RandomnessLengthError(
            f"identifier randomness must be exactly {IDENTIFIER_RANDOMNESS_BYTES} bytes"
        )
    return pk_s.encode() + bytes(r) + RING_METHOD.encode("ascii") + ring.encoding


def generate_ring_identifier(pk_s: GroupElement, r: bytes, ring: Ring) -> str:
    digest = hashlib.sha512(identifier_preimage(pk_s, r, ring)).digest()
    ident = b58encode(digest[:32])
    if len(ident) < ID_MIN_LENGTH:
        raise DegenerateIdentifierError(
            f"identifier {ident!r} is shorter than {ID_MIN_LENGTH} characters"
        )
    return ident


def new_ring_identifier(
    pk_s: GroupElement, ring: Ring, entropy: Entropy, max_attempts: int = 16
) -> tuple[str, bytes]:
    """Draw fresh randomness until the identifier satisfies the grammar.

    Returns the identifier and the randomness that produced it.
    """
    for _ in range(max_attempts):
        r = entropy.read(IDENTIFIER_RANDOMNESS_BYTES)
        try:
            return generate_ring_identifier(pk_s, r, ring), r
        except DegenerateIdentifierError:
            continue
    raise RandomnessError("could not derive a well-formed identifier")


def ring_did(identifier: str) -> Did:
    _check_ring_id(identifier, len("did:ring:"))
    return Did(RING_METHOD, identifier)
