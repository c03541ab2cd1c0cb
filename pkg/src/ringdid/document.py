"""``did:ring`` documents and the single-key credential documents they link.

Serialized shape of a ring document::

    {
      "@context": ["https://www.w3.org/ns/did/v1"],
      "id": "did:ring:<identifier>",
      "authenticationMethod": [{
        "id": "did:ring:<identifier>",
        "type": "<ring scheme type>",
        "controller": "did:ring:<identifier>",
        "publicKeyBase58": "<base58 of the concatenated ring keys>"
      }],
      "service": [
        {"id": "<credential did>#cred-1", "type": "LinkedDomains",
         "serviceEndpoint": "<credential did>"},
        ...
      ]
    }

Services are listed in ring order: service ``k`` points to the credential
whose key is ring position ``k``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

from .base58 import b58decode, b58encode
from .did import Did, parse_did, ring_did, split_did_url
from .errors import (
    CorrespondenceError,
    DidParseError,
    DocumentParseError,
    DuplicateKeyError,
    DocumentValidationError,
    EncodingError,
    InvalidCharacterError,
    MalformedDidFieldError,
    MissingFieldError,
    RingDecodeError,
    RingTooSmallError,
    ServiceTypeError,
)
from .group import GroupElement
from .ring import SCHEMES, AosScheme, Ring

DID_CONTEXT = "https://www.w3.org/ns/did/v1"
LINKED_DOMAINS = "LinkedDomains"
CREDENTIAL_KEY_TYPE = "EcdsaSecp256k1VerificationKey2019"
RING_METHOD_TYPES = frozenset(s.method_type for s in SCHEMES.values())


@dataclass(frozen=True)
class AuthenticationMethod:
    id: Did
    type: str
    controller: Did
    public_key_base58: str
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ServiceEndpointEntry:
    id: str
    service_endpoint: Did
    type: str = LINKED_DOMAINS
    extra: dict = field(default_factory=dict)

    @property
    def fragment(self) -> str:
        return self.id.partition("#")[2]


@dataclass(frozen=True)
class DidDocument:
    context: tuple[str, ...]
    id: Did
    authentication_methods: tuple[AuthenticationMethod, ...]
    services: tuple[ServiceEndpointEntry, ...]
    extra: dict = field(default_factory=dict)

    @property
    def authentication(self) -> AuthenticationMethod:
        return self.authentication_methods[0]

    @property
    def credential_dids(self) -> list[Did]:
        return [s.service_endpoint for s in self.services]


@dataclass(frozen=True)
class CredentialDocument:
    """A constituent credential: one DID, one public key."""

    id: Did
    public_key_base58: str
    context: tuple[str, ...] = (DID_CONTEXT,)
    metadata: dict = field(default_factory=dict)

    @property
    def public_key(self) -> GroupElement:
        return GroupElement.decode(b58decode(self.public_key_base58))

    @classmethod
    def for_key(cls, did: Did, pk: GroupElement, **metadata) -> CredentialDocument:
        return cls(did, b58encode(pk.encode()), metadata=metadata)


Document = Union[DidDocument, CredentialDocument]

CREDENTIAL_METHOD = "cred"


def credential_did_for_key(pk: GroupElement) -> Did:
    """Default DID for a bare credential key: ``did:cred:<base58 of a key hash>``."""
    return Did(CREDENTIAL_METHOD, b58encode(hashlib.sha256(pk.encode()).digest()[:20]))


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def encode_ring(ring: Ring) -> str:
    return b58encode(ring.encoding)


def create_ring_document(
    ring: Ring,
    credential_dids: Sequence[Did],
    identifier: str,
    method_type: str = AosScheme.method_type,
) -> DidDocument:
    """Build the document for ``did:ring:<identifier>``.

    ``credential_dids[k]`` must be the credential whose key is ``ring.keys[k]``.
    """
    if len(credential_dids) < 2:
        raise RingTooSmallError(f"a ring DID needs at least 2 credentials, got {len(credential_dids)}")
    if len(credential_dids) != len(ring):
        raise CorrespondenceError(
            f"{len(credential_dids)} credentials for a ring of {len(ring)} keys"
        )
    if method_type not in RING_METHOD_TYPES:
        raise DocumentValidationError(f"unknown ring verification type {method_type!r}")
    did = ring_did(identifier)
    auth = AuthenticationMethod(did, method_type, did, encode_ring(ring))
    services = tuple(
        ServiceEndpointEntry(f"{cred}#cred-{k}", cred)
        for k, cred in enumerate(credential_dids, 1)
    )
    return DidDocument((DID_CONTEXT,), did, (auth,), services)


def extract_ring(doc: DidDocument) -> Ring:
    """Decode the ring embedded in the authentication method."""
    try:
        raw = b58decode(doc.authentication.public_key_base58)
        ring = Ring.decode(raw)
    except (EncodingError, InvalidCharacterError, DuplicateKeyError) as exc:
        raise RingDecodeError(f"publicKeyBase58 does not hold a ring: {exc}") from exc
    if ring.encoding != raw:
        raise RingDecodeError("embedded ring keys are not in canonical order")
    return ring


# ---------------------------------------------------------------------------
# Validation and serialization
# ---------------------------------------------------------------------------

def validate_document(doc: DidDocument) -> None:
    if DID_CONTEXT not in doc.context:
        raise DocumentValidationError(f"@context must include {DID_CONTEXT}")
    if not doc.id.is_ring:
        raise DocumentValidationError(f"document id must be a did:ring, got method {doc.id.method!r}")
    if len(doc.authentication_methods) != 1:
        raise DocumentValidationError(
            f"expected exactly one authentication method, got {len(doc.authentication_methods)}"
        )
    if doc.authentication.type not in RING_METHOD_TYPES:
        raise DocumentValidationError(
            f"authentication type {doc.authentication.type!r} is not a ring verification type"
        )
    if len(doc.services) < 2:
        raise DocumentValidationError(f"a ring document needs at least 2 services, got {len(doc.services)}")
    fragments = set()
    for svc in doc.services:
        if svc.type != LINKED_DOMAINS:
            raise ServiceTypeError(f"service {svc.id} has type {svc.type!r}, expected {LINKED_DOMAINS!r}")
        _, fragment = split_did_url(svc.id)
        if not fragment:
            raise DocumentValidationError(f"service id {svc.id!r} lacks a fragment")
        if fragment in fragments:
            raise DocumentValidationError(f"duplicate service fragment #{fragment}")
        fragments.add(fragment)
    ring = extract_ring(doc)
    if len(ring) != len(doc.services):
        raise DocumentValidationError(
            f"embedded ring has {len(ring)} keys but the document lists {len(doc.services)} services"
        )


def _credential_to_dict(doc: CredentialDocument) -> dict:
    did = str(doc.id)
    out = dict(doc.metadata)
    out.update({
        "@context": list(doc.context),
        "id": did,
        "verificationMethod": [{
            "id": f"{did}#key-1",
            "type": CREDENTIAL_KEY_TYPE,
            "controller": did,
            "publicKeyBase58": doc.public_key_base58,
        }],
    })
    return out


def document_to_dict(doc: Document) -> dict:
    if isinstance(doc, CredentialDocument):
        validate_credential(doc)
        return _credential_to_dict(doc)
    validate_document(doc)
    out = dict(doc.extra)
    out.update({
        "@context": list(doc.context),
        "id": str(doc.id),
        "authenticationMethod": [
            {
                **a.extra,
                "id": str(a.id),
                "type": a.type,
                "controller": str(a.controller),
                "publicKeyBase58": a.public_key_base58,
            }
            for a in doc.authentication_methods
        ],
        "service": [
            {
                **s.extra,
                "id": s.id,
                "type": s.type,
                "serviceEndpoint": str(s.service_endpoint),
            }
            for s in doc.services
        ],
    })
    return out


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def serialize_document(doc: Document) -> str:
    """Deterministic, key-sorted JSON text."""
    return canonical_json(document_to_dict(doc))


# -- parsing ----------------------------------------------------------------

def _require(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise MissingFieldError(f"{path}{key}")
    return obj[key]


def _string(obj: dict, key: str, path: str) -> str:
    value = _require(obj, key, path)
    if not isinstance(value, str):
        raise DocumentValidationError(f"{path}{key} must be a string")
    return value


def _did(obj: dict, key: str, path: str) -> Did:
    value = _string(obj, key, path)
    try:
        return parse_did(value)
    except DidParseError as exc:
        raise MalformedDidFieldError(f"{path}{key}", exc) from exc


def _list(obj: dict, key: str, path: str) -> list:
    value = _require(obj, key, path)
    if not isinstance(value, list):
        raise DocumentValidationError(f"{path}{key} must be a list")
    return value


def _object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise DocumentValidationError(f"{path} must be an object")
    return value


def _context(obj: dict) -> tuple[str, ...]:
    context = _require(obj, "@context", "")
    if isinstance(context, str):
        context = [context]
    if not isinstance(context, list) or not all(isinstance(c, str) for c in context):
        raise DocumentValidationError("@context must be a list of strings")
    return tuple(context)


def _extra(obj: dict, known: set[str]) -> dict:
    return {k: v for k, v in obj.items() if k not in known}


def ring_document_from_dict(obj: dict) -> DidDocument:
    obj = _object(obj, "document")
    context = _context(obj)
    did = _did(obj, "id", "")

    auths = []
    for k, raw in enumerate(_list(obj, "authenticationMethod", "")):
        path = f"authenticationMethod[{k}]."
        raw = _object(raw, path[:-1])
        auths.append(AuthenticationMethod(
            id=_did(raw, "id", path),
            type=_string(raw, "type", path),
            controller=_did(raw, "controller", path),
            public_key_base58=_string(raw, "publicKeyBase58", path),
            extra=_extra(raw, {"id", "type", "controller", "publicKeyBase58"}),
        ))

    services = []
    for k, raw in enumerate(_list(obj, "service", "")):
        path = f"service[{k}]."
        raw = _object(raw, path[:-1])
        sid = _string(raw, "id", path)
        try:
            split_did_url(sid)
        except DidParseError as exc:
            raise MalformedDidFieldError(f"{path}id", exc) from exc
        services.append(ServiceEndpointEntry(
            id=sid,
            type=_string(raw, "type", path),
            service_endpoint=_did(raw, "serviceEndpoint", path),
            extra=_extra(raw, {"id", "type", "serviceEndpoint"}),
        ))

    doc = DidDocument(
        context, did, tuple(auths), tuple(services),
        _extra(obj, {"@context", "id", "authenticationMethod", "service"}),
    )
    validate_document(doc)
    return doc


def validate_credential(doc: CredentialDocument) -> None:
    if doc.id.is_ring:
        raise DocumentValidationError("a credential cannot use the ring method")
    try:
        doc.public_key
    except (EncodingError, InvalidCharacterError) as exc:
        raise DocumentValidationError(f"credential key is invalid: {exc}") from exc


def credential_document_from_dict(obj: dict) -> CredentialDocument:
    obj = _object(obj, "document")
    context = _context(obj)
    did = _did(obj, "id", "")
    methods = _list(obj, "verificationMethod", "")
    if len(methods) != 1:
        raise DocumentValidationError("a credential document carries exactly one verification method")
    method = _object(methods[0], "verificationMethod[0]")
    doc = CredentialDocument(
        did,
        _string(method, "publicKeyBase58", "verificationMethod[0]."),
        context,
        _extra(obj, {"@context", "id", "verificationMethod"}),
    )
    validate_credential(doc)
    return doc


def document_from_dict(obj: dict) -> Document:
    obj = _object(obj, "document")
    did = _did(obj, "id", "")
    if did.is_ring:
        return ring_document_from_dict(obj)
    return credential_document_from_dict(obj)


def _load(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentParseError(exc.msg, exc.pos) from exc
    if not isinstance(obj, dict):
        raise DocumentParseError("document must be a JSON object", 0)
    return obj


def parse_document(text: str) -> DidDocument:
    """Parse and validate a ring document."""
    return ring_document_from_dict(_load(text))


def parse_any_document(text: str) -> Document:
    return document_from_dict(_load(text))
