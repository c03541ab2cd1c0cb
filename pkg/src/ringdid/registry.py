"""Verifiable data registry: register, resolve, update and revoke.

Two interchangeable backends share the operations below:

* :class:`MemoryStore` keeps records in a dict.
* :class:`FileStore` persists one JSON envelope per DID under
  ``<root>/records/<method-specific-id>.json`` plus ``<root>/index.json``.

Every operation runs under the store's lock, so operations on one DID are
linearizable within a process.
"""

from __future__ import annotations

import dataclasses
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Union

from .did import Did, new_ring_identifier, parse_did
from .document import (
    CredentialDocument,
    DidDocument,
    Document,
    canonical_json,
    create_ring_document,
    document_from_dict,
    document_to_dict,
    extract_ring,
)
from .errors import (
    AlreadyRevokedError,
    ConflictError,
    DocumentValidationError,
    IntegrityError,
    MalformedSignatureError,
    NotFoundError,
    OperationNotPermittedError,
    RevokedError,
    RingDidError,
    RingTooSmallError,
    UnauthorizedError,
    UnresolvableRingError,
)
from .group import Entropy, GroupElement
from .ring import SCHEMES, Ring, Signature, ring_new, verify_any

ACTIVE = "active"
REVOKED = "revoked"

DidLike = Union[Did, str]


def _as_did(did: DidLike) -> Did:
    return did if isinstance(did, Did) else parse_did(did)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class RegistryRecord:
    did: Did
    document: Document
    status: str = ACTIVE
    version: int = 1
    created: str = ""
    updated: str = ""
    revoked_at: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "did": str(self.did),
            "kind": "ring" if isinstance(self.document, DidDocument) else "credential",
            "status": self.status,
            "version": self.version,
            "created": self.created,
            "updated": self.updated,
            "revokedAt": self.revoked_at,
            "document": document_to_dict(self.document),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> RegistryRecord:
        return cls(
            did=parse_did(obj["did"]),
            document=document_from_dict(obj["document"]),
            status=obj["status"],
            version=obj["version"],
            created=obj["created"],
            updated=obj["updated"],
            revoked_at=obj.get("revokedAt"),
        )


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

class RegistryStore:
    """Record storage. Subclasses implement ``get``, ``put`` and ``dids``."""

    def __init__(self, clock: Callable[[], str] = utc_now):
        self.clock = clock
        self.lock = threading.RLock()

    def get(self, did: Did) -> Optional[RegistryRecord]:
        raise NotImplementedError

    def put(self, record: RegistryRecord, *, new: bool = False) -> None:
        raise NotImplementedError

    def dids(self) -> Iterator[Did]:
        raise NotImplementedError

    def __len__(self) -> int:
        return sum(1 for _ in self.dids())


class MemoryStore(RegistryStore):
    def __init__(self, clock: Callable[[], str] = utc_now):
        super().__init__(clock)
        self._records: dict[Did, RegistryRecord] = {}

    def get(self, did):
        return self._records.get(did)

    def put(self, record, *, new=False):
        self._records[record.did] = record

    def dids(self):
        return iter(list(self._records))


class FileStore(RegistryStore):
    def __init__(self, root: Union[str, Path], clock: Callable[[], str] = utc_now):
        super().__init__(clock)
        self.root = Path(root)
        self.records_dir = self.root / "records"
        self.index_path = self.root / "index.json"
        self.records_dir.mkdir(parents=True, exist_ok=True)
        if self.index_path.exists():
            self._index: dict[str, str] = json.loads(self.index_path.read_text(encoding="utf-8"))
        else:
            self._index = {}
            self._write(self.index_path, canonical_json(self._index))

    @staticmethod
    def _write(path: Path, text: str) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text + "\n", encoding="utf-8")
        os.replace(tmp, path)

    @staticmethod
    def _filename(did: Did) -> str:
        return did.method_specific_id.replace(":", "%3A") + ".json"

    def get(self, did):
        name = self._index.get(str(did))
        if name is None:
            return None
        obj = json.loads((self.records_dir / name).read_text(encoding="utf-8"))
        return RegistryRecord.from_dict(obj)

    def put(self, record, *, new=False):
        key = str(record.did)
        name = self._filename(record.did)
        if new:
            if name in self._index.values():
                raise ConflictError(f"record file {name} is already taken by another DID")
        self._write(self.records_dir / name, canonical_json(record.to_dict()))
        if key not in self._index:
            self._index[key] = name
            self._write(self.index_path, canonical_json(self._index))

    def dids(self):
        return (parse_did(d) for d in list(self._index))


def open_store(root: Optional[Union[str, Path]] = None) -> RegistryStore:
    """File store at ``root`` (or ``$RINGDID_REGISTRY``); memory store if neither."""
    root = root or os.environ.get("RINGDID_REGISTRY")
    return FileStore(root) if root else MemoryStore()


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def register(store: RegistryStore, document: Document) -> RegistryRecord:
    document_to_dict(document)  # validates
    with store.lock:
        if store.get(document.id) is not None:
            raise ConflictError(f"{document.id} is already registered")
        now = store.clock()
        record = RegistryRecord(document.id, document, ACTIVE, 1, now, now)
        store.put(record, new=True)
        return record


def resolve_record(store: RegistryStore, did: DidLike) -> RegistryRecord:
    did = _as_did(did)
    with store.lock:
        record = store.get(did)
    if record is None:
        raise NotFoundError(f"{did} is not registered")
    if record.status == REVOKED:
        raise RevokedError(str(did), record.revoked_at or "")
    return record


def resolve(store: RegistryStore, did: DidLike) -> Document:
    return resolve_record(store, did).document


def _ring_document(store: RegistryStore, ring_did: DidLike) -> tuple[RegistryRecord, DidDocument]:
    record = resolve_record(store, ring_did)
    if not isinstance(record.document, DidDocument):
        raise DocumentValidationError(f"{ring_did} is not a ring DID")
    return record, record.document


def _credential_key(store: RegistryStore, did: Did) -> GroupElement:
    doc = resolve(store, did)
    if not isinstance(doc, CredentialDocument):
        raise DocumentValidationError(f"{did} is not a credential DID")
    return doc.public_key


def resolve_ring_keys(store: RegistryStore, ring_did: DidLike) -> Ring:
    """Rebuild the ring by resolving every service endpoint.

    The result must match the ring embedded in the document key for key;
    any disagreement is an :class:`IntegrityError`.
    """
    with store.lock:
        _, doc = _ring_document(store, ring_did)
        keys = []
        for svc in doc.services:
            try:
                keys.append(_credential_key(store, svc.service_endpoint))
            except RingDidError as exc:
                raise UnresolvableRingError(str(svc.service_endpoint), exc) from exc
    ring = ring_new(keys)
    embedded = extract_ring(doc)
    if tuple(keys) != embedded.keys:
        raise IntegrityError(f"embedded ring of {doc.id} disagrees with its service endpoints")
    return ring


def create_ring_did(
    store: RegistryStore,
    credential_dids: Iterable[DidLike],
    signer_pk: GroupElement,
    entropy: Entropy,
    scheme: str = "aos",
) -> DidDocument:
    """Resolve the credentials, derive the identifier and register the ring DID."""
    pairs = []
    for did in credential_dids:
        did = _as_did(did)
        pairs.append((_credential_key(store, did), did))
    if len(pairs) < 2:
        raise RingTooSmallError(f"a ring DID needs at least 2 credentials, got {len(pairs)}")
    ring = ring_new(pk for pk, _ in pairs)
    pairs.sort(key=lambda p: p[0].encode())
    identifier, _ = new_ring_identifier(signer_pk, ring, entropy)
    doc = create_ring_document(
        ring, [did for _, did in pairs], identifier, SCHEMES[scheme].method_type
    )
    register(store, doc)
    return doc


def update_payload(ring_did: DidLike, add: Iterable[DidLike], remove: Iterable[DidLike], version: int) -> bytes:
    """Bytes a ring member signs to authorize an update at ``version``."""
    body = {
        "op": "did:ring/update",
        "did": str(_as_did(ring_did)),
        "add": sorted(str(_as_did(d)) for d in add),
        "remove": sorted(str(_as_did(d)) for d in remove),
        "version": version,
    }
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


def update_ring(
    store: RegistryStore,
    ring_did: DidLike,
    add_endpoints: Iterable[DidLike],
    remove_endpoints: Iterable[DidLike],
    authorization: Signature,
) -> RegistryRecord:
    """Add/remove credential endpoints, authorized by a signature of the current ring.

    The authorization is checked against the ring embedded in the current
    document so that a ring with a revoked member can still be repaired.
    """
    add = [_as_did(d) for d in add_endpoints]
    remove = [_as_did(d) for d in remove_endpoints]
    with store.lock:
        record, doc = _ring_document(store, ring_did)
        current = extract_ring(doc)
        payload = update_payload(doc.id, add, remove, record.version)
        try:
            ok = verify_any(current, payload, authorization)
        except MalformedSignatureError:
            ok = False
        if not ok:
            raise UnauthorizedError(f"update of {doc.id} is not signed by its ring")

        members = dict(zip(doc.credential_dids, current.keys))
        for did in remove:
            if did not in members:
                raise NotFoundError(f"{did} is not an endpoint of {doc.id}")
            del members[did]
        for did in add:
            if did in members:
                raise ConflictError(f"{did} is already an endpoint of {doc.id}")
            members[did] = _credential_key(store, did)
        if len(members) < 2:
            raise RingTooSmallError(f"update would leave {len(members)} endpoint(s)")

        ring = ring_new(members.values())
        ordered = sorted(members, key=lambda d: members[d].encode())
        fresh = create_ring_document(
            ring, ordered, doc.id.method_specific_id, doc.authentication.type
        )
        updated = dataclasses.replace(fresh, context=doc.context, extra=doc.extra)
        new_record = dataclasses.replace(
            record, document=updated, version=record.version + 1, updated=store.clock()
        )
        store.put(new_record)
        return new_record


def revoke_credential(store: RegistryStore, credential_did: DidLike) -> RegistryRecord:
    did = _as_did(credential_did)
    with store.lock:
        record = store.get(did)
        if record is None:
            raise NotFoundError(f"{did} is not registered")
        if isinstance(record.document, DidDocument):
            raise OperationNotPermittedError("a did:ring DID cannot be deleted or revoked")
        if record.status == REVOKED:
            raise AlreadyRevokedError(f"{did} is already revoked")
        now = store.clock()
        new_record = dataclasses.replace(
            record, status=REVOKED, version=record.version + 1, updated=now, revoked_at=now
        )
        store.put(new_record)
        return new_record
