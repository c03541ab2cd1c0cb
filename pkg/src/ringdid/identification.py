"""Holder/verifier identification with a ring DID.

The verifier issues a single-use challenge, the holder answers with a ring
signature over ``(ring DID, nonce, verifier context)``, and the verifier
resolves the ring through the registry before checking the signature. The
presentation carries nothing that names the signing credential.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from .base58 import b58decode, b58encode
from .did import Did, parse_ring_did
from .document import DidDocument
from .errors import (
    MalformedSignatureError,
    NoMembershipError,
    ReplayError,
    ResolutionError,
    RingDidError,
)
from .group import Entropy, KeyPair
from .registry import RegistryStore, resolve, resolve_ring_keys
from .ring import Ring, Signature, SignerPosition, scheme_for_type, signature_from_text, signature_to_text

DEFAULT_WINDOW = 300.0
NONCE_BYTES = 32
MIN_NONCE_BYTES = 16
_PURPOSE = "did:ring/identification/v1"


@dataclass(frozen=True)
class Challenge:
    nonce: bytes
    context: str
    issued_at: float

    def __post_init__(self):
        if len(self.nonce) < MIN_NONCE_BYTES:
            raise ValueError(f"challenge nonce needs at least {MIN_NONCE_BYTES} bytes")

    def to_dict(self) -> dict:
        return {"nonce": b58encode(self.nonce), "context": self.context, "issuedAt": self.issued_at}

    @classmethod
    def from_dict(cls, obj: dict) -> Challenge:
        return cls(b58decode(obj["nonce"]), obj["context"], float(obj["issuedAt"]))


@dataclass(frozen=True)
class Presentation:
    ring_did: Did
    signature: Signature
    challenge: Challenge

    def to_dict(self) -> dict:
        return {
            "ringDid": str(self.ring_did),
            "signature": signature_to_text(self.signature),
            "challenge": self.challenge.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> Presentation:
        return cls(
            parse_ring_did(obj["ringDid"]),
            signature_from_text(obj["signature"]),
            Challenge.from_dict(obj["challenge"]),
        )

    @classmethod
    def from_json(cls, text: str) -> Presentation:
        return cls.from_dict(json.loads(text))


def presentation_message(ring_did: Did, challenge: Challenge) -> bytes:
    body = {
        "purpose": _PURPOSE,
        "ringDid": str(ring_did),
        "nonce": b58encode(challenge.nonce),
        "context": challenge.context,
    }
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# Holder
# ---------------------------------------------------------------------------

@dataclass
class Wallet:
    credentials: dict[Did, KeyPair] = field(default_factory=dict)
    memberships: dict[Did, SignerPosition] = field(default_factory=dict)

    def add_credential(self, did: Did, keypair: KeyPair) -> None:
        self.credentials[did] = keypair

    def signer_for(self, ring_did: Did, ring: Ring) -> SignerPosition:
        for keypair in self.credentials.values():
            if keypair.pk in ring:
                position = SignerPosition(ring.position_of(keypair.pk), keypair.sk)
                self.memberships[ring_did] = position
                return position
        raise NoMembershipError(f"wallet holds no credential of {ring_did}")


def holder_respond(
    wallet: Wallet,
    ring_did: Union[Did, str],
    challenge: Challenge,
    store: RegistryStore,
    entropy: Entropy,
) -> Presentation:
    ring_did = ring_did if isinstance(ring_did, Did) else parse_ring_did(ring_did)
    doc = resolve(store, ring_did)
    if not isinstance(doc, DidDocument):
        raise ResolutionError(f"{ring_did} is not a ring document")
    ring = resolve_ring_keys(store, ring_did)
    signer = wallet.signer_for(ring_did, ring)
    scheme = scheme_for_type(doc.authentication.type)
    sig = scheme.sign(signer, presentation_message(ring_did, challenge), ring, entropy)
    return Presentation(ring_did, sig, challenge)


# ---------------------------------------------------------------------------
# Verifier
# ---------------------------------------------------------------------------

class Verifier:
    """Issues challenges and checks presentations against a registry.

    Outstanding and consumed nonces live in memory, or in ``state_path`` so
    that separate processes (the CLI) share one replay window.
    """

    def __init__(
        self,
        store: RegistryStore,
        context: str = "verifier",
        window: float = DEFAULT_WINDOW,
        clock: Callable[[], float] = time.time,
        state_path: Optional[Union[str, Path]] = None,
    ):
        self.store = store
        self.context = context
        self.window = window
        self.clock = clock
        self.state_path = Path(state_path) if state_path else None
        self._lock = threading.Lock()
        self._issued: dict[str, float] = {}
        self._seen: dict[str, float] = {}
        if self.state_path and self.state_path.exists():
            state = json.loads(self.state_path.read_text(encoding="utf-8"))
            self._issued = state.get("issued", {})
            self._seen = state.get("seen", {})

    def _save(self) -> None:
        if self.state_path is None:
            return
        self.state_path.parent.mkdir(parents=True, exist_ok=True)
        state = {"context": self.context, "issued": self._issued, "seen": self._seen}
        self.state_path.write_text(json.dumps(state, sort_keys=True, indent=2), encoding="utf-8")

    def _prune(self, now: float) -> None:
        horizon = now - self.window
        self._seen = {k: t for k, t in self._seen.items() if t >= horizon}

    def issue_challenge(self, entropy: Entropy) -> Challenge:
        with self._lock:
            now = self.clock()
            self._prune(now)
            while True:
                nonce = entropy.read(NONCE_BYTES)
                key = b58encode(nonce)
                if key not in self._issued and key not in self._seen:
                    break
            self._issued[key] = now
            self._save()
            return Challenge(nonce, self.context, now)

    def _consume(self, challenge: Challenge) -> None:
        key = b58encode(challenge.nonce)
        with self._lock:
            now = self.clock()
            issued_at = self._issued.pop(key, None)
            if issued_at is None:
                if key in self._seen:
                    raise ReplayError("challenge was already used")
                raise ReplayError("challenge was not issued by this verifier")
            self._seen[key] = issued_at
            self._prune(now)
            self._save()
            if challenge.context != self.context or challenge.issued_at != issued_at:
                raise ReplayError("challenge does not match the one issued")
            if now - issued_at > self.window:
                raise ReplayError("challenge has expired")

    def check(self, presentation: Presentation, expected_challenge: Challenge) -> bool:
        """Accept or reject ``presentation``.

        Raises :class:`ReplayError` for an unknown, reused or expired
        challenge and :class:`ResolutionError` when the ring cannot be
        resolved; a bad signature is a plain ``False``.
        """
        self._consume(expected_challenge)
        if presentation.challenge != expected_challenge:
            return False
        try:
            doc = resolve(self.store, presentation.ring_did)
            if not isinstance(doc, DidDocument):
                raise ResolutionError(f"{presentation.ring_did} is not a ring document")
            ring = resolve_ring_keys(self.store, presentation.ring_did)
        except ResolutionError:
            raise
        except RingDidError as exc:
            raise ResolutionError(str(exc)) from exc
        scheme = scheme_for_type(doc.authentication.type)
        message = presentation_message(presentation.ring_did, expected_challenge)
        try:
            return scheme.verify(ring, message, presentation.signature)
        except MalformedSignatureError:
            return False


def verifier_check(verifier: Verifier, presentation: Presentation, expected_challenge: Challenge) -> bool:
    return verifier.check(presentation, expected_challenge)
