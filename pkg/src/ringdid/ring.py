"""Ring signatures: the three-move AOS construction and Borromean rings.

Both schemes share the gen/sign/verify interface exposed by
:class:`RingScheme`. Verification never takes a signer index.

Response convention. A Schnorr-type member commitment is rebuilt as
``c_i = g^r_i * pk_i^e_i``; for the chain to close at the signer the
closing response must be ``r_s = alpha - e_s * sk`` (the challenge, not the
commitment, multiplies the secret key).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from . import group
from .base58 import b58decode, b58encode
from .errors import (
    DuplicateKeyError,
    EncodingError,
    LayoutMismatchError,
    MalformedSignatureError,
    RingDidError,
    RingTooSmallError,
    SignerBindingError,
)
from .group import ELEMENT_BYTES, SCALAR_BYTES, Entropy, GroupElement, Scalar

AOS_TAG = b"ringdid/aos/challenge/v1"
BORROMEAN_TAG = b"ringdid/borromean/challenge/v1"
BORROMEAN_E0_TAG = b"ringdid/borromean/e0/v1"
BORROMEAN_MSG_TAG = b"ringdid/borromean/message/v1"

AOS_VERSION = 0x01
BORROMEAN_VERSION = 0x02


# ---------------------------------------------------------------------------
# Rings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ring:
    """At least two distinct public keys, ascending by canonical encoding.

    Positions exposed to callers (:meth:`key`, :meth:`position_of`,
    :class:`SignerPosition`) are 1-based; ``keys`` is an ordinary tuple.
    """

    keys: tuple[GroupElement, ...]
    encoding: bytes = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        keys = tuple(self.keys)
        if len(keys) < 2:
            raise RingTooSmallError(f"a ring needs at least 2 keys, got {len(keys)}")
        for a, b in zip(keys, keys[1:]):
            if a == b:
                raise DuplicateKeyError(f"duplicate key {a.encode().hex()}")
            if not a < b:
                raise ValueError("ring keys must be sorted; use ring_new()")
        if any(k.is_identity for k in keys):
            raise group.IdentityElementError("identity element is not a valid ring key")
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "encoding", b"".join(k.encode() for k in keys))

    def __len__(self) -> int:
        return len(self.keys)

    def __iter__(self):
        return iter(self.keys)

    def __contains__(self, pk) -> bool:
        return pk in self.keys

    def key(self, position: int) -> GroupElement:
        if not 1 <= position <= len(self.keys):
            raise IndexError(f"ring position {position} outside 1..{len(self.keys)}")
        return self.keys[position - 1]

    def position_of(self, pk: GroupElement) -> int:
        try:
            return self.keys.index(pk) + 1
        except ValueError:
            raise SignerBindingError("public key is not a member of the ring") from None

    @classmethod
    def decode(cls, data: bytes) -> Ring:
        if len(data) % ELEMENT_BYTES:
            raise group.TruncatedEncodingError(
                f"ring encoding length {len(data)} is not a multiple of {ELEMENT_BYTES}"
            )
        return ring_new(
            data[i:i + ELEMENT_BYTES] for i in range(0, len(data), ELEMENT_BYTES)
        )


def ring_new(pubkeys: Iterable[Union[GroupElement, bytes]]) -> Ring:
    """Canonical ring from keys in any order (raw encodings are decoded)."""
    keys = [k if isinstance(k, GroupElement) else GroupElement.decode(k) for k in pubkeys]
    if len(keys) < 2:
        raise RingTooSmallError(f"a ring needs at least 2 keys, got {len(keys)}")
    if len(set(keys)) != len(keys):
        raise DuplicateKeyError("ring contains the same key twice")
    return Ring(tuple(sorted(keys)))


@dataclass(frozen=True)
class SignerPosition:
    """1-based ring position and the secret key claimed to sit there."""

    index: int
    sk: Scalar


def _bind_signer(signer: SignerPosition, keys: Sequence[GroupElement]) -> int:
    if not 1 <= signer.index <= len(keys):
        raise SignerBindingError(f"signer index {signer.index} outside 1..{len(keys)}")
    if group.commit(signer.sk) != keys[signer.index - 1]:
        raise SignerBindingError(f"secret key does not match ring position {signer.index}")
    return signer.index - 1


# ---------------------------------------------------------------------------
# AOS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AosSignature:
    e1: Scalar
    responses: tuple[Scalar, ...]

    def encode(self) -> bytes:
        return (
            bytes([AOS_VERSION])
            + len(self.responses).to_bytes(2, "big")
            + self.e1.to_bytes()
            + b"".join(r.to_bytes() for r in self.responses)
        )


def _aos_challenge(ring: Ring, m: bytes, c: GroupElement) -> Scalar:
    return group.hash_to_scalar(AOS_TAG, (ring.encoding, m, c.encode()))


def aos_sign(signer: SignerPosition, m: bytes, ring: Ring, entropy: Entropy) -> AosSignature:
    n = len(ring)
    s = _bind_signer(signer, ring.keys)
    keys = ring.keys

    alpha = Scalar.random(entropy, nonzero=True)
    challenges: list = [None] * n
    responses: list = [None] * n

    challenges[(s + 1) % n] = _aos_challenge(ring, m, group.commit(alpha))
    for step in range(1, n):
        i = (s + step) % n
        responses[i] = Scalar.random(entropy)
        c = group.commit_with_key(responses[i], challenges[i], keys[i])
        challenges[(i + 1) % n] = _aos_challenge(ring, m, c)

    responses[s] = alpha - challenges[s] * signer.sk
    return AosSignature(challenges[0], tuple(responses))


def _check_scalars(values) -> None:
    if not all(isinstance(v, Scalar) for v in values):
        raise MalformedSignatureError("signature components must be scalars")


def aos_verify(ring: Ring, m: bytes, sig: AosSignature) -> bool:
    if len(sig.responses) != len(ring):
        raise MalformedSignatureError(
            f"signature has {len(sig.responses)} responses for a ring of {len(ring)}"
        )
    _check_scalars((sig.e1, *sig.responses))
    e = sig.e1
    for pk, r in zip(ring.keys, sig.responses):
        e = _aos_challenge(ring, m, group.commit_with_key(r, e, pk))
    return e == sig.e1


# ---------------------------------------------------------------------------
# Borromean
# ---------------------------------------------------------------------------

KeySet = Union[Ring, Sequence[GroupElement]]


@dataclass(frozen=True)
class BorromeanSignature:
    """Shared base challenge ``e0`` plus one response per key, flattened.

    ``layout`` gives the size of each sub-ring in order.
    """

    e0: Scalar
    responses: tuple[Scalar, ...]
    layout: tuple[int, ...]

    def sub_ring_responses(self) -> list[tuple[Scalar, ...]]:
        out, pos = [], 0
        for size in self.layout:
            out.append(self.responses[pos:pos + size])
            pos += size
        return out

    def encode(self) -> bytes:
        return (
            bytes([BORROMEAN_VERSION])
            + len(self.responses).to_bytes(2, "big")
            + len(self.layout).to_bytes(2, "big")
            + b"".join(size.to_bytes(2, "big") for size in self.layout)
            + self.e0.to_bytes()
            + b"".join(r.to_bytes() for r in self.responses)
        )


def _key_sets(rings: Sequence[KeySet]) -> list[tuple[GroupElement, ...]]:
    sets = [tuple(r.keys if isinstance(r, Ring) else r) for r in rings]
    if not sets:
        raise LayoutMismatchError("at least one sub-ring is required")
    if any(len(keys) == 0 for keys in sets):
        raise LayoutMismatchError("every sub-ring needs at least one key")
    return sets


def _borromean_digest(sets: list[tuple[GroupElement, ...]], m: bytes) -> bytes:
    # Binds the message to every key and to the layout.
    h = hashlib.sha512()
    h.update(BORROMEAN_MSG_TAG)
    h.update(len(sets).to_bytes(4, "big"))
    for keys in sets:
        h.update(len(keys).to_bytes(4, "big"))
        for k in keys:
            h.update(k.encode())
    h.update(len(m).to_bytes(8, "big"))
    h.update(m)
    return h.digest()


def _borromean_challenge(digest: bytes, prev: bytes, i: int, j: int) -> Scalar:
    return group.hash_to_scalar(
        BORROMEAN_TAG, (digest, prev, i.to_bytes(4, "big"), j.to_bytes(4, "big"))
    )


def borromean_sign(
    signers: Sequence[SignerPosition],
    m: bytes,
    rings: Sequence[KeySet],
    entropy: Entropy,
) -> BorromeanSignature:
    sets = _key_sets(rings)
    if len(signers) != len(sets):
        raise LayoutMismatchError(f"{len(signers)} signers for {len(sets)} sub-rings")
    positions = [_bind_signer(sp, keys) for sp, keys in zip(signers, sets)]
    digest = _borromean_digest(sets, m)

    responses: list[list] = [[None] * len(keys) for keys in sets]
    nonces = []
    tails = []
    # Forward pass: from each signer to the end of its sub-ring.
    for i, (keys, s) in enumerate(zip(sets, positions)):
        k = Scalar.random(entropy, nonzero=True)
        nonces.append(k)
        point = group.commit(k)
        for j in range(s + 1, len(keys)):
            e = _borromean_challenge(digest, point.encode(), i, j)
            responses[i][j] = Scalar.random(entropy)
            point = group.commit_with_key(responses[i][j], e, keys[j])
        tails.append(point.encode())

    e0 = group.hash_to_scalar(BORROMEAN_E0_TAG, (*tails, digest))

    # Second pass: from the shared e0 round to each signer, then close.
    for i, (keys, s) in enumerate(zip(sets, positions)):
        e = _borromean_challenge(digest, e0.to_bytes(), i, 0)
        for j in range(s):
            responses[i][j] = Scalar.random(entropy)
            point = group.commit_with_key(responses[i][j], e, keys[j])
            e = _borromean_challenge(digest, point.encode(), i, j + 1)
        responses[i][s] = nonces[i] - e * signers[i].sk

    return BorromeanSignature(
        e0,
        tuple(r for sub in responses for r in sub),
        tuple(len(keys) for keys in sets),
    )


def borromean_verify(rings: Sequence[KeySet], m: bytes, sig: BorromeanSignature) -> bool:
    sets = _key_sets(rings)
    layout = tuple(len(keys) for keys in sets)
    if sum(sig.layout) != len(sig.responses):
        raise LayoutMismatchError(
            f"{len(sig.responses)} responses do not fill layout {sig.layout}"
        )
    if tuple(sig.layout) != layout:
        raise LayoutMismatchError(f"signature layout {sig.layout} does not match rings {layout}")
    _check_scalars((sig.e0, *sig.responses))

    digest = _borromean_digest(sets, m)
    tails = []
    for i, (keys, rs) in enumerate(zip(sets, sig.sub_ring_responses())):
        e = _borromean_challenge(digest, sig.e0.to_bytes(), i, 0)
        for j, (pk, r) in enumerate(zip(keys, rs)):
            point = group.commit_with_key(r, e, pk)
            if j + 1 < len(keys):
                e = _borromean_challenge(digest, point.encode(), i, j + 1)
        tails.append(point.encode())
    return group.hash_to_scalar(BORROMEAN_E0_TAG, (*tails, digest)) == sig.e0


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------

Signature = Union[AosSignature, BorromeanSignature]


def _scalars(data: bytes, count: int) -> list[Scalar]:
    return [
        Scalar.from_bytes(data[k * SCALAR_BYTES:(k + 1) * SCALAR_BYTES]) for k in range(count)
    ]


def decode_signature(data: bytes) -> Signature:
    """Parse the binary form written by ``encode()``.

    Layout: version byte, 2-byte big-endian response count, then for
    Borromean a 2-byte sub-ring count and 2-byte sizes, then the base
    challenge and the responses as 32-byte big-endian scalars.
    """
    try:
        if len(data) < 3:
            raise MalformedSignatureError("signature too short")
        version, n = data[0], int.from_bytes(data[1:3], "big")
        if version == AOS_VERSION:
            body = data[3:]
            if len(body) != (n + 1) * SCALAR_BYTES:
                raise MalformedSignatureError("signature length does not match ring size")
            scalars = _scalars(body, n + 1)
            return AosSignature(scalars[0], tuple(scalars[1:]))
        if version == BORROMEAN_VERSION:
            if len(data) < 5:
                raise MalformedSignatureError("signature too short")
            k = int.from_bytes(data[3:5], "big")
            head = 5 + 2 * k
            if len(data) < head:
                raise MalformedSignatureError("truncated sub-ring layout")
            layout = tuple(int.from_bytes(data[5 + 2 * t:7 + 2 * t], "big") for t in range(k))
            if sum(layout) != n or k == 0 or 0 in layout:
                raise LayoutMismatchError(f"layout {layout} inconsistent with {n} responses")
            body = data[head:]
            if len(body) != (n + 1) * SCALAR_BYTES:
                raise MalformedSignatureError("signature length does not match layout")
            scalars = _scalars(body, n + 1)
            return BorromeanSignature(scalars[0], tuple(scalars[1:]), layout)
        raise MalformedSignatureError(f"unknown signature version 0x{version:02x}")
    except EncodingError as exc:
        raise MalformedSignatureError(str(exc)) from exc


def signature_to_text(sig: Signature) -> str:
    return b58encode(sig.encode())


def signature_from_text(text: str) -> Signature:
    try:
        raw = b58decode(text.strip())
    except RingDidError as exc:
        raise MalformedSignatureError(str(exc)) from exc
    return decode_signature(raw)


# ---------------------------------------------------------------------------
# Scheme interface
# ---------------------------------------------------------------------------

class RingScheme:
    """gen / sign / verify over a single fixed ring."""

    name: str
    method_type: str

    def gen(self, entropy: Entropy) -> group.KeyPair:
        return group.gen_keypair(entropy)

    def sign(self, signer: SignerPosition, m: bytes, ring: Ring, entropy: Entropy) -> Signature:
        raise NotImplementedError

    def verify(self, ring: Ring, m: bytes, sig: Signature) -> bool:
        raise NotImplementedError


class AosScheme(RingScheme):
    name = "aos"
    method_type = "AosRingSignature2024"

    def sign(self, signer, m, ring, entropy):
        return aos_sign(signer, m, ring, entropy)

    def verify(self, ring, m, sig):
        if not isinstance(sig, AosSignature):
            raise MalformedSignatureError("expected an AOS signature")
        return aos_verify(ring, m, sig)


class BorromeanScheme(RingScheme):
    """Borromean signature restricted to one sub-ring."""

    name = "borromean"
    method_type = "BorromeanRingSignature2024"

    def sign(self, signer, m, ring, entropy):
        return borromean_sign([signer], m, [ring], entropy)

    def verify(self, ring, m, sig):
        if not isinstance(sig, BorromeanSignature):
            raise MalformedSignatureError("expected a Borromean signature")
        return borromean_verify([ring], m, sig)


SCHEMES: dict[str, RingScheme] = {s.name: s for s in (AosScheme(), BorromeanScheme())}


def scheme_for_type(method_type: str) -> RingScheme:
    for scheme in SCHEMES.values():
        if scheme.method_type == method_type:
            return scheme
    raise KeyError(f"no ring scheme registered for method type {method_type!r}")


def verify_any(ring: Ring, m: bytes, sig: Signature) -> bool:
    """Dispatch on the signature's own type."""
    if isinstance(sig, AosSignature):
        return aos_verify(ring, m, sig)
    if isinstance(sig, BorromeanSignature):
        return borromean_verify([ring], m, sig)
    raise MalformedSignatureError(f"not a ring signature: {type(sig).__name__}")
