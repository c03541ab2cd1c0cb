"""Prime-order group used by every signature in the package.

The default (and only) group is secp256k1: prime order, cofactor 1, so
every successfully decoded point is in the signing subgroup. Point
arithmetic is delegated to libsecp256k1 through ``coincurve``; scalar
arithmetic is plain Python integers reduced modulo the group order.

Elements are encoded as 33-byte SEC1 compressed points. The identity has no
SEC1 compressed form, so it is given the all-zero 33-byte string, which
:meth:`GroupElement.decode` rejects unless explicitly allowed.
"""

from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Protocol, Union

from coincurve import PublicKey

from .base58 import b58decode, b58encode
from .errors import (
    IdentityElementError,
    InvalidPointError,
    KeyFileError,
    NonCanonicalScalarError,
    RandomnessError,
    TruncatedEncodingError,
)

ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
SCALAR_BYTES = 32
ELEMENT_BYTES = 33
_IDENTITY_ENCODING = bytes(ELEMENT_BYTES)


# ---------------------------------------------------------------------------
# Entropy sources
# ---------------------------------------------------------------------------

class Entropy(Protocol):
    def read(self, n: int) -> bytes: ...


class SystemEntropy:
    """Operating-system CSPRNG."""

    def read(self, n: int) -> bytes:
        return os.urandom(n)


class SeededEntropy:
    """Reproducible byte stream for tests and benchmarks. Not for real keys."""

    def __init__(self, seed: int | str | bytes):
        self._rng = random.Random(seed)

    def read(self, n: int) -> bytes:
        return self._rng.randbytes(n)


class FixedEntropy:
    """Serves a fixed buffer and fails once it runs dry."""

    def __init__(self, data: bytes):
        self._data = bytes(data)
        self._pos = 0

    def read(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise RandomnessError(
                f"entropy exhausted: wanted {n} bytes, {len(self._data) - self._pos} left"
            )
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out


def _read(entropy: Entropy, n: int) -> bytes:
    out = entropy.read(n)
    if len(out) != n:
        raise RandomnessError(f"entropy source returned {len(out)} of {n} bytes")
    return out


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Scalar:
    """Integer modulo the group order, always stored canonically."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < ORDER:
            object.__setattr__(self, "value", self.value % ORDER)

    def __add__(self, other: Scalar) -> Scalar:
        return Scalar((self.value + other.value) % ORDER)

    def __sub__(self, other: Scalar) -> Scalar:
        return Scalar((self.value - other.value) % ORDER)

    def __neg__(self) -> Scalar:
        return Scalar(-self.value % ORDER)

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return Scalar(self.value * other.value % ORDER)
        if isinstance(other, GroupElement):
            return other.multiply(self)
        return NotImplemented

    def __bool__(self) -> bool:
        return self.value != 0

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SCALAR_BYTES, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> Scalar:
        if len(data) != SCALAR_BYTES:
            raise TruncatedEncodingError(f"scalar needs {SCALAR_BYTES} bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        if value >= ORDER:
            raise NonCanonicalScalarError("scalar encoding is not reduced modulo the group order")
        return cls(value)

    @classmethod
    def random(cls, entropy: Entropy, nonzero: bool = False) -> Scalar:
        # Rejection sampling; ORDER is within 2**-127 of 2**256 so retries are rare.
        for _ in range(128):
            value = int.from_bytes(_read(entropy, SCALAR_BYTES), "big")
            if value < ORDER and (value or not nonzero):
                return cls(value)
        raise RandomnessError("entropy source failed to produce a usable scalar")


# ---------------------------------------------------------------------------
# Group elements
# ---------------------------------------------------------------------------

class GroupElement:
    """Point of secp256k1. Immutable; compares and sorts by encoding."""

    __slots__ = ("_point", "_encoding")

    def __init__(self, point: Optional[PublicKey]):
        self._point = point
        self._encoding = _IDENTITY_ENCODING if point is None else point.format(compressed=True)

    @classmethod
    def identity(cls) -> GroupElement:
        return _IDENTITY

    @classmethod
    def decode(cls, data: bytes, allow_identity: bool = False) -> GroupElement:
        data = bytes(data)
        if len(data) != ELEMENT_BYTES:
            raise TruncatedEncodingError(f"element needs {ELEMENT_BYTES} bytes, got {len(data)}")
        if data == _IDENTITY_ENCODING:
            if not allow_identity:
                raise IdentityElementError("identity element is not a valid key")
            return _IDENTITY
        if data[0] not in (2, 3):
            raise InvalidPointError(f"bad compressed-point prefix 0x{data[0]:02x}")
        try:
            return cls(PublicKey(data))
        except ValueError:
            raise InvalidPointError("encoding is not a point on the curve") from None

    def encode(self) -> bytes:
        return self._encoding

    @property
    def is_identity(self) -> bool:
        return self._point is None

    def __add__(self, other: GroupElement) -> GroupElement:
        if self._point is None:
            return other
        if other._point is None:
            return self
        try:
            return GroupElement(PublicKey.combine_keys([self._point, other._point]))
        except ValueError:
            # P + (-P)
            return _IDENTITY

    def __neg__(self) -> GroupElement:
        return self.multiply(Scalar(ORDER - 1))

    def __sub__(self, other: GroupElement) -> GroupElement:
        return self + (-other)

    def multiply(self, k: Scalar) -> GroupElement:
        if self._point is None or k.value == 0:
            return _IDENTITY
        return GroupElement(self._point.multiply(k.to_bytes()))

    __rmul__ = multiply

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupElement) and self._encoding == other._encoding

    def __lt__(self, other: GroupElement) -> bool:
        return self._encoding < other._encoding

    def __hash__(self) -> int:
        return hash(self._encoding)

    def __repr__(self) -> str:
        return f"GroupElement({self._encoding.hex()})"


_IDENTITY = GroupElement(None)
GENERATOR = GroupElement(PublicKey.from_secret((1).to_bytes(SCALAR_BYTES, "big")))


def commit(r: Scalar) -> GroupElement:
    """Return g^r."""
    if r.value == 0:
        return _IDENTITY
    return GroupElement(PublicKey.from_secret(r.to_bytes()))


def commit_with_key(r: Scalar, e: Scalar, pk: GroupElement) -> GroupElement:
    """Return g^r * pk^e, the commitment a verifier reconstructs."""
    return commit(r) + pk.multiply(e)


# ---------------------------------------------------------------------------
# Hashing
# ---------------------------------------------------------------------------

_HASHES = {256: hashlib.sha256, 512: hashlib.sha512}


def hash_to_scalar(domain_tag: bytes, inputs: Iterable[bytes], bits: int = 512) -> Scalar:
    """Domain-separated hash reduced into the scalar field.

    The tag and each input are prefixed with their 8-byte big-endian length
    so distinct input lists never serialize to the same preimage. ``bits``
    selects SHA-512 (default; negligible reduction bias) or SHA-256.
    """
    if not domain_tag:
        raise ValueError("domain tag must be non-empty")
    try:
        h = _HASHES[bits]()
    except KeyError:
        raise ValueError(f"unsupported hash width {bits}") from None
    h.update(len(domain_tag).to_bytes(8, "big"))
    h.update(domain_tag)
    for item in inputs:
        h.update(len(item).to_bytes(8, "big"))
        h.update(item)
    return Scalar(int.from_bytes(h.digest(), "big") % ORDER)


# ---------------------------------------------------------------------------
# Keys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecurityParameter:
    bits: int = 128

    def __post_init__(self):
        if self.bits < 128:
            raise ValueError(f"security parameter must be at least 128 bits, got {self.bits}")

    @property
    def nbytes(self) -> int:
        return self.bits // 8


@dataclass(frozen=True)
class KeyPair:
    sk: Scalar
    pk: GroupElement

    @classmethod
    def from_secret(cls, sk: Scalar) -> KeyPair:
        if sk.value == 0:
            raise ValueError("secret key must be non-zero")
        return cls(sk, commit(sk))

    def is_consistent(self) -> bool:
        return commit(self.sk) == self.pk


def gen_keypair(entropy: Entropy, security: SecurityParameter = SecurityParameter()) -> KeyPair:
    """Sample ``sk`` uniformly from [1, q-1] and return ``(sk, g^sk)``."""
    # SCALAR_BYTES always covers the 128..256-bit range of supported parameters
    if security.bits > 8 * SCALAR_BYTES:
        raise ValueError(f"group supports at most {8 * SCALAR_BYTES}-bit security")
    return KeyPair.from_secret(Scalar.random(entropy, nonzero=True))


# -- key files: ``pk: <base58>`` and optionally ``sk: <base58>`` ------------

def format_keyfile(pk: GroupElement, sk: Optional[Scalar] = None) -> str:
    lines = [f"pk: {b58encode(pk.encode())}"]
    if sk is not None:
        lines.append(f"sk: {b58encode(sk.to_bytes())}")
    return "\n".join(lines) + "\n"


def parse_keyfile(text: str) -> tuple[GroupElement, Optional[Scalar]]:
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        tag, sep, value = line.partition(":")
        tag = tag.strip()
        if not sep or tag not in ("pk", "sk"):
            raise KeyFileError(f"line {lineno}: expected 'pk: ...' or 'sk: ...'")
        if tag in fields:
            raise KeyFileError(f"line {lineno}: duplicate {tag!r} field")
        fields[tag] = value.strip()
    if "pk" not in fields:
        raise KeyFileError("key file has no 'pk' field")

    pk = GroupElement.decode(b58decode(fields["pk"]))
    sk = None
    if "sk" in fields:
        sk = Scalar.from_bytes(b58decode(fields["sk"]))
        if commit(sk) != pk:
            raise KeyFileError("secret key does not match public key")
    return pk, sk


def write_keyfile(path: Union[str, Path], pk: GroupElement, sk: Optional[Scalar] = None) -> None:
    path = Path(path)
    path.write_text(format_keyfile(pk, sk), encoding="utf-8")
    if sk is not None:
        path.chmod(0o600)


def read_keyfile(path: Union[str, Path]) -> tuple[GroupElement, Optional[Scalar]]:
    return parse_keyfile(Path(path).read_text(encoding="utf-8"))
