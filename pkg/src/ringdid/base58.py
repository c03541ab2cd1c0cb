"""Base58 with the Bitcoin/IPFS alphabet (no 0, O, I or l)."""

from __future__ import annotations

from .errors import InvalidCharacterError

ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_INDEX = {c: i for i, c in enumerate(ALPHABET)}


def b58encode(data: bytes) -> str:
    """Encode ``data``; each leading zero byte becomes a leading ``'1'``."""
    data = bytes(data)
    stripped = data.lstrip(b"\0")
    zeros = len(data) - len(stripped)

    acc = int.from_bytes(stripped, "big")
    digits = []
    while acc:
        acc, rem = divmod(acc, 58)
        digits.append(ALPHABET[rem])
    return "1" * zeros + "".join(reversed(digits))


def b58decode(text: str) -> bytes:
    acc = 0
    for pos, c in enumerate(text):
        try:
            acc = acc * 58 + _INDEX[c]
        except KeyError:
            raise InvalidCharacterError(c, pos) from None
    zeros = len(text) - len(text.lstrip("1"))
    body = acc.to_bytes((acc.bit_length() + 7) // 8, "big")
    return b"\0" * zeros + body


def is_base58(text: str) -> bool:
    return all(c in _INDEX for c in text)
