import random
import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_ring
from oracles import LISTING_1_MATCHER
from ringdid import errors
from ringdid.base58 import ALPHABET, b58decode
from ringdid.did import (
    Did,
    format_did,
    generate_ring_identifier,
    identifier_preimage,
    new_ring_identifier,
    parse_did,
    parse_ring_did,
    split_did_url,
)
from ringdid.group import SeededEntropy, gen_keypair
from ringdid.ring import ring_new

EXAMPLE_RING = "did:ring:BZEwrymg8P7aCwpJVGzuXHejijUBsmoCLWR4dgfNPuWd"
EXAMPLE_OTHER = "did:example:bef4a730573ea233f02fbd58d83fc344"


def test_example_ring_did_parses():
    did = parse_did(EXAMPLE_RING)
    assert did == Did("ring", "BZEwrymg8P7aCwpJVGzuXHejijUBsmoCLWR4dgfNPuWd")
    assert format_did(did) == EXAMPLE_RING
    assert LISTING_1_MATCHER.matches("ring-did", EXAMPLE_RING)


def test_example_did_parses_but_is_not_a_ring():
    did = parse_did(EXAMPLE_OTHER)
    assert did.method == "example"
    with pytest.raises(errors.DidParseError):
        parse_ring_did(EXAMPLE_OTHER)
    # 32 hex chars is also too short, and 0 is not base58
    assert not LISTING_1_MATCHER.matches("ring-did", "did:ring:bef4a730573ea233f02fbd58d83fc344")
    with pytest.raises(errors.DidParseError):
        parse_did("did:ring:bef4a730573ea233f02fbd58d83fc344")


@pytest.mark.parametrize("text,error,pos", [
    ("DID:ring:BZEwrymg8P7aCwpJVGzuXHejijUBsmoCLWR4dgfNPuWd", errors.LowercaseError, 0),
    ("did:Ring:BZEwrymg8P7aCwpJVGzuXHejijUBsmoCLWR4dgfNPuWd", errors.LowercaseError, 4),
    ("uri:ring:BZEwrymg8P7aCwpJVGzuXHejijUBsmoCLWR4dgfNPuWd", errors.BadPrefixError, 0),
    ("did:ring", errors.BadPrefixError, 8),
    ("did::abc", errors.BadPrefixError, 4),
    ("did:ring:" + "a" * 39, errors.IdLengthError, 9),
    ("did:ring:" + "a" * 49, errors.IdLengthError, 9),
    ("did:ring:" + "a" * 20 + "0" + "a" * 20, errors.InvalidDidCharacterError, 29),
    ("did:ring:", errors.EmptyIdentifierError, 9),
    ("did:ex_mple:abc", errors.InvalidDidCharacterError, 6),
    ("did:example:ab#c", errors.InvalidDidCharacterError, 14),
])
def test_parse_errors_are_distinct_and_positioned(text, error, pos):
    with pytest.raises(error) as info:
        parse_did(text)
    assert info.value.position == pos


def test_format_refuses_empty_id():
    with pytest.raises(errors.EmptyIdentifierError):
        format_did(Did("ring", ""))


ring_ids = st.text(alphabet=ALPHABET, min_size=40, max_size=48)
other_ids = st.text(alphabet=string.ascii_letters + string.digits + ".-_", min_size=1, max_size=60)


@given(ring_ids)
def test_format_parse_roundtrip_ring(idstring):
    did = Did("ring", idstring)
    assert parse_did(format_did(did)) == did


@given(st.text(alphabet=string.ascii_lowercase + string.digits, min_size=1, max_size=10), other_ids)
def test_format_parse_roundtrip_other(method, idstring):
    if method == "ring":
        return
    did = Did(method, idstring)
    assert parse_did(format_did(did)) == did


def test_split_did_url():
    did, frag = split_did_url("did:cred:abc#cred-1")
    assert did == Did("cred", "abc") and frag == "cred-1"
    assert split_did_url("did:cred:abc") == (Did("cred", "abc"), None)
    with pytest.raises(errors.DidParseError):
        split_did_url("did:cred:abc#")


# -- identifier generation --------------------------------------------------

def test_identifier_is_deterministic(entropy):
    keypairs, ring = make_ring(3, entropy)
    r = bytes(range(32))
    a = generate_ring_identifier(keypairs[0].pk, r, ring)
    assert a == generate_ring_identifier(keypairs[0].pk, r, ring)
    assert LISTING_1_MATCHER.matches("ring-did", "did:ring:" + a)


def test_identifier_preimage_layout(entropy):
    keypairs, ring = make_ring(2, entropy)
    r = b"\x07" * 32
    pre = identifier_preimage(keypairs[1].pk, r, ring)
    assert pre == keypairs[1].pk.encode() + r + b"ring" + ring.keys[0].encode() + ring.keys[1].encode()
    assert len(pre) == 33 + 32 + 4 + 33 * 2


def test_identifier_errors(entropy):
    keypairs, ring = make_ring(2, entropy)
    with pytest.raises(errors.MembershipError):
        generate_ring_identifier(gen_keypair(entropy).pk, bytes(32), ring)
    with pytest.raises(errors.RandomnessLengthError):
        generate_ring_identifier(keypairs[0].pk, bytes(15), ring)
    with pytest.raises(errors.RandomnessLengthError):
        generate_ring_identifier(keypairs[0].pk, bytes(33), ring)


def test_identifier_grammar_and_width():
    entropy = SeededEntropy(2024)
    rng = random.Random(2024)
    keypairs, ring = make_ring(4, entropy)
    lengths = set()
    for _ in range(2000):
        ident = generate_ring_identifier(keypairs[rng.randrange(4)].pk, rng.randbytes(32), ring)
        lengths.add(len(ident))
        assert LISTING_1_MATCHER.matches("idstring", ident)
        assert len(b58decode(ident)) == 32
    assert lengths <= {43, 44}


def test_identifier_avalanche_on_ring_change():
    entropy = SeededEntropy(77)
    rng = random.Random(77)
    seen = set()
    for _ in range(1000):
        keypairs, ring = make_ring(3, entropy)
        r = rng.randbytes(32)
        base = generate_ring_identifier(keypairs[0].pk, r, ring)
        keys = list(ring.keys)
        keys[rng.randrange(1, 3)] = gen_keypair(entropy).pk
        other = ring_new(keys)
        if keypairs[0].pk in other:
            changed = generate_ring_identifier(keypairs[0].pk, r, other)
            assert changed != base
        seen.add(base)
    assert len(seen) == 1000


def test_new_ring_identifier_returns_randomness(entropy):
    keypairs, ring = make_ring(2, entropy)
    ident, r = new_ring_identifier(keypairs[0].pk, ring, entropy)
    assert generate_ring_identifier(keypairs[0].pk, r, ring) == ident


def test_concatenation_boundaries_are_unambiguous(entropy):
    # Fixed widths: moving a byte between r and a key cannot produce the same preimage.
    keypairs, ring = make_ring(2, entropy)
    pk = keypairs[0].pk
    pre = identifier_preimage(pk, bytes(32), ring)
    assert pre[:33] == pk.encode() and pre[33:65] == bytes(32) and pre[65:69] == b"ring"
    for bad in (bytes(31), bytes(32) + b"r"):
        with pytest.raises(errors.RandomnessLengthError):
            identifier_preimage(pk, bad, ring)
