import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_ring, signer_at
from harness import tamper_trials
from oracles import N, compress, point_add, point_mul
from ringdid import errors
from ringdid.group import SeededEntropy, Scalar, gen_keypair
from ringdid.ring import (
    AOS_TAG,
    AosSignature,
    BorromeanSignature,
    Ring,
    SignerPosition,
    aos_sign,
    aos_verify,
    borromean_sign,
    borromean_verify,
    decode_signature,
    ring_new,
    scheme_for_type,
    signature_from_text,
    signature_to_text,
)


# -- rings ------------------------------------------------------------------

def test_ring_new_sorts_two_keys(entropy):
    a, b = sorted((gen_keypair(entropy).pk for _ in range(2)), key=lambda k: k.encode())
    assert ring_new([b, a]).keys == (a, b)


def test_ring_new_rejects_small_and_duplicate(entropy):
    pk = gen_keypair(entropy).pk
    with pytest.raises(errors.RingTooSmallError):
        ring_new([pk])
    with pytest.raises(errors.DuplicateKeyError):
        ring_new([pk, pk])
    with pytest.raises(errors.EncodingError):
        ring_new([pk.encode(), b"\x02" + bytes(31)])


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(6)))
def test_ring_new_is_order_insensitive(perm):
    keys = [gen_keypair(SeededEntropy(i)).pk for i in range(6)]
    assert ring_new([keys[i] for i in perm]).encoding == ring_new(keys).encoding


def test_ring_positions_are_one_based(entropy):
    keypairs, ring = make_ring(3, entropy)
    assert ring.key(1) == keypairs[0].pk
    assert ring.position_of(keypairs[2].pk) == 3
    with pytest.raises(IndexError):
        ring.key(0)


def test_ring_decode_roundtrip(entropy):
    _, ring = make_ring(4, entropy)
    assert Ring.decode(ring.encoding) == ring
    with pytest.raises(errors.TruncatedEncodingError):
        Ring.decode(ring.encoding[:-1])


# -- AOS --------------------------------------------------------------------

@pytest.mark.parametrize("n", range(2, 11))
def test_aos_correct_for_every_signer(n, entropy):
    keypairs, ring = make_ring(n, entropy)
    for s in range(1, n + 1):
        sig = aos_sign(signer_at(keypairs, s), b"msg", ring, entropy)
        assert aos_verify(ring, b"msg", sig)
        assert not aos_verify(ring, b"other", sig)


def test_aos_empty_message(entropy):
    keypairs, ring = make_ring(2, entropy)
    sig = aos_sign(signer_at(keypairs, 2), b"", ring, entropy)
    assert aos_verify(ring, b"", sig)


def _shape(sig):
    return type(sig), len(sig.encode()), len(sig.responses)


def test_signatures_from_different_signers_share_structure(entropy):
    keypairs, ring = make_ring(5, entropy)
    a = aos_sign(signer_at(keypairs, 1), b"m", ring, entropy)
    b = aos_sign(signer_at(keypairs, 2), b"m", ring, entropy)
    assert _shape(a) == _shape(b)
    assert aos_verify(ring, b"m", a) and aos_verify(ring, b"m", b)


def test_signing_is_randomized(entropy):
    keypairs, ring = make_ring(3, entropy)
    signer = signer_at(keypairs, 2)
    for _ in range(100):
        a = aos_sign(signer, b"m", ring, entropy)
        b = aos_sign(signer, b"m", ring, entropy)
        assert a != b
        assert aos_verify(ring, b"m", a) and aos_verify(ring, b"m", b)


def test_signer_binding(entropy):
    keypairs, ring = make_ring(3, entropy)
    with pytest.raises(errors.SignerBindingError):
        aos_sign(SignerPosition(1, keypairs[1].sk), b"m", ring, entropy)
    with pytest.raises(errors.SignerBindingError):
        aos_sign(SignerPosition(4, keypairs[1].sk), b"m", ring, entropy)


def test_verify_length_mismatch_is_malformed(entropy):
    keypairs, ring = make_ring(3, entropy)
    sig = aos_sign(signer_at(keypairs, 1), b"m", ring, entropy)
    short = AosSignature(sig.e1, sig.responses[:2])
    with pytest.raises(errors.MalformedSignatureError):
        aos_verify(ring, b"m", short)


def test_ring_with_replaced_key_rejects(entropy):
    keypairs, ring = make_ring(4, entropy)
    sig = aos_sign(signer_at(keypairs, 1), b"m", ring, entropy)
    for drop in range(4):
        keys = list(ring.keys)
        keys[drop] = gen_keypair(entropy).pk
        assert not aos_verify(ring_new(keys), b"m", sig)


def test_entropy_failure_during_signing(entropy):
    from ringdid.group import FixedEntropy

    keypairs, ring = make_ring(3, entropy)
    with pytest.raises(errors.RandomnessError):
        aos_sign(signer_at(keypairs, 1), b"m", ring, FixedEntropy(b"\x01" * 40))


def _oracle_aos_verify(ring, m, sig):
    """AOS verification with affine arithmetic and hand-rolled hashing."""
    def challenge(c_enc):
        h = hashlib.sha512()
        for part in (AOS_TAG, ring.encoding, m, c_enc):
            h.update(len(part).to_bytes(8, "big") + part)
        return int.from_bytes(h.digest(), "big") % N

    def lift(enc):
        x = int.from_bytes(enc[1:], "big")
        p = 2**256 - 2**32 - 977
        y = pow(x**3 + 7, (p + 1) // 4, p)
        if y & 1 != enc[0] & 1:
            y = p - y
        return x, y

    e = sig.e1.value
    for pk, r in zip(ring.keys, sig.responses):
        c = point_add(point_mul(r.value), point_mul(e, lift(pk.encode())))
        e = challenge(compress(c))
    return e == sig.e1.value


def test_aos_signatures_verify_under_independent_oracle(entropy):
    for n in (2, 3, 5):
        keypairs, ring = make_ring(n, entropy)
        for s in range(1, n + 1):
            sig = aos_sign(signer_at(keypairs, s), b"oracle", ring, entropy)
            assert _oracle_aos_verify(ring, b"oracle", sig)
            assert not _oracle_aos_verify(ring, b"oracle!", sig)


# -- Borromean --------------------------------------------------------------

def test_borromean_single_ring(entropy):
    keypairs, ring = make_ring(2, entropy)
    sig = borromean_sign([signer_at(keypairs, 2)], b"m", [ring], entropy)
    assert borromean_verify([ring], b"m", sig)
    assert sig.layout == (2,)


def test_borromean_two_sub_rings(entropy):
    kp1, r1 = make_ring(2, entropy)
    kp2, r2 = make_ring(3, entropy)
    signers = [signer_at(kp1, 2), signer_at(kp2, 1)]
    sig = borromean_sign(signers, b"m", [r1, r2], entropy)
    assert borromean_verify([r1, r2], b"m", sig)
    assert not borromean_verify([r1, r2], b"x", sig)
    with pytest.raises(errors.LayoutMismatchError):
        borromean_verify([r2, r1], b"m", sig)


def test_borromean_sub_ring_of_one_key(entropy):
    kp = gen_keypair(entropy)
    kps, r2 = make_ring(3, entropy)
    sig = borromean_sign([SignerPosition(1, kp.sk), signer_at(kps, 3)], b"m", [[kp.pk], r2], entropy)
    assert borromean_verify([[kp.pk], r2], b"m", sig)


def test_borromean_needs_every_signer_key(entropy):
    kp1, r1 = make_ring(2, entropy)
    kp2, r2 = make_ring(3, entropy)
    outsider = gen_keypair(entropy)
    with pytest.raises(errors.SignerBindingError):
        borromean_sign([signer_at(kp1, 1), SignerPosition(1, outsider.sk)], b"m", [r1, r2], entropy)
    # Without a key for the second sub-ring the best one can do is guess responses.
    honest = borromean_sign([signer_at(kp1, 1), signer_at(kp2, 1)], b"m", [r1, r2], entropy)
    rng = random.Random(0)
    forged = BorromeanSignature(
        honest.e0,
        honest.responses[:2] + tuple(Scalar(rng.randrange(N)) for _ in range(3)),
        honest.layout,
    )
    assert not borromean_verify([r1, r2], b"m", forged)


def test_borromean_shape_errors(entropy):
    keypairs, ring = make_ring(3, entropy)
    sig = borromean_sign([signer_at(keypairs, 1)], b"m", [ring], entropy)
    with pytest.raises(errors.LayoutMismatchError):
        borromean_verify([ring], b"m", BorromeanSignature(sig.e0, sig.responses[:2], sig.layout))
    with pytest.raises(errors.LayoutMismatchError):
        borromean_sign([signer_at(keypairs, 1)] * 2, b"m", [ring], entropy)
    with pytest.raises(errors.LayoutMismatchError):
        borromean_sign([], b"m", [], entropy)


def test_borromean_tampered_e0(entropy):
    keypairs, ring = make_ring(4, entropy)
    sig = borromean_sign([signer_at(keypairs, 3)], b"m", [ring], entropy)
    bad = BorromeanSignature(sig.e0 + Scalar(1), sig.responses, sig.layout)
    assert not borromean_verify([ring], b"m", bad)


# -- wire format ------------------------------------------------------------

def test_wire_roundtrip(entropy):
    keypairs, ring = make_ring(4, entropy)
    a = aos_sign(signer_at(keypairs, 1), b"m", ring, entropy)
    b = borromean_sign([signer_at(keypairs, 2)], b"m", [ring], entropy)
    for sig in (a, b):
        assert decode_signature(sig.encode()) == sig
        assert signature_from_text(signature_to_text(sig)) == sig
    raw = a.encode()
    assert raw[0] == 1 and int.from_bytes(raw[1:3], "big") == 4
    assert len(raw) == 3 + 32 * 5


@pytest.mark.parametrize("raw", [b"", b"\x01", b"\x01\x00\x02" + bytes(64), b"\x09\x00\x02" + bytes(96),
                                 b"\x02\x00\x02\x00\x01\x00\x03" + bytes(96)])
def test_wire_malformed(raw):
    with pytest.raises(errors.MalformedSignatureError):
        decode_signature(raw)


def test_wire_rejects_unreduced_scalar(entropy):
    keypairs, ring = make_ring(2, entropy)
    raw = bytearray(aos_sign(signer_at(keypairs, 1), b"m", ring, entropy).encode())
    raw[3:35] = b"\xff" * 32
    with pytest.raises(errors.MalformedSignatureError):
        decode_signature(bytes(raw))


def test_scheme_lookup():
    assert scheme_for_type("AosRingSignature2024").name == "aos"
    assert scheme_for_type("BorromeanRingSignature2024").name == "borromean"
    with pytest.raises(KeyError):
        scheme_for_type("RING_VERIFICATION_METHOD")


@pytest.mark.parametrize("scheme", ["aos", "borromean"])
def test_tamper_small(scheme):
    rejected, accepted = tamper_trials(scheme, 150, seed=99)
    assert accepted == [] and rejected == 150
