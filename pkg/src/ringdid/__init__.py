"""Ring signatures over decentralized identifiers (``did:ring``)."""

from .did import Did, format_did, generate_ring_identifier, parse_did
from .document import DidDocument, create_ring_document, parse_document, serialize_document
from .group import GroupElement, KeyPair, Scalar, gen_keypair
from .ring import (
    AosSignature,
    BorromeanSignature,
    Ring,
    SignerPosition,
    aos_sign,
    aos_verify,
    borromean_sign,
    borromean_verify,
    ring_new,
)

__version__ = "0.1.0"
