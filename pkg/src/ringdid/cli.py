"""``ringdid`` command line.

Exit statuses: 0 success / signature accepted, 1 signature rejected,
2 usage error, 3 I/O error, otherwise the ``exit_code`` of the raised
:mod:`ringdid.errors` class.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench, registry
from .did import parse_did, parse_ring_did
from .document import CredentialDocument, credential_did_for_key, extract_ring, serialize_document
from .errors import MalformedSignatureError, RingDidError
from .group import KeyPair, SeededEntropy, SystemEntropy, gen_keypair, read_keyfile, write_keyfile
from .identification import Challenge, Presentation, Verifier, Wallet, holder_respond
from .registry import resolve, resolve_record, resolve_ring_keys
from .ring import (
    SCHEMES,
    SignerPosition,
    scheme_for_type,
    signature_from_text,
    signature_to_text,
    verify_any,
)

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_IO = 3
DEFAULT_REGISTRY = ".ringdid"


class Context:
    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        self.root = Path(args.registry or os.environ.get("RINGDID_REGISTRY") or DEFAULT_REGISTRY)
        if args.seed is not None:
            # Separate invocations with one seed must still draw distinct keys.
            self.entropy = SeededEntropy(f"{args.seed}|{'|'.join(argv)}")
        else:
            self.entropy = SystemEntropy()
        self._store = None

    @property
    def store(self) -> registry.FileStore:
        if self._store is None:
            self._store = registry.FileStore(self.root)
        return self._store

    def emit(self, text: str, data: Optional[dict] = None) -> None:
        if self.args.format == "json" and data is not None:
            print(json.dumps(data, sort_keys=True, indent=2))
        else:
            print(text)


def _load_keypair(path: str) -> KeyPair:
    pk, sk = read_keyfile(path)
    if sk is None:
        raise RingDidError(f"{path} holds no secret key")
    return KeyPair(sk, pk)


def _signer(ctx: Context, ring_did, key_path: str):
    doc = resolve(ctx.store, ring_did)
    ring = resolve_ring_keys(ctx.store, ring_did)
    kp = _load_keypair(key_path)
    return doc, ring, SignerPosition(ring.position_of(kp.pk), kp.sk)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_keygen(ctx: Context) -> int:
    kp = gen_keypair(ctx.entropy)
    out = Path(ctx.args.out)
    write_keyfile(out, kp.pk, kp.sk)
    write_keyfile(out.with_name(out.name + ".pub"), kp.pk)
    did = str(credential_did_for_key(kp.pk))
    ctx.emit(did, {"did": did, "keyfile": str(out)})
    return EXIT_OK


def cmd_register(ctx: Context) -> int:
    pk, _ = read_keyfile(ctx.args.keyfile)
    did = parse_did(ctx.args.did) if ctx.args.did else credential_did_for_key(pk)
    record = registry.register(ctx.store, CredentialDocument.for_key(did, pk))
    ctx.emit(str(did), {"did": str(did), "version": record.version})
    return EXIT_OK


def cmd_ring_create(ctx: Context) -> int:
    kp = _load_keypair(ctx.args.key)
    doc = registry.create_ring_did(
        ctx.store, ctx.args.credential, kp.pk, ctx.entropy, ctx.args.scheme or "aos"
    )
    ctx.emit(str(doc.id), {"did": str(doc.id), "document": json.loads(serialize_document(doc))})
    return EXIT_OK


def cmd_sign(ctx: Context) -> int:
    ring_did = parse_ring_did(ctx.args.ring)
    doc, ring, signer = _signer(ctx, ring_did, ctx.args.key)
    message = Path(ctx.args.message).read_bytes()
    sig = scheme_for_type(doc.authentication.type).sign(signer, message, ring, ctx.entropy)
    text = signature_to_text(sig)
    if ctx.args.out:
        Path(ctx.args.out).write_text(text + "\n", encoding="utf-8")
    ctx.emit(text, {"ringDid": str(ring_did), "signature": text})
    return EXIT_OK


def cmd_verify(ctx: Context) -> int:
    ring_did = parse_ring_did(ctx.args.ring)
    ring = resolve_ring_keys(ctx.store, ring_did)
    message = Path(ctx.args.message).read_bytes()
    text = Path(ctx.args.signature).read_text(encoding="utf-8")
    try:
        ok = verify_any(ring, message, signature_from_text(text))
    except MalformedSignatureError:
        ok = False
    ctx.emit("accept" if ok else "reject", {"accepted": ok})
    return EXIT_OK if ok else EXIT_REJECT


def cmd_resolve(ctx: Context) -> int:
    record = resolve_record(ctx.store, ctx.args.did)
    text = serialize_document(record.document)
    if ctx.args.format == "json":
        print(json.dumps(record.to_dict(), sort_keys=True, indent=2))
    else:
        print(text)
    return EXIT_OK


def cmd_update(ctx: Context) -> int:
    ring_did = parse_ring_did(ctx.args.did)
    record = resolve_record(ctx.store, ring_did)
    payload = registry.update_payload(ring_did, ctx.args.add, ctx.args.remove, record.version)
    auth_did = parse_ring_did(ctx.args.auth_ring) if ctx.args.auth_ring else ring_did
    auth_doc = resolve(ctx.store, auth_did)
    # embedded ring, so a ring with a revoked member can still be repaired
    auth_ring = extract_ring(auth_doc)
    kp = _load_keypair(ctx.args.key)
    signer = SignerPosition(auth_ring.position_of(kp.pk), kp.sk)
    sig = scheme_for_type(auth_doc.authentication.type).sign(signer, payload, auth_ring, ctx.entropy)
    new = registry.update_ring(ctx.store, ring_did, ctx.args.add, ctx.args.remove, sig)
    ctx.emit(f"{ring_did} version {new.version}", {"did": str(ring_did), "version": new.version})
    return EXIT_OK


def cmd_revoke(ctx: Context) -> int:
    record = registry.revoke_credential(ctx.store, ctx.args.did)
    ctx.emit(f"{record.did} revoked", {"did": str(record.did), "status": record.status})
    return EXIT_OK


def _verifier(ctx: Context) -> Verifier:
    state = ctx.root / "verifier" / f"{ctx.args.context}.json"
    return Verifier(ctx.store, ctx.args.context, ctx.args.window, state_path=state)


def cmd_challenge(ctx: Context) -> int:
    challenge = _verifier(ctx).issue_challenge(ctx.entropy)
    text = json.dumps(challenge.to_dict(), sort_keys=True, indent=2)
    Path(ctx.args.out).write_text(text + "\n", encoding="utf-8")
    ctx.emit(text, challenge.to_dict())
    return EXIT_OK


def cmd_respond(ctx: Context) -> int:
    wallet = Wallet()
    for path in ctx.args.key:
        kp = _load_keypair(path)
        wallet.add_credential(credential_did_for_key(kp.pk), kp)
    challenge = Challenge.from_dict(json.loads(Path(ctx.args.challenge).read_text(encoding="utf-8")))
    presentation = holder_respond(wallet, ctx.args.ring, challenge, ctx.store, ctx.entropy)
    Path(ctx.args.out).write_text(presentation.to_json() + "\n", encoding="utf-8")
    ctx.emit(presentation.to_json(), presentation.to_dict())
    return EXIT_OK


def cmd_check(ctx: Context) -> int:
    presentation = Presentation.from_json(Path(ctx.args.presentation).read_text(encoding="utf-8"))
    expected = Challenge.from_dict(json.loads(Path(ctx.args.challenge).read_text(encoding="utf-8")))
    ok = _verifier(ctx).check(presentation, expected)
    ctx.emit("accept" if ok else "reject", {"accepted": ok})
    return EXIT_OK if ok else EXIT_REJECT


def _sizes(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def cmd_bench(ctx: Context) -> int:
    a = ctx.args
    progress = (lambda msg: print(msg, file=sys.stderr)) if a.verbose else None
    report = bench.run_bench(
        a.sizes, a.duration, a.scheme or "borromean", a.seed, a.iterations, a.with_identifier, progress
    )
    text = {"csv": report.to_csv, "json": report.to_json, "text": report.to_text}[a.format or "csv"]()
    if a.out:
        Path(a.out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    print(text, end="" if text.endswith("\n") else "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringdid", description="did:ring toolkit")
    parser.add_argument("--registry", help="registry root (default $RINGDID_REGISTRY or ./.ringdid)")
    parser.add_argument(
        "--scheme", choices=sorted(SCHEMES), help="ring-create defaults to aos, bench to borromean"
    )
    parser.add_argument("--format", choices=["text", "json", "csv"], help="output format (bench defaults to csv)")
    parser.add_argument("--seed", type=int, help="deterministic entropy (testing only)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a credential key pair")
    p.add_argument("--out", required=True, help="secret key file; public half goes to <out>.pub")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("register", help="register a credential DID for a key file")
    p.add_argument("keyfile")
    p.add_argument("--did", help="credential DID (default: derived from the key)")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("ring-create", help="create and register a did:ring")
    p.add_argument("--credential", action="append", required=True, help="credential DID (repeat)")
    p.add_argument("--key", required=True, help="key file of the creating member")
    p.set_defaults(func=cmd_ring_create)

    p = sub.add_parser("sign", help="ring-sign a message file")
    p.add_argument("--ring", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--message", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="verify a ring signature")
    p.add_argument("--ring", required=True)
    p.add_argument("--message", required=True)
    p.add_argument("--signature", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("resolve", help="print the document registered for a DID")
    p.add_argument("did")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("update", help="add/remove ring endpoints")
    p.add_argument("did")
    p.add_argument("--key", required=True, help="member key authorizing the update")
    p.add_argument("--add", action="append", default=[])
    p.add_argument("--remove", action="append", default=[])
    p.add_argument("--auth-ring", help="sign the authorization under this ring instead")
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("revoke", help="revoke a constituent credential")
    p.add_argument("did")
    p.set_defaults(func=cmd_revoke)

    for name, func, help_ in (
        ("challenge", cmd_challenge, "issue a verifier challenge"),
        ("check", cmd_check, "check a presentation against an issued challenge"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--context", default="verifier")
        p.add_argument("--window", type=float, default=300.0, help="challenge lifetime in seconds")
        p.set_defaults(func=func)
    sub.choices["challenge"].add_argument("--out", required=True)
    sub.choices["check"].add_argument("--presentation", required=True)
    sub.choices["check"].add_argument("--challenge", required=True)

    p = sub.add_parser("respond", help="answer a challenge with a ring presentation")
    p.add_argument("--ring", required=True)
    p.add_argument("--key", action="append", required=True, help="wallet key file (repeat)")
    p.add_argument("--challenge", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_respond)

    p = sub.add_parser("bench", help="throughput per ring size")
    p.add_argument("--sizes", type=_sizes, default=list(range(2, 11)), help="e.g. 2-10 or 2,4,8")
    p.add_argument("--duration", type=float, default=3.0, help="seconds per cell")
    p.add_argument("--iterations", type=int, help="fixed call count per run instead of a duration")
    p.add_argument("--with-identifier", action="store_true", help="also time identifier generation")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(Context(args, argv))
    except RingDidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
