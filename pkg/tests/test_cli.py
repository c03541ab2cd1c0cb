import json

import pytest

from harness import CliSession
from ringdid import errors
from ringdid.base58 import b58decode, b58encode
from ringdid.cli import EXIT_IO, EXIT_REJECT, EXIT_USAGE, main


@pytest.fixture
def session(tmp_path):
    return CliSession(tmp_path, seed=7)


@pytest.fixture
def ring_session(session):
    creds = []
    for name in ("alice", "bob", "carol"):
        did = session.keygen(name)
        assert session.run("register", session.path(name)) == 0
        assert session.stdout.strip() == did
        creds.append(did)
    args = ["ring-create", "--key", session.path("alice")]
    for did in creds:
        args += ["--credential", did]
    assert session.run(*args) == 0
    session.ring_did = session.stdout.strip()
    session.creds = creds
    return session


def test_keygen_writes_key_files(session, tmp_path):
    session.keygen("k")
    secret = (tmp_path / "k").read_text()
    public = (tmp_path / "k.pub").read_text()
    assert "sk: " in secret and "sk: " not in public
    assert (tmp_path / "k").stat().st_mode & 0o077 == 0


def test_sign_and_verify(ring_session, tmp_path):
    s = ring_session
    (tmp_path / "msg").write_bytes(b"hello ring")
    assert s.run("sign", "--ring", s.ring_did, "--key", s.path("bob"), "--message", s.path("msg"),
                 "--out", s.path("sig")) == 0
    assert s.run("verify", "--ring", s.ring_did, "--message", s.path("msg"), "--signature", s.path("sig")) == 0
    assert s.stdout.strip() == "accept"

    raw = bytearray(b58decode((tmp_path / "sig").read_text().strip()))
    raw[-1] ^= 1
    (tmp_path / "bad").write_text(b58encode(bytes(raw)))
    code = s.run("verify", "--ring", s.ring_did, "--message", s.path("msg"), "--signature", s.path("bad"))
    assert code == EXIT_REJECT and s.stdout.strip() == "reject"

    code = s.run("verify", "--ring", s.ring_did, "--message", s.path("msg"), "--signature", s.path("none"))
    assert code == EXIT_IO and code != EXIT_REJECT


def test_resolve(ring_session):
    s = ring_session
    assert s.run("resolve", s.ring_did) == 0
    doc = json.loads(s.stdout)
    assert doc["id"] == s.ring_did
    assert sorted(svc["serviceEndpoint"] for svc in doc["service"]) == sorted(s.creds)
    assert s.run("--format", "json", "resolve", s.ring_did) == 0
    assert json.loads(s.stdout)["version"] == 1


def test_resolve_unknown(session):
    assert session.run("resolve", "did:cred:nobody") == errors.NotFoundError.exit_code == 40


def test_usage_errors(session):
    assert session.run("frobnicate") == EXIT_USAGE
    assert session.run("bench", "--sizes", "x") == EXIT_USAGE
    assert session.run("bench", "--sizes", "1-3", "--iterations", "1") == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_bad_did_exit_code(session):
    assert session.run("resolve", "DID:ring:x") == errors.BadPrefixError.exit_code


def test_identification_round(ring_session):
    s = ring_session
    assert s.run("challenge", "--out", s.path("chal")) == 0
    assert s.run("respond", "--ring", s.ring_did, "--key", s.path("carol"),
                 "--challenge", s.path("chal"), "--out", s.path("pres")) == 0
    assert s.run("check", "--presentation", s.path("pres"), "--challenge", s.path("chal")) == 0
    assert s.run("check", "--presentation", s.path("pres"), "--challenge", s.path("chal")) == \
        errors.ReplayError.exit_code


def test_update_and_revoke(ring_session):
    s = ring_session
    dave = s.keygen("dave")
    assert s.run("register", s.path("dave")) == 0
    assert s.run("update", s.ring_did, "--key", s.path("bob"), "--add", dave) == 0
    assert s.stdout.strip().endswith("version 2")
    assert s.run("revoke", s.creds[0]) == 0
    assert s.run("revoke", s.creds[0]) == errors.AlreadyRevokedError.exit_code
    assert s.run("revoke", s.ring_did) == errors.OperationNotPermittedError.exit_code
    # the embedded ring still authorizes repairs after a revocation
    assert s.run("update", s.ring_did, "--key", s.path("bob"), "--remove", s.creds[0]) == 0


def test_bench_iterations_csv(session, tmp_path):
    assert session.run("bench", "--sizes", "2-3", "--iterations", "2", "--out", session.path("b.csv")) == 0
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "ring_size,creation_ops,signing_ops,verification_ops"
    assert [line.split(",")[0] for line in lines[1:]] == ["2", "3"]
    assert session.stdout.splitlines() == lines
