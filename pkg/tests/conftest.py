import pytest

from ringdid.group import SeededEntropy, gen_keypair
from ringdid.ring import SignerPosition, ring_new


@pytest.fixture
def entropy():
    return SeededEntropy(1234)


def make_ring(n, entropy):
    """Key pairs plus their ring; key pairs are returned in ring order."""
    keypairs = [gen_keypair(entropy) for _ in range(n)]
    ring = ring_new(kp.pk for kp in keypairs)
    keypairs.sort(key=lambda kp: kp.pk.encode())
    return keypairs, ring


def signer_at(keypairs, position):
    return SignerPosition(position, keypairs[position - 1].sk)


def pytest_terminal_summary(terminalreporter):
    from harness import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for _, _, line in sorted(VERDICTS):
            terminalreporter.write_line(line)
