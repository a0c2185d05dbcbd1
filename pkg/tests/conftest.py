from __future__ import annotations

import random

import pytest

from groupcrypt import enclave
from groupcrypt.algebra import PairingCtx


@pytest.fixture(scope="session")
def ctx():
    """One shared pairing context; tests diff counters via snapshots."""
    return PairingCtx()


@pytest.fixture(scope="session")
def enc16(ctx):
    """Shared enclave with partition capacity 16 for read-mostly tests."""
    return enclave.init(ctx, 16, random.Random(0xC0FFEE))
