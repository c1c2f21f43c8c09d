import random

import pytest

from revokebench.core import KeyStore


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture
def keystore(rng):
    ks = KeyStore()
    ks.generate("ca", rng)
    ks.generate("other", rng)
    return ks
