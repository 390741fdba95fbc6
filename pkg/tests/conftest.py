"""
Shared fixtures: bundled covers loaded from their data files.
"""

import pytest

from ramiforge.config import settings
from ramiforge.services.cover_file import load_cover


def _load(name: str):
    cover, _ = load_cover(settings.resolve_cover_path(name))
    return cover


@pytest.fixture
def load():
    """Load a bundled cover by name."""
    return _load


@pytest.fixture(scope="session")
def quad_t2p1():
    return _load("quad_t2p1")


@pytest.fixture(scope="session")
def quad_sqrt_t():
    return _load("quad_sqrt_t")


@pytest.fixture(scope="session")
def quad_t2p1_t2m2():
    return _load("quad_t2p1_t2m2")


@pytest.fixture(scope="session")
def trinomial3():
    return _load("trinomial_3_1_2_1")


@pytest.fixture(scope="session")
def trinomial5():
    return _load("trinomial_5_2_2_1")


@pytest.fixture(scope="session")
def trinomial5_alt():
    return _load("trinomial_5_1_4_3")


@pytest.fixture(scope="session")
def monster():
    return _load("monster")


@pytest.fixture(scope="session")
def mestre():
    return _load("mestre_a5")
