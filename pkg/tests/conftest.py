from __future__ import annotations

import sys
from pathlib import Path

import pytest

from nbrv import fileio
from nbrv.model import Protocol

sys.path.insert(0, str(Path(__file__).parent))

PROTOCOL_DIR = Path(__file__).parent.parent / "protocols"


def load_protocol(name: str) -> Protocol:
    path = PROTOCOL_DIR / name
    return fileio.parse_protocol(path.read_text(), file=str(path))


@pytest.fixture(scope="session")
def fig1() -> Protocol:
    return load_protocol("fig1.rvp")


@pytest.fixture(scope="session")
def p1() -> Protocol:
    return load_protocol("p1.rvp")


@pytest.fixture(scope="session")
def p2() -> Protocol:
    return load_protocol("p2.rvp")
