from pathlib import Path

import pytest

import mbt
from mbt.dsl import parse_model, parse_od
from mbt.project import load_project

ASSETS = Path(mbt.__file__).parent / "assets"
AUCTION = ASSETS / "auction"


@pytest.fixture(scope="session")
def auction_model():
    return parse_model((AUCTION / "auction.mtk").read_text())


@pytest.fixture(scope="session")
def mutant_model():
    return parse_model((AUCTION / "mutant.mtk").read_text())


@pytest.fixture(scope="session")
def project():
    return load_project(AUCTION)


def od(text: str, name: str = "od"):
    return parse_od(text, name)
