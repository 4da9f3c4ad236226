import pytest

from stochgdl.corpus import GAMES_DIR
from stochgdl.gdl import parse_gdl_file

TOY = GAMES_DIR / "toy.gdl"


@pytest.fixture(scope="session")
def toy():
    return parse_gdl_file(TOY)
