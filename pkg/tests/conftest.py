import pathlib
import sys

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


def load(name):
    from apml.parser import parse_model
    path = CORPUS / name
    return parse_model(path.read_text(), str(path.relative_to(ROOT)))
