import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from genspace.corpus import LevelGrid, boxoban_alphabet, load_mario_tiles  # noqa: E402


@pytest.fixture(scope="session")
def box_alpha():
    return boxoban_alphabet()


@pytest.fixture(scope="session")
def mario_tiles():
    return load_mario_tiles()


@pytest.fixture(scope="session")
def mario_alpha(mario_tiles):
    return mario_tiles.condensed


def grid_from_rows(rows, alphabet, generator="", level_id=""):
    cells = np.array([[alphabet.index(ch) for ch in row] for row in rows])
    return LevelGrid(cells, alphabet, generator, level_id)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
