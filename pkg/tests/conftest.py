import pytest

from pacarena.maze import build_graph, bundled_maze, parse_maze

RING = "#######\n#.....#\n#.#.#.#\n#o...o#\n#######\n"

# small playable maze with a wrap tunnel, a lair and long sight lines
SMALL = """\
name: small
###############
#o.....#.....o#
#.##.......##.#
#.##.##D##.##.#
.....#GGG#.....
#.##.#####.##.#
#......P......#
#.#####.#####.#
#o...........o#
###############
"""

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ring():
    return bundled_maze("ring")


@pytest.fixture
def ring_bare():
    """The ring layout without a start or lair, as a plain spec."""
    return build_graph(parse_maze(RING))


@pytest.fixture(scope="session")
def small():
    return build_graph(parse_maze(SMALL, playable=True))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
