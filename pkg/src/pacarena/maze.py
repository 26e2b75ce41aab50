"""Maze files, the walkable node graph and navigation primitives.

A maze file is plain text, one grid row per line, with optional header lines
of the form ``key: value`` before the grid.  Recognised headers are ``name``,
``start`` (``row,col`` of the pacman start when it sits on a pill cell) and
``lair`` (``row,col`` of a corridor cell used as the ghost home when the grid
has no ``G`` cells).
"""

from __future__ import annotations

import functools
import hashlib
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

WALL = "#"
PILL = "."
POWER_PILL = "o"
EMPTY = " "
PACMAN_START = "P"
LAIR = "G"
DOOR = "D"
CELL_CODES = frozenset(WALL + PILL + POWER_PILL + EMPTY + PACMAN_START + LAIR + DOOR)

UNREACHABLE = 1 << 20


class Direction(IntEnum):
    UP = 0
    RIGHT = 1
    DOWN = 2
    LEFT = 3
    NEUTRAL = 4

    @property
    def reverse(self) -> "Direction":
        if self is Direction.NEUTRAL:
            raise ValueError("NEUTRAL has no reverse")
        return Direction((self + 2) % 4)

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]


MOVES = (Direction.UP, Direction.RIGHT, Direction.DOWN, Direction.LEFT)
_DELTAS = {
    Direction.UP: (-1, 0),
    Direction.RIGHT: (0, 1),
    Direction.DOWN: (1, 0),
    Direction.LEFT: (0, -1),
    Direction.NEUTRAL: (0, 0),
}
# reverse lookup by ordinal, avoids the enum property in hot loops
REVERSE = (Direction.DOWN, Direction.LEFT, Direction.UP, Direction.RIGHT)


class NodeKind(IntEnum):
    CORRIDOR = 0
    JUNCTION = 1
    LAIR = 2
    DOOR = 3


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    PATH = "path"


class MazeError(ValueError):
    """Raised when maze text violates one or more layout invariants.

    ``problems`` holds one message per violation, each prefixed with its
    line/column position when it has one.
    """

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class MazeSpec:
    name: str
    grid: tuple[str, ...]
    start: Optional[tuple[int, int]] = None
    lair: Optional[tuple[int, int]] = None
    text: str = field(default="", repr=False, compare=False)

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0])

    def cell(self, row: int, col: int) -> str:
        return self.grid[row][col]

    def walkable(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols and self.grid[row][col] != WALL

    def walkable_cells(self) -> list[tuple[int, int]]:
        return [
            (r, c)
            for r, line in enumerate(self.grid)
            for c, ch in enumerate(line)
            if ch != WALL
        ]

    def cells_with(self, code: str) -> list[tuple[int, int]]:
        return [
            (r, c)
            for r, line in enumerate(self.grid)
            for c, ch in enumerate(line)
            if ch == code
        ]

    @property
    def playable(self) -> bool:
        return self.start is not None and (self.lair is not None or bool(self.cells_with(LAIR)))

    @property
    def digest(self) -> str:
        payload = "\n".join((self.name, *self.grid, repr(self.start), repr(self.lair)))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _parse_cell_ref(value: str) -> tuple[int, int]:
    row, col = value.split(",")
    return int(row), int(col)


def parse_maze(text: str, *, playable: bool = False) -> MazeSpec:
    """Parse and validate maze text.

    Every violated invariant is collected before raising, so a broken file
    reports all of its problems at once.  With ``playable=True`` the maze must
    also define a pacman start and a ghost lair.
    """
    if not text or not text.strip():
        raise MazeError(["empty maze text"])

    lines = text.splitlines()
    name = "maze"
    start_ref: Optional[tuple[int, int]] = None
    lair_ref: Optional[tuple[int, int]] = None
    scale = 1
    problems: list[str] = []

    # header lines come first and contain ': '
    first_grid = 0
    for i, line in enumerate(lines):
        key, sep, value = line.partition(":")
        if not sep or set(key) - set("abcdefghijklmnopqrstuvwxyz_"):
            break
        key, value = key.strip(), value.strip()
        try:
            if key == "name":
                name = value
            elif key == "start":
                start_ref = _parse_cell_ref(value)
            elif key == "lair":
                lair_ref = _parse_cell_ref(value)
            elif key == "scale":
                scale = int(value)
                if scale < 1:
                    raise ValueError(value)
            else:
                problems.append(f"line {i + 1}: unknown header {key!r}")
        except ValueError:
            problems.append(f"line {i + 1}: malformed {key} header {value!r}")
        first_grid = i + 1

    grid_lines = lines[first_grid:]
    while grid_lines and not grid_lines[-1].strip():
        grid_lines.pop()
    if not grid_lines:
        raise MazeError(problems + ["no grid rows"])

    width = len(grid_lines[0])
    for r, row in enumerate(grid_lines):
        lineno = first_grid + r + 1
        if len(row) != width:
            problems.append(f"line {lineno}: row width {len(row)} differs from {width} (non-rectangular grid)")
        for c, ch in enumerate(row):
            if ch not in CELL_CODES:
                problems.append(f"line {lineno}, column {c + 1}: unknown cell code {ch!r}")
    if problems:
        raise MazeError(problems)

    spec = MazeSpec(name=name, grid=tuple(grid_lines), text=text)
    loc = lambda r, c: f"line {first_grid + r + 1}, column {c + 1}"  # noqa: E731

    cells = spec.walkable_cells()
    if not cells:
        raise MazeError(["no walkable cells"])

    starts = spec.cells_with(PACMAN_START)
    if start_ref is not None:
        if not spec.walkable(*start_ref):
            problems.append(f"start header {start_ref} is not a walkable cell")
        elif spec.cell(*start_ref) in (LAIR, DOOR):
            problems.append(f"start header {start_ref} lies inside the lair")
        starts = starts + [start_ref]
    if len(starts) > 1:
        problems.append("multiple pacman starts: " + ", ".join(loc(*s) for s in starts))
    elif not starts and playable:
        problems.append("no pacman start")

    lair_cells = spec.cells_with(LAIR)
    doors = spec.cells_with(DOOR)
    if lair_ref is not None:
        if lair_cells:
            problems.append("lair header given but the grid already has lair cells")
        if not spec.walkable(*lair_ref) or spec.cell(*lair_ref) in (LAIR, DOOR):
            problems.append(f"lair header {lair_ref} is not a corridor cell")
    elif not lair_cells and playable:
        problems.append("no ghost lair")
    if lair_cells and not doors:
        problems.append("lair has no door")

    rows, cols = spec.rows, spec.cols
    # boundary: walls, except paired horizontal wrap tunnels
    for c in range(cols):
        for r in (0, rows - 1):
            if spec.grid[r][c] != WALL:
                problems.append(f"{loc(r, c)}: open cell on the top/bottom boundary")
    for r in range(1, rows - 1):
        left, right = spec.grid[r][0] != WALL, spec.grid[r][cols - 1] != WALL
        if left != right:
            open_c = 0 if left else cols - 1
            problems.append(f"{loc(r, open_c)}: boundary opening without a wrap partner")
        elif left and spec.grid[r][0] in (LAIR, DOOR, PACMAN_START):
            problems.append(f"{loc(r, 0)}: wrap tunnel must be a corridor cell")

    def open_neighbours(r: int, c: int, allowed) -> Iterable[tuple[int, int]]:
        for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1)):
            nr, nc = r + dr, (c + dc) % cols
            if 0 <= nr < rows and spec.grid[nr][nc] in allowed:
                yield nr, nc

    corridor_codes = {PILL, POWER_PILL, EMPTY, PACMAN_START}
    outside = [cell for cell in cells if spec.cell(*cell) in corridor_codes]
    if outside:
        origin = starts[0] if starts else outside[0]
        seen = {origin}
        queue = deque([origin])
        while queue:
            cell = queue.popleft()
            for nxt in open_neighbours(*cell, corridor_codes):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        for cell in outside:
            if cell not in seen:
                problems.append(f"{loc(*cell)}: unreachable corridor cell")

    for door in doors:
        if not any(spec.cell(*n) in corridor_codes for n in open_neighbours(*door, corridor_codes)):
            problems.append(f"{loc(*door)}: lair door does not open onto a corridor")
    if lair_cells and doors:
        seen = set(doors)
        queue = deque(doors)
        while queue:
            cell = queue.popleft()
            for nxt in open_neighbours(*cell, {LAIR, DOOR}):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        for cell in lair_cells:
            if cell not in seen:
                problems.append(f"{loc(*cell)}: lair cell not connected to a door")

    if problems:
        raise MazeError(problems)
    start = starts[0] if starts else None
    grid = spec.grid
    if scale > 1:
        grid = _expand(grid, scale)
        start = (start[0] * scale, start[1] * scale) if start else None
        lair_ref = (lair_ref[0] * scale, lair_ref[1] * scale) if lair_ref else None
    return MazeSpec(name=name, grid=grid, start=start, lair=lair_ref, text=text)


def _expand(tiles: tuple[str, ...], k: int) -> tuple[str, ...]:
    """Space tile centres ``k`` cells apart, joining open neighbours with 1-wide corridors.

    Pills stay on tile centres.  Joining cells are empty corridor, lair
    interior between two lair tiles, and door next to a door tile.
    """
    rows, cols = len(tiles), len(tiles[0])
    out = [[WALL] * (k * (cols - 1) + 1) for _ in range(k * (rows - 1) + 1)]
    restricted = (LAIR, DOOR)

    def joint(a: str, b: str) -> str:
        if a in restricted and b in restricted:
            return DOOR if a == b == DOOR else LAIR
        if DOOR in (a, b):
            return DOOR  # keeps the door flush with the corridor, no stub
        return EMPTY

    for r in range(rows):
        for c in range(cols):
            a = tiles[r][c]
            if a == WALL:
                continue
            out[r * k][c * k] = a
            if c + 1 < cols and tiles[r][c + 1] != WALL:
                fill = joint(a, tiles[r][c + 1])
                for i in range(1, k):
                    out[r * k][c * k + i] = fill
            if r + 1 < rows and tiles[r + 1][c] != WALL:
                fill = joint(a, tiles[r + 1][c])
                for i in range(1, k):
                    out[r * k + i][c * k] = fill
    return tuple("".join(row) for row in out)


@dataclass(frozen=True, eq=False)
class MazeGraph:
    """Immutable node graph built from a validated :class:`MazeSpec`.

    ``neighbors[n][d]`` is the node reached from ``n`` in direction ``d``
    (``-1`` if blocked).  ``moves[n]`` lists the (direction, node) pairs an
    agent outside the lair may take, in canonical direction order.
    """

    spec: MazeSpec
    coords: tuple[tuple[int, int], ...]
    index: dict[tuple[int, int], int]
    neighbors: tuple[tuple[int, int, int, int], ...]
    moves: tuple[tuple[tuple[Direction, int], ...], ...]
    kinds: tuple[NodeKind, ...]
    pill_nodes: tuple[int, ...]
    power_pill_nodes: tuple[int, ...]
    start: Optional[int]
    lair_node: Optional[int]
    exit_node: Optional[int]
    distances: np.ndarray = field(repr=False)
    dist: list[list[int]] = field(repr=False)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def size(self) -> int:
        return len(self.coords)

    def node_at(self, row: int, col: int) -> int:
        return self.index[(row, col)]

    def degree(self, node: int) -> int:
        return len(self.moves[node])

    def is_junction(self, node: int) -> bool:
        return self.kinds[node] is NodeKind.JUNCTION

    def junctions(self) -> list[int]:
        return [n for n, k in enumerate(self.kinds) if k is NodeKind.JUNCTION]

    def distance(self, a: int, b: int) -> int:
        return self.dist[a][b]

    def longest_corridor(self) -> int:
        """Length in cells of the longest straight run of walkable cells."""
        return self._longest_corridor

    @functools.cached_property
    def _longest_corridor(self) -> int:
        best = 0
        grid = self.spec.grid
        for line in grid:
            best = max(best, max((len(run) for run in line.split(WALL)), default=0))
        for c in range(self.spec.cols):
            column = "".join(line[c] for line in grid)
            best = max(best, max((len(run) for run in column.split(WALL)), default=0))
        return best


def build_graph(spec: MazeSpec) -> MazeGraph:
    cells = spec.walkable_cells()
    index = {cell: i for i, cell in enumerate(cells)}
    cols = spec.cols
    neighbors = []
    for r, c in cells:
        row = []
        for d in MOVES:
            dr, dc = _DELTAS[d]
            nr, nc = r + dr, c + dc
            if dc and not 0 <= nc < cols:
                nc %= cols
            row.append(index.get((nr, nc), -1))
        neighbors.append(tuple(row))

    def kind_of(cell) -> str:
        return spec.cell(*cell)

    restricted = {LAIR, DOOR}
    moves = []
    kinds = []
    for i, cell in enumerate(cells):
        opts = tuple(
            (d, n) for d, n in zip(MOVES, neighbors[i]) if n >= 0 and kind_of(cells[n]) not in restricted
        )
        moves.append(opts)
        code = kind_of(cell)
        if code == LAIR:
            kinds.append(NodeKind.LAIR)
        elif code == DOOR:
            kinds.append(NodeKind.DOOR)
        elif len(opts) >= 3:
            kinds.append(NodeKind.JUNCTION)
        else:
            kinds.append(NodeKind.CORRIDOR)

    n = len(cells)
    src, dst = [], []
    for i, row in enumerate(neighbors):
        for j in row:
            if j >= 0:
                src.append(i)
                dst.append(j)
    adjacency = csr_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    table = shortest_path(adjacency, method="D", unweighted=True, directed=False)
    table[np.isinf(table)] = UNREACHABLE
    distances = table.astype(np.int32)
    distances.setflags(write=False)

    pills = tuple(index[c] for c in spec.cells_with(PILL))
    power = tuple(index[c] for c in spec.cells_with(POWER_PILL))
    start = index[spec.start] if spec.start is not None else None
    lair_cells = spec.cells_with(LAIR)
    if spec.lair is not None:
        lair_node = exit_node = index[spec.lair]
    elif lair_cells:
        doors = spec.cells_with(DOOR)
        exit_node = index[min(doors)]
        # park ghosts on the lair cell nearest the door
        lair_node = min((index[c] for c in lair_cells), key=lambda x: (distances[x, exit_node], x))
    else:
        lair_node = exit_node = None

    return MazeGraph(
        spec=spec,
        coords=tuple(cells),
        index=index,
        neighbors=tuple(neighbors),
        moves=tuple(moves),
        kinds=tuple(kinds),
        pill_nodes=pills,
        power_pill_nodes=power,
        start=start,
        lair_node=lair_node,
        exit_node=exit_node,
        distances=distances,
        dist=distances.tolist(),
    )


def _candidates(graph: MazeGraph, node: int, forbidden: Optional[Direction]):
    if forbidden is None or forbidden is Direction.NEUTRAL:
        return graph.moves[node]
    return tuple(m for m in graph.moves[node] if m[0] != forbidden)


def next_move_towards(
    graph: MazeGraph, from_node: int, target: int, forbidden: Optional[Direction] = None
) -> Direction:
    """Legal direction whose successor is closest to ``target``.

    Returns NEUTRAL when already at the target or when every move is forbidden.
    """
    if from_node == target:
        return Direction.NEUTRAL
    best, best_d = Direction.NEUTRAL, UNREACHABLE + 1
    dist = graph.dist
    for d, n in _candidates(graph, from_node, forbidden):
        value = dist[n][target]
        if value < best_d:
            best, best_d = d, value
    return best


def next_move_away_from(
    graph: MazeGraph, from_node: int, threat: int, forbidden: Optional[Direction] = None
) -> Direction:
    best, best_d = Direction.NEUTRAL, -1
    dist = graph.dist
    for d, n in _candidates(graph, from_node, forbidden):
        value = dist[n][threat]
        if value > best_d:
            best, best_d = d, value
    return best


def metric_distance(graph: MazeGraph, a: int, b: int, metric: Metric | str = Metric.PATH) -> float:
    metric = Metric(metric)
    if metric is Metric.PATH:
        return graph.dist[a][b]
    (ra, ca), (rb, cb) = graph.coords[a], graph.coords[b]
    if metric is Metric.MANHATTAN:
        return abs(ra - rb) + abs(ca - cb)
    return math.hypot(ra - rb, ca - cb)


def load_maze(path: str | Path) -> MazeGraph:
    text = Path(path).read_text()
    return build_graph(parse_maze(text, playable=True))


BUNDLED = ("arcade_a", "arcade_b", "arcade_c", "arcade_d")


def bundled_names() -> list[str]:
    root = resources.files("pacarena") / "mazes"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".txt"))


def bundled_maze(name: str) -> MazeGraph:
    return _bundled(name)


_CACHE: dict[str, MazeGraph] = {}


def _bundled(name: str) -> MazeGraph:
    if name not in _CACHE:
        path = resources.files("pacarena") / "mazes" / f"{name}.txt"
        if not path.is_file():
            raise FileNotFoundError(f"no bundled maze named {name!r}")
        _CACHE[name] = build_graph(parse_maze(path.read_text(), playable=True))
    return _CACHE[name]


def resolve_maze(ref: str) -> MazeGraph:
    """Load ``ref`` as a file path, falling back to a bundled maze name."""
    path = Path(ref)
    if path.is_file():
        return load_maze(path)
    return bundled_maze(ref)


def default_mazes() -> list[MazeGraph]:
    return [bundled_maze(name) for name in BUNDLED]
