"""Visibility models and the per-agent projection of the game state."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional

from .config import RuleConfig
from .engine import GHOSTS, PACMAN, Agent, GameState, GhostId, legal_moves, requires_action
from .maze import WALL, Direction, MazeGraph, Metric, metric_distance


class ModelKind(str, Enum):
    FULL = "full"
    LOS = "los"
    FORWARD_LOS = "forward_los"
    RADIUS = "radius"


@dataclass(frozen=True)
class VisibilityModel:
    kind: ModelKind = ModelKind.FULL
    range: Optional[int] = None  # LOS variants; None = longest corridor + 1
    metric: Metric = Metric.EUCLIDEAN
    d: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "metric", Metric(self.metric))
        if self.kind in (ModelKind.LOS, ModelKind.FORWARD_LOS) and self.range is not None and self.range <= 0:
            raise ValueError("LOS range must be > 0")
        if self.kind is ModelKind.RADIUS:
            if self.metric is Metric.PATH:
                raise ValueError("radius model takes euclidean or manhattan")
            if self.d <= 0:
                raise ValueError("radius d must be > 0")

    @classmethod
    def full(cls) -> "VisibilityModel":
        return cls(ModelKind.FULL)

    @classmethod
    def los(cls, range: Optional[int] = None) -> "VisibilityModel":
        return cls(ModelKind.LOS, range=range)

    @classmethod
    def forward_los(cls, range: Optional[int] = None) -> "VisibilityModel":
        return cls(ModelKind.FORWARD_LOS, range=range)

    @classmethod
    def radius(cls, metric: Metric | str, d: float) -> "VisibilityModel":
        return cls(ModelKind.RADIUS, metric=Metric(metric), d=d)

    @classmethod
    def from_config(cls, config: RuleConfig) -> "VisibilityModel":
        kind = ModelKind(config.po_model)
        if kind is ModelKind.RADIUS:
            return cls.radius(config.po_metric, config.po_d)
        return cls(kind, range=config.po_range or None)

    def range_for(self, graph: MazeGraph) -> int:
        return self.range if self.range is not None else graph.longest_corridor() + 1


def _ray_visible(graph: MazeGraph, a: int, b: int, limit: int, direction: Optional[Direction]) -> bool:
    (ra, ca), (rb, cb) = graph.coords[a], graph.coords[b]
    if a == b:
        return True
    if ra != rb and ca != cb:
        return False
    if ra == rb:
        step = (0, 1 if cb > ca else -1)
        count = abs(cb - ca)
    else:
        step = (1 if rb > ra else -1, 0)
        count = abs(rb - ra)
    if count > limit:
        return False
    if direction is not None and step != direction.delta:
        return False
    grid = graph.spec.grid
    r, c = ra, ca
    for _ in range(count - 1):
        r += step[0]
        c += step[1]
        if grid[r][c] == WALL:
            return False
    return True


def visible(model: VisibilityModel, graph: MazeGraph, observer: int, facing: Direction, target: int) -> bool:
    """Whether ``target`` is visible from an observer at ``observer`` heading ``facing``."""
    kind = model.kind
    if kind is ModelKind.FULL:
        return True
    if kind is ModelKind.RADIUS:
        return metric_distance(graph, observer, target, model.metric) <= model.d
    limit = model.range_for(graph)
    if kind is ModelKind.LOS:
        return _ray_visible(graph, observer, target, limit, None)
    if observer == target:
        return True
    if facing is Direction.NEUTRAL:
        return False
    return _ray_visible(graph, observer, target, limit, facing)


class Sight:
    """Precomputed visibility sets of one model on one maze.

    ``seen(node, facing)`` is a frozenset of node indices; FULL returns None
    to mean "everything".
    """

    def __init__(self, model: VisibilityModel, graph: MazeGraph):
        self.model = model
        self.graph = graph
        self.full = model.kind is ModelKind.FULL
        self._full_key = None
        self._full_maps = None
        self._table: dict[tuple[int, Direction], frozenset[int]] = {}
        self._pills: dict[tuple[int, Direction], tuple[tuple[int, ...], tuple[int, ...]]] = {}
        directional = model.kind is ModelKind.FORWARD_LOS
        self._directional = directional
        if not self.full:
            facings = tuple(Direction) if directional else (Direction.NEUTRAL,)
            pill_set = set(graph.pill_nodes)
            power_set = set(graph.power_pill_nodes)
            rays = self._rays() if model.kind is not ModelKind.RADIUS else None
            for node in range(graph.size):
                for facing in facings:
                    if rays is None:
                        seen = frozenset(
                            t for t in range(graph.size) if visible(model, graph, node, facing, t)
                        )
                    elif not directional:
                        seen = frozenset((node, *rays[node][0], *rays[node][1], *rays[node][2], *rays[node][3]))
                    elif facing is Direction.NEUTRAL:
                        seen = frozenset((node,))
                    else:
                        seen = frozenset((node, *rays[node][facing]))
                    self._table[(node, facing)] = seen
                    self._pills[(node, facing)] = (
                        tuple(sorted(seen & pill_set)),
                        tuple(sorted(seen & power_set)),
                    )

    def _rays(self) -> list[list[list[int]]]:
        """Nodes along each straight unobstructed ray, per node and direction."""
        graph = self.graph
        limit = self.model.range_for(graph)
        index = graph.index
        rays = []
        for r0, c0 in graph.coords:
            per_dir = []
            for d in (Direction.UP, Direction.RIGHT, Direction.DOWN, Direction.LEFT):
                dr, dc = d.delta
                ray = []
                r, c = r0 + dr, c0 + dc
                while len(ray) < limit and (r, c) in index:
                    ray.append(index[(r, c)])
                    r, c = r + dr, c + dc
                per_dir.append(ray)
            rays.append(per_dir)
        return rays

    def seen(self, node: int, facing: Direction) -> Optional[frozenset[int]]:
        if self.full:
            return None
        return self._table[(node, facing if self._directional else Direction.NEUTRAL)]

    def pills_seen(self, node: int, facing: Direction) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if self.full:
            return self.graph.pill_nodes, self.graph.power_pill_nodes
        return self._pills[(node, facing if self._directional else Direction.NEUTRAL)]

    def full_pill_maps(self, pills: bytearray, power: bytearray):
        """Read-only status maps of every pill; reused while nothing is eaten."""
        key = (bytes(pills), bytes(power))
        if self._full_key != key:
            graph = self.graph
            self._full_maps = (
                MappingProxyType({n: bool(pills[n]) for n in graph.pill_nodes}),
                MappingProxyType({n: bool(power[n]) for n in graph.power_pill_nodes}),
            )
            self._full_key = key
        return self._full_maps

    def can_see(self, node: int, facing: Direction, target: int) -> bool:
        if self.full:
            return True
        return target in self._table[(node, facing if self._directional else Direction.NEUTRAL)]


@functools.lru_cache(maxsize=64)
def sight_for(model: VisibilityModel, graph: MazeGraph) -> Sight:
    return Sight(model, graph)


@dataclass(frozen=True)
class GhostInfo:
    node: int
    direction: Direction
    edible: bool
    in_lair: bool


@dataclass(frozen=True)
class AgentView:
    """What one agent knows this tick.

    Absent knowledge is absent: ``pacman`` is None when unseen, ``ghosts``
    holds only visible ghosts and the pill maps hold only nodes whose status
    is currently known (True = still present).
    """

    observer: Agent
    node: int
    direction: Direction
    tick: int
    score: int
    level: int
    lives: int
    graph: MazeGraph
    pacman: Optional[int]
    pacman_direction: Optional[Direction]
    ghosts: Mapping[GhostId, GhostInfo]
    pills: Mapping[int, bool]
    power_pills: Mapping[int, bool]
    legal: tuple[Direction, ...] = ()
    requires_action: bool = True
    edible: bool = False
    in_lair: bool = False
    known_everything: bool = field(default=False, repr=False)

    def pill_known(self, node: int) -> Optional[bool]:
        """Three-valued pill status: True/False when visible, None when unknown."""
        if node in self.pills:
            return self.pills[node]
        return self.power_pills.get(node)

    def uneaten_pills(self) -> list[int]:
        return [n for n, present in self.pills.items() if present]

    def uneaten_power_pills(self) -> list[int]:
        return [n for n, present in self.power_pills.items() if present]

    @property
    def is_pacman(self) -> bool:
        return self.observer == PACMAN


def _ghost_info(state: GameState, i: int) -> GhostInfo:
    g = state.ghosts[i]
    return GhostInfo(g.node, g.direction, g.edible > 0, g.lair > 0)


def make_view(model: VisibilityModel | Sight, state: GameState, agent: Agent) -> AgentView:
    sight = model if isinstance(model, Sight) else sight_for(model, state.graph)
    return make_views(sight, state, (agent,))[agent]


def make_views(sight: Sight, state: GameState, agents=(PACMAN, *GHOSTS)) -> dict[Agent, AgentView]:
    """Views for several agents of the same tick, sharing work where possible."""
    graph = state.graph
    if sight.graph is not graph:
        sight = sight_for(sight.model, graph)
    pills, power = state.pills, state.power_pills
    ghosts = state.ghosts
    shared_full = None
    views: dict[Agent, AgentView] = {}
    for agent in agents:
        if agent == PACMAN:
            node, facing = state.pac_node, state.pac_dir
        else:
            g = ghosts[agent]
            node, facing = g.node, g.direction
        seen = sight.seen(node, facing)
        if seen is None:
            if shared_full is None:
                pill_map, power_map = sight.full_pill_maps(pills, power)
                shared_full = (
                    pill_map,
                    power_map,
                    MappingProxyType({GHOSTS[i]: _ghost_info(state, i) for i in range(4)}),
                )
            pill_map, power_map, ghost_map = shared_full
            pac_seen = True
        else:
            if agent != PACMAN and ghosts[agent].lair:
                seen = frozenset()
            pill_nodes, power_nodes = sight.pills_seen(node, facing) if seen else ((), ())
            pill_map = {n: bool(pills[n]) for n in pill_nodes}
            power_map = {n: bool(power[n]) for n in power_nodes}
            ghost_map = {}
            for i, g in enumerate(ghosts):
                if i == agent or (not g.lair and g.node in seen):
                    ghost_map[GHOSTS[i]] = _ghost_info(state, i)
            pac_seen = agent == PACMAN or state.pac_node in seen

        if agent == PACMAN:
            legal = tuple(legal_moves(state, PACMAN))
            needs, edible, in_lair = True, False, False
        else:
            g = ghosts[agent]
            needs = requires_action(state, agent)
            legal = tuple(legal_moves(state, agent))
            edible, in_lair = g.edible > 0, g.lair > 0
        views[agent] = AgentView(
            observer=agent,
            node=node,
            direction=facing,
            tick=state.tick,
            score=state.score,
            level=state.level,
            lives=state.lives,
            graph=graph,
            pacman=state.pac_node if pac_seen else None,
            pacman_direction=state.pac_dir if pac_seen else None,
            ghosts=ghost_map,
            pills=pill_map,
            power_pills=power_map,
            legal=legal,
            requires_action=needs,
            edible=edible,
            in_lair=in_lair,
            known_everything=seen is None,
        )
    return views
