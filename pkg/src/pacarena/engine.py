"""Ground-truth game state and the tick function."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Mapping, Optional, Sequence, Union

from .config import RuleConfig
from .maze import MOVES, REVERSE, Direction, MazeGraph, NodeKind

NEUTRAL = Direction.NEUTRAL
GHOST_POINTS = (200, 400, 800, 1600)


class GhostId(IntEnum):
    BLINKY = 0
    PINKY = 1
    INKY = 2
    SUE = 3


GHOSTS = tuple(GhostId)
PACMAN = "PACMAN"
Agent = Union[str, GhostId]


class EventKind(str, Enum):
    PILL_EATEN = "pill"
    POWER_PILL_EATEN = "ppill"
    GHOST_EATEN = "ghost"
    PACMAN_EATEN = "pacman"
    LEVEL_CLEARED = "level"
    LEVEL_TIMEOUT = "timeout"
    GAME_OVER = "gameover"


@dataclass(frozen=True)
class GameEvent:
    kind: EventKind
    tick: int
    points: int = 0
    ghost: Optional[GhostId] = None
    node: Optional[int] = None

    def token(self) -> str:
        if self.kind is EventKind.GHOST_EATEN:
            return f"ghost:{self.ghost.name}:{self.points}"
        if self.node is not None:
            return f"{self.kind.value}@{self.node}"
        return self.kind.value


@dataclass(slots=True)
class GhostState:
    node: int
    direction: Direction = NEUTRAL
    edible: int = 0
    lair: int = 0

    @property
    def in_lair(self) -> bool:
        return self.lair > 0


@dataclass(slots=True)
class GameState:
    mazes: tuple[MazeGraph, ...]
    config: RuleConfig
    seed: int
    tick: int = 0
    level: int = 1
    level_tick: int = 0
    score: int = 0
    lives: int = 3
    pac_node: int = 0
    pac_dir: Direction = NEUTRAL
    ghosts: list[GhostState] = field(default_factory=list)
    pills: bytearray = field(default_factory=bytearray)
    power_pills: bytearray = field(default_factory=bytearray)
    remaining: int = 0
    chain: int = 0
    game_over: bool = False
    # resolved moves of the last tick, for replay logging
    last_pac_move: Direction = NEUTRAL
    last_ghost_moves: tuple[Direction, ...] = (NEUTRAL,) * 4

    @property
    def graph(self) -> MazeGraph:
        return self.mazes[(self.level - 1) % len(self.mazes)]

    def copy(self) -> "GameState":
        return GameState(
            mazes=self.mazes,
            config=self.config,
            seed=self.seed,
            tick=self.tick,
            level=self.level,
            level_tick=self.level_tick,
            score=self.score,
            lives=self.lives,
            pac_node=self.pac_node,
            pac_dir=self.pac_dir,
            ghosts=[GhostState(g.node, g.direction, g.edible, g.lair) for g in self.ghosts],
            pills=bytearray(self.pills),
            power_pills=bytearray(self.power_pills),
            remaining=self.remaining,
            chain=self.chain,
            game_over=self.game_over,
            last_pac_move=self.last_pac_move,
            last_ghost_moves=self.last_ghost_moves,
        )

    def pill_present(self, node: int) -> bool:
        return bool(self.pills[node])

    def power_pill_present(self, node: int) -> bool:
        return bool(self.power_pills[node])

    def uneaten_pills(self) -> list[int]:
        pills = self.pills
        return [n for n in self.graph.pill_nodes if pills[n]]

    def uneaten_power_pills(self) -> list[int]:
        power = self.power_pills
        return [n for n in self.graph.power_pill_nodes if power[n]]


def _initial_ghosts(graph: MazeGraph, config: RuleConfig) -> list[GhostState]:
    ghosts = []
    for ticks in config.exit_ticks:
        if ticks == 0:
            ghosts.append(GhostState(graph.exit_node))
        else:
            ghosts.append(GhostState(graph.lair_node, lair=ticks))
    return ghosts


def _load_level(state: GameState) -> None:
    graph = state.graph
    state.pills = bytearray(graph.size)
    state.power_pills = bytearray(graph.size)
    for n in graph.pill_nodes:
        state.pills[n] = 1
    for n in graph.power_pill_nodes:
        state.power_pills[n] = 1
    state.remaining = len(graph.pill_nodes) + len(graph.power_pill_nodes)
    state.level_tick = 0
    _reset_positions(state)


def _reset_positions(state: GameState) -> None:
    graph = state.graph
    state.pac_node = graph.start
    state.pac_dir = NEUTRAL
    state.ghosts = _initial_ghosts(graph, state.config)
    state.chain = 0


def new_game(mazes: Sequence[MazeGraph], config: RuleConfig | None = None, seed: int = 0) -> GameState:
    if not mazes:
        raise ValueError("new_game needs at least one maze")
    config = config or RuleConfig()
    for graph in mazes:
        if graph.start is None or graph.lair_node is None:
            raise ValueError(f"maze {graph.name!r} has no pacman start or ghost lair")
    state = GameState(mazes=tuple(mazes), config=config, seed=seed, lives=config.lives)
    _load_level(state)
    return state


def _ghost_options(graph: MazeGraph, ghost: GhostState):
    opts = graph.moves[ghost.node]
    if ghost.direction is NEUTRAL:
        return opts
    back = REVERSE[ghost.direction]
    # dead ends are the one place a ghost may turn back
    return tuple(m for m in opts if m[0] is not back) or opts


def legal_moves(state: GameState, agent: Agent) -> list[Direction]:
    """Legal moves in canonical order; pacman's list ends with NEUTRAL."""
    graph = state.graph
    if agent == PACMAN:
        return [d for d, _ in graph.moves[state.pac_node]] + [NEUTRAL]
    ghost = state.ghosts[agent]
    if ghost.in_lair:
        return [NEUTRAL]
    return [d for d, _ in _ghost_options(graph, ghost)]


def requires_action(state: GameState, ghost: GhostId) -> bool:
    g = state.ghosts[ghost]
    if g.in_lair:
        return False
    if g.direction is NEUTRAL:
        return True  # just left the lair
    return len(_ghost_options(state.graph, g)) > 1


def max_level_score(n: int) -> int:
    """Maximum points for a maze with ``n`` pills: every pill plus four full ghost chains."""
    return 10 * n + 4 * sum(GHOST_POINTS)


def advance(
    state: GameState,
    pacman_move: Optional[Direction],
    ghost_moves: Mapping[GhostId, Optional[Direction]] | Sequence[Optional[Direction]] | None = None,
) -> tuple[GameState, list[GameEvent]]:
    """Pure tick: returns the successor state and the events of this tick."""
    nxt = state.copy()
    events = step(nxt, pacman_move, ghost_moves)
    return nxt, events


def _as_move_list(ghost_moves) -> list[Optional[Direction]]:
    if ghost_moves is None:
        return [None] * 4
    if isinstance(ghost_moves, Mapping):
        return [ghost_moves.get(g) for g in GHOSTS]
    return list(ghost_moves)


def step(
    state: GameState,
    pacman_move: Optional[Direction],
    ghost_moves: Mapping[GhostId, Optional[Direction]] | Sequence[Optional[Direction]] | None = None,
) -> list[GameEvent]:
    """Advance ``state`` one tick in place and return the events."""
    if state.game_over:
        return []
    config = state.config
    graph = state.graph
    tick = state.tick
    events: list[GameEvent] = []
    requested = _as_move_list(ghost_moves)

    for g in state.ghosts:
        if g.edible:
            g.edible -= 1

    # pacman
    pac_prev = state.pac_node
    pac_opts = graph.moves[pac_prev]
    move = NEUTRAL
    if pacman_move is NEUTRAL:
        move = NEUTRAL
    else:
        lookup = dict(pac_opts)
        if pacman_move is not None and pacman_move in lookup:
            move = pacman_move
        elif state.pac_dir in lookup:
            move = state.pac_dir
    if move is not NEUTRAL:
        for d, n in pac_opts:
            if d is move:
                state.pac_node = n
                break
    state.pac_dir = move
    state.last_pac_move = move
    pac = state.pac_node

    reversal = False
    if state.pills[pac]:
        state.pills[pac] = 0
        state.remaining -= 1
        state.score += config.pill_score
        events.append(GameEvent(EventKind.PILL_EATEN, tick, config.pill_score, node=pac))
    elif state.power_pills[pac]:
        state.power_pills[pac] = 0
        state.remaining -= 1
        state.score += config.power_pill_score
        events.append(GameEvent(EventKind.POWER_PILL_EATEN, tick, config.power_pill_score, node=pac))
        state.chain = 0
        reversal = True
        edible = config.edible_ticks(state.level)
        for g in state.ghosts:
            if not g.in_lair:
                g.edible = edible

    # ghosts
    even = tick % 2 == 0
    prev_nodes = []
    moved: list[Direction] = []
    for i, g in enumerate(state.ghosts):
        prev_nodes.append(g.node)
        if g.lair:
            g.lair -= 1
            if g.lair == 0:
                g.node = graph.exit_node
                g.direction = NEUTRAL
            moved.append(NEUTRAL)
            continue
        opts = graph.moves[g.node]
        choice = None
        flipped = False
        if reversal and g.direction is not NEUTRAL:
            back = REVERSE[g.direction]
            if any(d is back for d, _ in opts):
                choice = back
                flipped = True
        if choice is None:
            back = REVERSE[g.direction] if g.direction is not NEUTRAL else None
            want = requested[i]
            legal = [d for d, _ in opts if d is not back] or [d for d, _ in opts]
            if want in legal:
                choice = want
            elif g.direction in legal:
                choice = g.direction
            else:
                choice = legal[0] if legal else NEUTRAL
        if g.edible and not even:
            # half speed: a reversal still flips the heading, the position holds
            if flipped:
                g.direction = choice
            moved.append(NEUTRAL)
            continue
        for d, n in opts:
            if d is choice:
                g.node = n
                g.direction = d
                break
        else:
            choice = NEUTRAL
        moved.append(choice)
    state.last_ghost_moves = tuple(moved)

    # contact: same node, or pacman and ghost exchanged nodes
    died = False
    for i, g in enumerate(state.ghosts):
        if g.lair:
            continue
        if g.node == pac or (g.node == pac_prev and prev_nodes[i] == pac):
            if g.edible:
                points = GHOST_POINTS[min(state.chain, 3)]
                state.chain += 1
                state.score += points
                events.append(GameEvent(EventKind.GHOST_EATEN, tick, points, ghost=GhostId(i), node=g.node))
                g.node = graph.lair_node
                g.direction = NEUTRAL
                g.edible = 0
                g.lair = config.lair_time
            else:
                died = True
                break

    if died:
        state.lives -= 1
        events.append(GameEvent(EventKind.PACMAN_EATEN, tick, node=pac))
        if state.lives <= 0:
            state.game_over = True
            events.append(GameEvent(EventKind.GAME_OVER, tick))
        else:
            _reset_positions(state)

    state.level_tick += 1
    if not state.game_over:
        if state.remaining == 0:
            events.append(GameEvent(EventKind.LEVEL_CLEARED, tick))
            _next_level(state, events, tick)
        elif state.level_tick >= config.level_tick_limit:
            events.append(GameEvent(EventKind.LEVEL_TIMEOUT, tick))
            _next_level(state, events, tick)

    state.tick = tick + 1
    return events


def _next_level(state: GameState, events: list[GameEvent], tick: int) -> None:
    if state.level >= state.config.max_levels:
        state.game_over = True
        events.append(GameEvent(EventKind.GAME_OVER, tick))
        return
    state.level += 1
    _load_level(state)
