"""Controller contract, the reference controllers and the shared-budget ghost poll."""

from __future__ import annotations

import logging
import random
import time
from typing import Callable, Mapping, Optional

from .config import RuleConfig
from .engine import GHOSTS, GhostId
from .maze import REVERSE, Direction, next_move_away_from, next_move_towards
from .messaging import Messenger, MessageType
from .observability import AgentView

log = logging.getLogger(__name__)

NEUTRAL = Direction.NEUTRAL
TEAM_BUDGET = 0.040


def agent_rng(seed: int, role: str) -> random.Random:
    """Independent, reproducible random stream for one agent of one match."""
    return random.Random(f"{seed}:{role}")


class PacManController:
    name = "PACMAN"
    #: "full" controllers get complete views, "po" ones the configured model
    observability = "po"

    def __init__(self, config: Optional[RuleConfig] = None):
        self.config = config or RuleConfig()
        self.rng = random.Random(0)

    def start(self, rng: random.Random) -> None:
        self.rng = rng

    def get_move(self, view: AgentView, budget: Optional[float] = None) -> Optional[Direction]:
        raise NotImplementedError


class GhostController:
    name = "GHOST"
    observability = "po"

    def __init__(self, ghost: GhostId, config: Optional[RuleConfig] = None):
        self.ghost = GhostId(ghost)
        self.config = config or RuleConfig()
        self.rng = random.Random(0)

    def start(self, rng: random.Random) -> None:
        self.rng = rng

    def get_move(
        self, view: AgentView, messenger: Optional[Messenger], budget: Optional[float] = None
    ) -> Optional[Direction]:
        raise NotImplementedError


def _nearest(view: AgentView, nodes, limit: Optional[int] = None) -> Optional[int]:
    row = view.graph.dist[view.node]
    best, best_d = None, None
    for n in nodes:
        d = row[n]
        if limit is not None and d > limit:
            continue
        if best_d is None or d < best_d or (d == best_d and n < best):
            best, best_d = n, d
    return best


def nearest_chasing_ghost(view: AgentView, limit: int) -> Optional[int]:
    return _nearest(view, [g.node for g in view.ghosts.values() if not g.edible and not g.in_lair], limit)


def nearest_edible_ghost(view: AgentView, limit: int) -> Optional[int]:
    return _nearest(view, [g.node for g in view.ghosts.values() if g.edible and not g.in_lair], limit)


def nearest_pill(view: AgentView) -> Optional[int]:
    pills = [n for n, present in view.pills.items() if present]
    pills.extend(n for n, present in view.power_pills.items() if present)
    return _nearest(view, pills)


def random_move(view: AgentView, rng: random.Random) -> Optional[Direction]:
    options = [d for d in view.legal if d is not NEUTRAL]
    if not options:
        return None
    return options[int(rng.random() * len(options))]


class StarterPacMan(PacManController):
    """Flee close chasers, hunt close edible ghosts, otherwise eat the nearest pill."""

    name = "COP"
    observability = "full"

    def get_move(self, view, budget=None):
        limit = self.config.ctrl_limit
        graph = view.graph
        ghost = nearest_chasing_ghost(view, limit)
        if ghost is not None:
            return next_move_away_from(graph, view.node, ghost)
        ghost = nearest_edible_ghost(view, limit)
        if ghost is not None:
            return next_move_towards(graph, view.node, ghost)
        pill = nearest_pill(view)
        if pill is None:
            return NEUTRAL
        return next_move_towards(graph, view.node, pill)


class POPacMan(StarterPacMan):
    """StarterPacMan with every rule guarded against missing information."""

    name = "POP"
    observability = "po"

    def get_move(self, view, budget=None):
        limit = self.config.ctrl_limit
        graph = view.graph
        ghost = nearest_chasing_ghost(view, limit)
        if ghost is not None:
            return next_move_away_from(graph, view.node, ghost)
        ghost = nearest_edible_ghost(view, limit)
        if ghost is not None:
            return next_move_towards(graph, view.node, ghost)
        pill = nearest_pill(view)
        if pill is not None:
            return next_move_towards(graph, view.node, pill)
        return random_move(view, self.rng)


class RandomPacMan(PacManController):
    name = "RANDOM_P"

    def get_move(self, view, budget=None):
        return random_move(view, self.rng)


def pacman_near_power_pill(view: AgentView, pacman: int, proximity: int) -> bool:
    """True if pacman is within ``proximity`` moves of a power pill not known to be eaten."""
    graph = view.graph
    row = graph.dist[pacman]
    known = view.power_pills
    for n in graph.power_pill_nodes:
        if known.get(n, False) and row[n] <= proximity:
            return True
    return False


class StarterGhost(GhostController):
    """Flee when edible or when pacman is near a power pill; otherwise chase, with some noise."""

    name = "COG"
    observability = "full"

    def _react(self, view: AgentView, pacman: int) -> Direction:
        graph = view.graph
        back = REVERSE[view.direction] if view.direction is not NEUTRAL else None
        if view.edible or pacman_near_power_pill(view, pacman, self.config.ctrl_ppill_proximity):
            return next_move_away_from(graph, view.node, pacman, back)
        if self.rng.random() < self.config.ctrl_chase_probability:
            return next_move_towards(graph, view.node, pacman, back)
        return random_move(view, self.rng)

    def get_move(self, view, messenger=None, budget=None):
        if not view.requires_action:
            return None
        return self._react(view, view.pacman)


class POGhost(StarterGhost):
    """StarterGhost when pacman is in sight, a random walker otherwise."""

    name = "POG"
    observability = "po"

    def get_move(self, view, messenger=None, budget=None):
        if not view.requires_action:
            return None
        if view.pacman is not None:
            return self._react(view, view.pacman)
        return random_move(view, self.rng)


class POCommGhost(POGhost):
    """POGhost that shares sightings and acts on the freshest report from a teammate.

    Its own sightings are remembered only to date the memory, so an older
    report never overrides a newer sighting; when pacman is out of sight the
    ghost acts on a stored position only if a teammate supplied it.
    """

    name = "POGC"

    def __init__(self, ghost, config=None, threshold: Optional[int] = None):
        super().__init__(ghost, config)
        self.threshold = self.config.pogc_threshold if threshold is None else threshold
        self.last_pacman: Optional[int] = None
        self.tick_seen: Optional[int] = None
        self.heard = False
        self.level: Optional[int] = None

    def start(self, rng):
        super().start(rng)
        self.last_pacman = None
        self.tick_seen = None
        self.heard = False
        self.level = None

    def _forget_if_stale(self, now: int, level: int) -> None:
        # node indices from another maze mean nothing here
        stale = self.tick_seen is None or now - self.tick_seen >= self.threshold
        if now == 0 or stale or level != self.level:
            self.last_pacman = None
            self.tick_seen = None
            self.heard = False
        self.level = level

    def get_move(self, view, messenger=None, budget=None):
        now = view.tick
        self._forget_if_stale(now, view.level)
        pacman = view.pacman
        if pacman is not None:
            self.last_pacman = pacman
            self.tick_seen = now
            self.heard = False
            if messenger is not None:
                messenger.broadcast(self.ghost, MessageType.PACMAN_SEEN, pacman, now)
        elif messenger is not None:
            for message in messenger.collect(self.ghost, now):
                if message.type is not MessageType.PACMAN_SEEN:
                    continue
                if self.tick_seen is None or message.tick > self.tick_seen:
                    self.last_pacman = message.data
                    self.tick_seen = message.tick
                    self.heard = True
        if pacman is None and self.heard:
            pacman = self.last_pacman

        if not view.requires_action:
            return None
        if pacman is not None:
            return self._react(view, pacman)
        return random_move(view, self.rng)


class RandomGhost(GhostController):
    name = "RANDOM_G"

    def get_move(self, view, messenger=None, budget=None):
        if not view.requires_action:
            return None
        return random_move(view, self.rng)


class GhostTeam:
    """One controller per ghost, polled in fixed order under a shared budget."""

    def __init__(self, name: str, controllers: Mapping[GhostId, GhostController]):
        self.name = name
        self.controllers = {g: controllers[g] for g in GHOSTS}
        self.overruns = 0
        self.errors = 0
        self.call_order: Optional[list[GhostId]] = None

    def start(self, seed: int) -> None:
        self.overruns = 0
        self.errors = 0
        for ghost, controller in self.controllers.items():
            controller.start(agent_rng(seed, ghost.name))

    @property
    def observability(self) -> dict[GhostId, str]:
        return {g: c.observability for g, c in self.controllers.items()}


def budgeted_poll(
    team: GhostTeam,
    views: Mapping[GhostId, AgentView],
    messenger: Optional[Messenger],
    budget: float = TEAM_BUDGET,
    enforce: bool = False,
    clock: Callable[[], float] = time.perf_counter,
) -> list[Optional[Direction]]:
    """Ask each ghost for a move in order Blinky, Pinky, Inky, Sue.

    With ``enforce`` the wall-clock budget is shared by the whole team: a
    controller finishing after the budget ran out has its move dropped, and
    ghosts whose turn comes after that are not asked at all.  Exceptions count
    as a dropped move.
    """
    moves: list[Optional[Direction]] = [None, None, None, None]
    start = clock() if enforce else 0.0
    for ghost in GHOSTS:
        remaining = None
        if enforce:
            remaining = budget - (clock() - start)
            if remaining <= 0:
                team.overruns += 1
                log.warning("%s %s skipped: team budget exhausted", team.name, ghost.name)
                moves[ghost] = NEUTRAL
                continue
        if team.call_order is not None:
            team.call_order.append(ghost)
        try:
            move = team.controllers[ghost].get_move(views[ghost], messenger, remaining)
        except Exception:
            team.errors += 1
            log.exception("%s %s raised; using NEUTRAL", team.name, ghost.name)
            move = NEUTRAL
        if enforce and clock() - start > budget:
            team.overruns += 1
            log.warning("%s %s overran the team budget", team.name, ghost.name)
            move = NEUTRAL
        moves[ghost] = move
    return moves


def poll_pacman(
    controller: PacManController,
    view: AgentView,
    budget: float = TEAM_BUDGET,
    enforce: bool = False,
    clock: Callable[[], float] = time.perf_counter,
) -> tuple[Optional[Direction], bool]:
    """Return (move, overran)."""
    start = clock() if enforce else 0.0
    try:
        move = controller.get_move(view, budget if enforce else None)
    except Exception:
        log.exception("%s raised; using NEUTRAL", controller.name)
        return NEUTRAL, False
    if enforce and clock() - start > budget:
        log.warning("%s overran its budget", controller.name)
        return NEUTRAL, True
    return move, False


PACMAN_CONTROLLERS: dict[str, Callable[[RuleConfig], PacManController]] = {
    "COP": StarterPacMan,
    "POP": POPacMan,
    "RANDOM_P": RandomPacMan,
}

GHOST_CONTROLLERS: dict[str, Callable[[GhostId, RuleConfig], GhostController]] = {
    "COG": StarterGhost,
    "POG": POGhost,
    "POGC": POCommGhost,
    "RANDOM_G": RandomGhost,
}


def register_pacman(name: str, factory: Callable[[RuleConfig], PacManController]) -> None:
    PACMAN_CONTROLLERS[name] = factory


def register_ghosts(name: str, factory: Callable[[GhostId, RuleConfig], GhostController]) -> None:
    GHOST_CONTROLLERS[name] = factory


class UnknownController(KeyError):
    pass


def make_pacman(name: str, config: RuleConfig) -> PacManController:
    try:
        factory = PACMAN_CONTROLLERS[name]
    except KeyError:
        raise UnknownController(f"unknown pacman controller {name!r}") from None
    return factory(config)


def make_team(name: str, config: RuleConfig) -> GhostTeam:
    try:
        factory = GHOST_CONTROLLERS[name]
    except KeyError:
        raise UnknownController(f"unknown ghost team {name!r}") from None
    return GhostTeam(name, {g: factory(g, config) for g in GHOSTS})
