"""Run a single match between a pacman controller and a ghost team."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

from .config import RuleConfig
from .controllers import (
    TEAM_BUDGET,
    agent_rng,
    budgeted_poll,
    make_pacman,
    make_team,
    poll_pacman,
    PacManController,
    GhostTeam,
)
from .engine import GHOSTS, PACMAN, EventKind, new_game, step
from .maze import MazeGraph
from .messaging import Messenger
from .observability import VisibilityModel, make_views, sight_for
from .replay import InvariantChecker, format_record, header_lines, record_tick

_RESETS = (EventKind.PACMAN_EATEN, EventKind.LEVEL_CLEARED, EventKind.LEVEL_TIMEOUT)


@dataclass(frozen=True)
class MatchResult:
    pacman: str
    ghosts: str
    seed: int
    score: int
    levels: int
    ticks: int
    overruns: int = 0
    violations: int = 0

    def csv_row(self) -> list:
        return [self.pacman, self.ghosts, self.seed, self.score, self.levels, self.ticks]


def play_match(
    pacman: str | PacManController,
    ghosts: str | GhostTeam,
    mazes: Sequence[MazeGraph],
    config: Optional[RuleConfig] = None,
    seed: int = 0,
    *,
    replay_out: Optional[TextIO] = None,
    checker: Optional[InvariantChecker] = None,
    enforce_budget: bool = False,
    budget: float = TEAM_BUDGET,
    max_ticks: Optional[int] = None,
) -> MatchResult:
    config = config or RuleConfig()
    pac = make_pacman(pacman, config) if isinstance(pacman, str) else pacman
    team = make_team(ghosts, config) if isinstance(ghosts, str) else ghosts
    pac.start(agent_rng(seed, "pacman"))
    team.start(seed)

    model = VisibilityModel.from_config(config)
    full = VisibilityModel.full()
    pac_model = full if pac.observability == "full" else model
    ghost_models = {g: (full if o == "full" else model) for g, o in team.observability.items()}
    # agents grouped by the model their views come from
    groups: dict[VisibilityModel, list] = {}
    groups.setdefault(pac_model, []).append(PACMAN)
    for g in GHOSTS:
        groups.setdefault(ghost_models[g], []).append(g)

    state = new_game(mazes, config, seed)
    messenger = Messenger.from_config(config)
    recording = replay_out is not None or checker is not None
    if replay_out is not None:
        for line in header_lines(mazes, config, seed, pacman=pac.name, ghosts=team.name):
            replay_out.write(line + "\n")

    levels = 0
    overruns = 0
    limit = max_ticks if max_ticks is not None else float("inf")
    while not state.game_over and state.tick < limit:
        graph = state.graph
        views = {}
        for vm, agents in groups.items():
            views.update(make_views(sight_for(vm, graph), state, agents))
        pac_move, overran = poll_pacman(pac, views[PACMAN], budget, enforce_budget)
        overruns += overran
        ghost_moves = budgeted_poll(team, views, messenger, budget, enforce_budget)
        events = step(state, pac_move, ghost_moves)
        for event in events:
            if event.kind in _RESETS:
                messenger.reset()
            if event.kind is EventKind.LEVEL_CLEARED:
                levels += 1
        if recording:
            record = record_tick(state, events)
            if replay_out is not None:
                replay_out.write(format_record(record) + "\n")
            if checker is not None:
                checker.feed(record)

    return MatchResult(
        pacman=pacman if isinstance(pacman, str) else pac.name,
        ghosts=team.name,
        seed=seed,
        score=state.score,
        levels=levels,
        ticks=state.tick,
        overruns=overruns + team.overruns,
        violations=len(checker.violations) if checker is not None else 0,
    )
