"""Replay logs: one text line per tick, replayable through the engine.

Header lines (``key=value``) come first, then one line per tick::

    tick,pacnode,pacmove,score,<node:move:edible:lair>x4,events

``move`` fields hold the direction actually taken that tick (``N`` when the
agent did not move).  Events are ``;``-separated tokens.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .config import RuleConfig
from .engine import EventKind, GameEvent, GameState, new_game, step
from .maze import Direction, MazeGraph

_LETTER = {Direction.UP: "U", Direction.RIGHT: "R", Direction.DOWN: "D", Direction.LEFT: "L",
           Direction.NEUTRAL: "N"}
_FROM_LETTER = {v: k for k, v in _LETTER.items()}


class ReplayError(ValueError):
    """Malformed replay text or a replay that does not belong to the given mazes/config."""


def maze_digest(mazes: Sequence[MazeGraph]) -> str:
    return hashlib.sha256("|".join(m.spec.digest for m in mazes).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ReplayRecord:
    tick: int
    pac_node: int
    pac_move: Direction
    score: int
    ghosts: tuple[tuple[int, Direction, int, int], ...]
    events: tuple[str, ...] = ()

    @property
    def ghost_moves(self) -> list[Direction]:
        return [g[1] for g in self.ghosts]


def record_tick(state: GameState, events: Iterable[GameEvent]) -> ReplayRecord:
    """Record of the tick just applied to ``state``."""
    moves = state.last_ghost_moves
    return ReplayRecord(
        tick=state.tick - 1,
        pac_node=state.pac_node,
        pac_move=state.last_pac_move,
        score=state.score,
        ghosts=tuple((g.node, moves[i], g.edible, g.lair) for i, g in enumerate(state.ghosts)),
        events=tuple(e.token() for e in events),
    )


def format_record(record: ReplayRecord) -> str:
    ghosts = ",".join(f"{n}:{_LETTER[m]}:{e}:{lair}" for n, m, e, lair in record.ghosts)
    return f"{record.tick},{record.pac_node},{_LETTER[record.pac_move]},{record.score},{ghosts},{';'.join(record.events)}"


def serialize_replay_line(state: GameState, events: Iterable[GameEvent] = ()) -> str:
    return format_record(record_tick(state, events))


def parse_record(line: str, lineno: int = 0) -> ReplayRecord:
    parts = line.rstrip("\n").split(",")
    if len(parts) != 9:
        raise ReplayError(f"line {lineno}: expected 9 fields, got {len(parts)}")
    try:
        ghosts = []
        for field_ in parts[4:8]:
            node, move, edible, lair = field_.split(":")
            ghosts.append((int(node), _FROM_LETTER[move], int(edible), int(lair)))
        return ReplayRecord(
            tick=int(parts[0]),
            pac_node=int(parts[1]),
            pac_move=_FROM_LETTER[parts[2]],
            score=int(parts[3]),
            ghosts=tuple(ghosts),
            events=tuple(t for t in parts[8].split(";") if t),
        )
    except (KeyError, ValueError) as exc:
        raise ReplayError(f"line {lineno}: malformed record {line.strip()!r}") from exc


def header_lines(mazes: Sequence[MazeGraph], config: RuleConfig, seed: int, **extra: str) -> list[str]:
    lines = [
        f"maze={','.join(m.name for m in mazes)}",
        f"mazehash={maze_digest(mazes)}",
        f"seed={seed}",
        f"confighash={config.digest}",
    ]
    lines.extend(f"{k}={v}" for k, v in extra.items())
    return lines


@dataclass
class Replay:
    headers: dict[str, str]
    records: list[ReplayRecord]

    @property
    def seed(self) -> int:
        return int(self.headers["seed"])

    @property
    def maze_names(self) -> list[str]:
        return self.headers["maze"].split(",")


def parse_replay(lines: Iterable[str]) -> Replay:
    headers: dict[str, str] = {}
    records: list[ReplayRecord] = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        if not records and "=" in line and "," not in line.split("=", 1)[0]:
            key, value = line.split("=", 1)
            headers[key] = value
            continue
        records.append(parse_record(line, lineno))
    for key in ("maze", "mazehash", "seed", "confighash"):
        if key not in headers:
            raise ReplayError(f"missing header {key!r}")
    return Replay(headers, records)


class ReplayMismatch(ReplayError):
    def __init__(self, tick: int, expected: str, actual: str):
        self.tick = tick
        self.expected = expected
        self.actual = actual
        super().__init__(f"divergence at tick {tick}: log has {expected!r}, engine gives {actual!r}")


def replay(
    lines: Iterable[str] | Replay, mazes: Sequence[MazeGraph], config: RuleConfig
) -> list[GameState]:
    """Re-run a logged game and return the state after every tick.

    Raises :class:`ReplayError` when the log does not belong to these mazes or
    this config, and :class:`ReplayMismatch` at the first tick whose logged
    state differs from the engine's.
    """
    log = lines if isinstance(lines, Replay) else parse_replay(lines)
    if log.headers["mazehash"] != maze_digest(mazes):
        raise ReplayError("maze hash mismatch: replay was recorded on different mazes")
    if log.headers["confighash"] != config.digest:
        raise ReplayError("config hash mismatch: replay was recorded with a different config")
    state = new_game(mazes, config, log.seed)
    trace = []
    for record in log.records:
        if record.tick != state.tick:
            raise ReplayMismatch(record.tick, f"tick {record.tick}", f"tick {state.tick}")
        events = step(state, record.pac_move, record.ghost_moves)
        actual = format_record(record_tick(state, events))
        expected = format_record(record)
        if actual != expected:
            raise ReplayMismatch(record.tick, expected, actual)
        trace.append(state.copy())
    return trace


@dataclass
class InvariantChecker:
    """Streams replay records and collects rule violations.

    Checks that a ghost never reverses between consecutive moves unless a
    power pill was eaten in between, and that an edible ghost changes node
    only on even ticks.
    """

    violations: list[str] = field(default_factory=list)
    _last_move: list[Optional[Direction]] = field(default_factory=lambda: [None] * 4)
    _may_reverse: list[bool] = field(default_factory=lambda: [False] * 4)
    _prev: Optional[ReplayRecord] = None
    records_seen: int = 0

    def feed(self, record: ReplayRecord) -> None:
        self.records_seen += 1
        kinds = {t.split("@")[0].split(":")[0] for t in record.events}
        if EventKind.POWER_PILL_EATEN.value in kinds:
            self._may_reverse = [True] * 4
        prev = self._prev
        for i, (node, move, edible, lair) in enumerate(record.ghosts):
            if move is not Direction.NEUTRAL:
                last = self._last_move[i]
                if last is not None and move == last.reverse and not self._may_reverse[i]:
                    self.violations.append(f"tick {record.tick}: ghost {i} reversed {last.name}->{move.name}")
                self._last_move[i] = move
                self._may_reverse[i] = False
            if lair:
                self._last_move[i] = None
            if prev is not None and edible and not lair and node != prev.ghosts[i][0] and record.tick % 2:
                self.violations.append(f"tick {record.tick}: edible ghost {i} moved on an odd tick")
        if kinds & {EventKind.PACMAN_EATEN.value, EventKind.LEVEL_CLEARED.value, EventKind.LEVEL_TIMEOUT.value}:
            self._last_move = [None] * 4
            self._may_reverse = [False] * 4
            self._prev = None
        else:
            self._prev = record


def check_records(records: Iterable[ReplayRecord]) -> list[str]:
    checker = InvariantChecker()
    for record in records:
        checker.feed(record)
    return checker.violations
