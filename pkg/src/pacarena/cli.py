"""Command-line front end: run, tournament, sweep and replay."""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import tournament as tour
from .config import ConfigError, RuleConfig, load_config
from .controllers import UnknownController
from .match import play_match
from .maze import MazeError, MazeGraph, default_mazes, resolve_maze
from .replay import InvariantChecker, ReplayError, ReplayMismatch, parse_replay, replay

log = logging.getLogger("pacarena")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


class UsageError(Exception):
    """Bad flags or inputs; reported with exit status 2."""


def _split(value: Optional[str]) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()] if value else []


def _mazes(refs: Optional[list[str]]) -> list[MazeGraph]:
    names = [n for ref in refs or [] for n in _split(ref)]
    if not names:
        return default_mazes()
    try:
        return [resolve_maze(n) for n in names]
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None


def _config(args) -> RuleConfig:
    path = args.config or os.environ.get("PACARENA_CONFIG") or None
    if path and not Path(path).is_file():
        raise UsageError(f"config file not found: {path}")
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    return load_config(path, overrides)


def _stamp(args) -> Optional[str]:
    if args.no_timestamp:
        return None
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            yield fh


def _replay_path(template: str, seed: int, games: int) -> Path:
    path = Path(template)
    if games == 1:
        return path
    return path.with_name(f"{path.stem}.{seed}{path.suffix}")


def cmd_run(args) -> int:
    config = _config(args)
    mazes = _mazes(args.maze)
    if args.games < 1 or args.seed < 0:
        raise UsageError("--games must be >= 1 and --seed >= 0")
    if args.replay:
        # replays are written game by game in this process
        results = []
        for i in range(args.games):
            seed = args.seed + i
            path = _replay_path(args.replay, seed, args.games)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as fh:
                results.append(play_match(args.pacman, args.ghosts, mazes, config, seed,
                                          replay_out=fh, enforce_budget=args.enforce_budget))
    else:
        _, results = tour.run_series(args.pacman, args.ghosts, args.games, args.seed, config, mazes,
                                     workers=args.workers, enforce_budget=args.enforce_budget)
    with _output(args.out) as out:
        tour.write_results(out, results, _stamp(args))
    if args.out not in (None, "-"):
        stats = tour.pair_stats(args.pacman, args.ghosts, [r.score for r in results])
        print(f"{stats.pacman} vs {stats.ghosts}: n={stats.n} mean={stats.mean:.2f} se={stats.stderr:.2f}")
    return EXIT_OK


def cmd_tournament(args) -> int:
    config = _config(args)
    mazes = _mazes(args.maze)
    pacmen, ghosts = _split(args.pacmen), _split(args.ghostteams)
    if not pacmen or not ghosts:
        raise UsageError("--pacmen and --ghostteams each need at least one name")
    try:
        result = tour.round_robin(pacmen, ghosts, args.games, config, mazes, args.seed, workers=args.workers)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise UsageError(str(exc)) from None
    ratings = tour.rate_tournament(result, args.tau)
    stamp = _stamp(args)
    stats = [result.stats[(p, g)] for p in pacmen for g in ghosts]
    with _output(args.out) as out:
        tour.write_stats(out, stats, stamp)
    if args.ratings:
        with _output(args.ratings) as out:
            tour.write_ratings(out, ratings, stamp)
    if args.results:
        with _output(args.results) as out:
            tour.write_results(out, result.all_results(), stamp)
    if args.out not in (None, "-"):
        for track in (tour.PACMAN_TRACK, tour.GHOST_TRACK):
            order = ", ".join(f"{name} ({mean:.1f})" for name, mean in result.ranking(track))
            print(f"{track}: {order}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _config(args)
    mazes = _mazes(args.maze)
    try:
        values = tour.sweep_values(args.from_, args.to, args.step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    # reject unknown keys before playing anything
    config.with_overrides({args.param: values[0]})
    points = tour.parameter_sweep(args.param, values, args.games, args.vs, args.ghosts, config, mazes,
                                  args.seed, workers=args.workers)
    with _output(args.out) as out:
        tour.write_sweep(out, points, _stamp(args))
    return EXIT_OK


def cmd_replay(args) -> int:
    config = _config(args)
    path = Path(args.file)
    if not path.is_file():
        raise UsageError(f"replay file not found: {path}")
    with open(path) as fh:
        log_ = parse_replay(fh)
    mazes = _mazes(args.maze or [log_.headers["maze"]])
    try:
        trace = replay(log_, mazes, config)
    except ReplayMismatch as exc:
        print(f"MISMATCH at tick {exc.tick}")
        print(f"  logged: {exc.expected}")
        print(f"  engine: {exc.actual}")
        return EXIT_FAILURE
    checker = InvariantChecker()
    for record in log_.records:
        checker.feed(record)
    for v in checker.violations:
        print(f"VIOLATION {v}")
    if checker.violations:
        return EXIT_FAILURE
    score = trace[-1].score if trace else 0
    print(f"OK, score={score}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pacarena", description="Headless pacman vs ghosts arena")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, games=True):
        p.add_argument("--maze", action="append", help="maze file or bundled name; repeat or comma-separate")
        p.add_argument("--config", help="rule config file (default $PACARENA_CONFIG)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--seed", type=int, default=0)
        if games:
            p.add_argument("--games", type=int, default=1)
            p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", help="output CSV (default stdout)")
        p.add_argument("--no-timestamp", action="store_true", help="omit the generated-at comment line")

    p = sub.add_parser("run", help="play a series between one pacman and one ghost team")
    p.add_argument("--pacman", required=True)
    p.add_argument("--ghosts", required=True)
    p.add_argument("--replay", help="write a replay log (one file per game when --games > 1)")
    p.add_argument("--enforce-budget", action="store_true", help="enforce the 40 ms per-tick budget")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tournament", help="round robin across both tracks")
    p.add_argument("--pacmen", required=True)
    p.add_argument("--ghostteams", required=True)
    p.add_argument("--ratings", help="ratings CSV")
    p.add_argument("--results", help="per-game results CSV")
    p.add_argument("--tau", type=float, default=0.5)
    common(p)
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("sweep", help="sweep one config key against a fixed pacman")
    p.add_argument("--param", default="pogc.threshold")
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--vs", default="COP")
    p.add_argument("--ghosts", default="POGC")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="verify a replay log against the engine")
    p.add_argument("file")
    p.add_argument("--maze", action="append")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, UnknownController, MazeError, ReplayError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"pacarena: error: {message}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("internal failure", exc_info=True)
        print(f"pacarena: internal failure: {exc!r}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
