"""Seeded match series, round robins, Glicko-2 ratings and parameter sweeps."""

from __future__ import annotations

import csv
import functools
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .config import RuleConfig
from .controllers import GHOST_CONTROLLERS, PACMAN_CONTROLLERS, UnknownController
from .maze import MazeGraph, build_graph, default_mazes, parse_maze
from .match import MatchResult, play_match
from .replay import InvariantChecker

RESULT_FIELDS = ("pacman", "ghosts", "seed", "score", "levels", "ticks")
STATS_FIELDS = ("pacman", "ghosts", "n", "mean", "stderr", "min", "max")
RATING_FIELDS = ("entrant", "track", "rating", "rd", "sigma")

PACMAN_TRACK = "pacman"
GHOST_TRACK = "ghosts"


@dataclass(frozen=True)
class PairStats:
    pacman: str
    ghosts: str
    n: int
    mean: float
    stderr: float
    min: int
    max: int

    @property
    def insufficient(self) -> bool:
        """A single game gives no spread estimate; stderr is 0 by convention."""
        return self.n < 2

    def csv_row(self) -> list:
        return [self.pacman, self.ghosts, self.n, f"{self.mean:.4f}", f"{self.stderr:.4f}", self.min, self.max]


def pair_stats(pacman: str, ghosts: str, scores: Sequence[int]) -> PairStats:
    if not scores:
        raise ValueError("pair_stats needs at least one score")
    n = len(scores)
    mean = statistics.fmean(scores)
    se = statistics.stdev(scores) / math.sqrt(n) if n > 1 else 0.0
    return PairStats(pacman, ghosts, n, mean, se, min(scores), max(scores))


# -- running games ----------------------------------------------------------

# graphs handed in by the caller, so in-process runs reuse them as they are
_KNOWN: dict[tuple[str, ...], tuple[MazeGraph, ...]] = {}


@functools.lru_cache(maxsize=16)
def _build(texts: tuple[str, ...]) -> tuple[MazeGraph, ...]:
    return tuple(build_graph(parse_maze(t, playable=True)) for t in texts)


def _graphs(texts: tuple[str, ...]) -> tuple[MazeGraph, ...]:
    known = _KNOWN.get(texts)
    return known if known is not None else _build(texts)


@dataclass(frozen=True)
class _Job:
    pacman: str
    ghosts: str
    seed: int
    maze_texts: tuple[str, ...]
    config: RuleConfig
    check: bool = False
    enforce_budget: bool = False


def _run_job(job: _Job) -> MatchResult:
    mazes = _graphs(job.maze_texts)
    checker = InvariantChecker() if job.check else None
    return play_match(job.pacman, job.ghosts, mazes, job.config, job.seed,
                      checker=checker, enforce_budget=job.enforce_budget)


def _check_names(pacman: str, ghosts: str) -> None:
    if pacman not in PACMAN_CONTROLLERS:
        raise UnknownController(f"unknown pacman controller {pacman!r}")
    if ghosts not in GHOST_CONTROLLERS:
        raise UnknownController(f"unknown ghost team {ghosts!r}")


def run_jobs(jobs: Sequence[_Job], workers: int = 1) -> list[MatchResult]:
    """Play ``jobs``; results come back in job order whatever the schedule."""
    if workers <= 1 or len(jobs) < 2:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def maze_text(graph: MazeGraph) -> str:
    """Text that parses back to ``graph``'s layout."""
    spec = graph.spec
    if spec.text:
        return spec.text
    lines = [f"name: {spec.name}"]
    if spec.start is not None and spec.cell(*spec.start) != "P":
        lines.append(f"start: {spec.start[0]},{spec.start[1]}")
    if spec.lair is not None:
        lines.append(f"lair: {spec.lair[0]},{spec.lair[1]}")
    return "\n".join(lines + list(spec.grid)) + "\n"


def _maze_texts(mazes: Optional[Sequence[MazeGraph]]) -> tuple[str, ...]:
    mazes = tuple(mazes) if mazes is not None else tuple(default_mazes())
    texts = tuple(maze_text(m) for m in mazes)
    if len(_KNOWN) > 32:
        _KNOWN.clear()
    _KNOWN[texts] = mazes
    return texts


def run_series(
    pacman: str,
    ghosts: str,
    n: int,
    base_seed: int = 0,
    config: Optional[RuleConfig] = None,
    mazes: Optional[Sequence[MazeGraph]] = None,
    *,
    workers: int = 1,
    check: bool = False,
    enforce_budget: bool = False,
) -> tuple[PairStats, list[MatchResult]]:
    """Play ``n`` games on seeds ``base_seed .. base_seed + n - 1``."""
    if n < 1:
        raise ValueError("a series needs at least one game")
    _check_names(pacman, ghosts)
    config = config or RuleConfig()
    texts = _maze_texts(mazes)
    jobs = [_Job(pacman, ghosts, base_seed + i, texts, config, check, enforce_budget) for i in range(n)]
    results = sorted(run_jobs(jobs, workers), key=lambda r: r.seed)
    return pair_stats(pacman, ghosts, [r.score for r in results]), results


# -- round robin -------------------------------------------------------------

@dataclass
class Tournament:
    pacmen: list[str]
    ghosts: list[str]
    games: int
    results: dict[tuple[str, str], list[MatchResult]] = field(default_factory=dict)
    stats: dict[tuple[str, str], PairStats] = field(default_factory=dict)

    def ranking(self, track: str) -> list[tuple[str, float]]:
        """Entrants by mean over all opponents, best first; ties go to the lower name.

        Pacmen rank by score scored, ghost teams by score conceded (lower is better).
        """
        if track == PACMAN_TRACK:
            means = {p: statistics.fmean(self.stats[(p, g)].mean for g in self.ghosts) for p in self.pacmen}
            return sorted(means.items(), key=lambda kv: (-kv[1], kv[0]))
        if track == GHOST_TRACK:
            means = {g: statistics.fmean(self.stats[(p, g)].mean for p in self.pacmen) for g in self.ghosts}
            return sorted(means.items(), key=lambda kv: (kv[1], kv[0]))
        raise ValueError(f"unknown track {track!r}")

    def all_results(self) -> list[MatchResult]:
        return [r for key in sorted(self.results) for r in self.results[key]]


def round_robin(
    pacmen: Sequence[str],
    ghosts: Sequence[str],
    games: int,
    config: Optional[RuleConfig] = None,
    mazes: Optional[Sequence[MazeGraph]] = None,
    base_seed: int = 0,
    *,
    workers: int = 1,
) -> Tournament:
    """Cross-pair every pacman entrant with every ghost team for ``games`` games each."""
    if not pacmen or not ghosts:
        raise ValueError("both tracks need at least one entrant")
    for track in (pacmen, ghosts):
        dupes = sorted({name for name in track if list(track).count(name) > 1})
        if dupes:
            raise ValueError(f"duplicate entrant names: {', '.join(dupes)}")
    if games < 1:
        raise ValueError("games per pairing must be >= 1")
    for p in pacmen:
        for g in ghosts:
            _check_names(p, g)
    config = config or RuleConfig()
    texts = _maze_texts(mazes)
    pairs = [(p, g) for p in pacmen for g in ghosts]
    jobs = [_Job(p, g, base_seed + i, texts, config) for p, g in pairs for i in range(games)]
    played = run_jobs(jobs, workers)
    tour = Tournament(list(pacmen), list(ghosts), games)
    for (p, g), start in zip(pairs, range(0, len(played), games)):
        chunk = sorted(played[start:start + games], key=lambda r: r.seed)
        tour.results[(p, g)] = chunk
        tour.stats[(p, g)] = pair_stats(p, g, [r.score for r in chunk])
    return tour


def derive_outcomes(stats: dict[tuple[str, str], PairStats]) -> dict[str, list[tuple[str, str, float]]]:
    """Turn the bipartite score matrix into within-track pairwise results.

    For entrants A and B of one track and every opponent both have faced, A
    gets 1 (win), 0.5 (equal means) or 0 against B.  Pacmen want higher
    means, ghost teams lower.  Each unordered pair is listed once, as
    ``(a, b, score_of_a)`` with ``a < b``.
    """
    by_pac: dict[str, dict[str, float]] = {}
    by_ghost: dict[str, dict[str, float]] = {}
    for (p, g), s in stats.items():
        by_pac.setdefault(p, {})[g] = s.mean
        by_ghost.setdefault(g, {})[p] = s.mean

    def pairwise(table: dict[str, dict[str, float]], higher_wins: bool) -> list[tuple[str, str, float]]:
        out = []
        names = sorted(table)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                for opp in sorted(set(table[a]) & set(table[b])):
                    ma, mb = table[a][opp], table[b][opp]
                    if ma == mb:
                        score = 0.5
                    else:
                        score = 1.0 if (ma > mb) == higher_wins else 0.0
                    out.append((a, b, score))
        return out

    return {PACMAN_TRACK: pairwise(by_pac, True), GHOST_TRACK: pairwise(by_ghost, False)}


# -- Glicko-2 ----------------------------------------------------------------

GLICKO_SCALE = 173.7178


class RatingConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Rating:
    rating: float = 1500.0
    rd: float = 350.0
    sigma: float = 0.06

    def __post_init__(self):
        if self.rd <= 0 or self.sigma <= 0:
            raise ValueError("rating deviation and volatility must be > 0")


def _g(phi: float) -> float:
    return 1.0 / math.sqrt(1.0 + 3.0 * phi * phi / math.pi ** 2)


def glicko2_update(
    player: Rating,
    results: Iterable[tuple[Rating, float]],
    tau: float = 0.5,
    *,
    epsilon: float = 1e-6,
    max_iter: int = 100,
) -> Rating:
    """One rating period of Glicko-2 for ``player`` given (opponent, outcome) pairs."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    results = list(results)
    mu = (player.rating - 1500.0) / GLICKO_SCALE
    phi = player.rd / GLICKO_SCALE
    sigma = player.sigma
    if not results:
        phi_star = math.sqrt(phi * phi + sigma * sigma)
        return Rating(player.rating, phi_star * GLICKO_SCALE, sigma)

    v_inv = 0.0
    delta_sum = 0.0
    for opp, outcome in results:
        if outcome not in (0, 0.5, 1):
            raise ValueError(f"outcome must be 0, 0.5 or 1, got {outcome!r}")
        mu_j = (opp.rating - 1500.0) / GLICKO_SCALE
        g = _g(opp.rd / GLICKO_SCALE)
        e = 1.0 / (1.0 + math.exp(-g * (mu - mu_j)))
        v_inv += g * g * e * (1.0 - e)
        delta_sum += g * (outcome - e)
    v = 1.0 / v_inv
    delta = v * delta_sum

    # volatility: root of f by the Illinois variant of regula falsi
    a = math.log(sigma * sigma)

    def f(x: float) -> float:
        ex = math.exp(x)
        num = ex * (delta * delta - phi * phi - v - ex)
        den = 2.0 * (phi * phi + v + ex) ** 2
        return num / den - (x - a) / (tau * tau)

    big_a = a
    if delta * delta > phi * phi + v:
        big_b = math.log(delta * delta - phi * phi - v)
    else:
        k = 1
        while f(a - k * tau) < 0:
            k += 1
            if k > max_iter:
                raise RatingConvergenceError("could not bracket the volatility root")
        big_b = a - k * tau
    f_a, f_b = f(big_a), f(big_b)
    for _ in range(max_iter):
        if abs(big_b - big_a) <= epsilon:
            break
        big_c = big_a + (big_a - big_b) * f_a / (f_b - f_a)
        f_c = f(big_c)
        if f_c * f_b <= 0:
            big_a, f_a = big_b, f_b
        else:
            f_a /= 2.0
        big_b, f_b = big_c, f_c
    else:
        raise RatingConvergenceError(f"volatility iteration did not converge in {max_iter} steps")
    sigma_new = math.exp(big_a / 2.0)

    phi_star = math.sqrt(phi * phi + sigma_new * sigma_new)
    phi_new = 1.0 / math.sqrt(1.0 / (phi_star * phi_star) + 1.0 / v)
    mu_new = mu + phi_new * phi_new * delta_sum
    return Rating(GLICKO_SCALE * mu_new + 1500.0, GLICKO_SCALE * phi_new, sigma_new)


def rate_period(
    ratings: dict[tuple[str, str], Rating],
    outcomes: dict[str, list[tuple[str, str, float]]],
    tau: float = 0.5,
) -> dict[tuple[str, str], Rating]:
    """Apply one rating period; every update uses the pre-period ratings."""
    games: dict[tuple[str, str], list[tuple[Rating, float]]] = {key: [] for key in ratings}
    for track, rows in outcomes.items():
        for a, b, score in rows:
            ka, kb = (a, track), (b, track)
            ratings.setdefault(ka, Rating())
            ratings.setdefault(kb, Rating())
            games.setdefault(ka, []).append((ratings[kb], score))
            games.setdefault(kb, []).append((ratings[ka], 1.0 - score))
    return {key: glicko2_update(ratings[key], games.get(key, []), tau) for key in sorted(ratings)}


def rate_tournament(tour: Tournament, tau: float = 0.5,
                    prior: Optional[dict[tuple[str, str], Rating]] = None) -> dict[tuple[str, str], Rating]:
    """One full cross-pairing round is one rating period."""
    ratings = dict(prior or {})
    for p in tour.pacmen:
        ratings.setdefault((p, PACMAN_TRACK), Rating())
    for g in tour.ghosts:
        ratings.setdefault((g, GHOST_TRACK), Rating())
    return rate_period(ratings, derive_outcomes(tour.stats), tau)


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    param: str
    value: float
    stats: PairStats
    violations: int = 0  # rule violations found when played with check=True


def parameter_sweep(
    param: str,
    values: Sequence,
    games: int,
    opponent: str = "COP",
    ghosts: str = "POGC",
    config: Optional[RuleConfig] = None,
    mazes: Optional[Sequence[MazeGraph]] = None,
    base_seed: int = 0,
    *,
    workers: int = 1,
    check: bool = False,
) -> list[SweepPoint]:
    config = config or RuleConfig()
    points = []
    for value in values:
        stats, results = run_series(opponent, ghosts, games, base_seed, config.with_overrides({param: value}),
                                    mazes, workers=workers, check=check)
        points.append(SweepPoint(param, value, stats, sum(r.violations for r in results)))
    return points


def threshold_sweep(thresholds: Sequence[int], games: int, opponent: str = "COP", **kwargs) -> list[SweepPoint]:
    """POGC conceded score per memory threshold."""
    return parameter_sweep("pogc.threshold", thresholds, games, opponent, "POGC", **kwargs)


def sweep_values(start: float, stop: float, step: float) -> list:
    """Inclusive arithmetic range; integers stay integers."""
    if step <= 0:
        raise ValueError("step must be > 0")
    if stop < start:
        raise ValueError("--to must not be below --from")
    if step > stop - start and stop != start:
        raise ValueError("step is larger than the swept range")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = [start + i * step for i in range(count)]
    if all(float(x).is_integer() for x in (start, stop, step)):
        values = [int(v) for v in values]
    return values


# -- CSV ---------------------------------------------------------------------

def _writer(out: TextIO, header: Sequence[str], stamp: Optional[str]):
    if stamp:
        out.write(f"# generated {stamp}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    return w


def write_results(out: TextIO, results: Iterable[MatchResult], stamp: Optional[str] = None) -> None:
    w = _writer(out, RESULT_FIELDS, stamp)
    for r in results:
        w.writerow(r.csv_row())


def write_stats(out: TextIO, stats: Iterable[PairStats], stamp: Optional[str] = None) -> None:
    w = _writer(out, STATS_FIELDS, stamp)
    for s in stats:
        w.writerow(s.csv_row())


def write_ratings(out: TextIO, ratings: dict[tuple[str, str], Rating], stamp: Optional[str] = None) -> None:
    w = _writer(out, RATING_FIELDS, stamp)
    for (name, track), r in sorted(ratings.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        w.writerow([name, track, f"{r.rating:.2f}", f"{r.rd:.2f}", f"{r.sigma:.6f}"])


def write_sweep(out: TextIO, points: Iterable[SweepPoint], stamp: Optional[str] = None) -> None:
    w = _writer(out, ("param", "value", "pacman", "ghosts", "n", "mean", "stderr", "insufficient"), stamp)
    for p in points:
        s = p.stats
        w.writerow([p.param, p.value, s.pacman, s.ghosts, s.n, f"{s.mean:.4f}", f"{s.stderr:.4f}",
                    int(s.insufficient)])
