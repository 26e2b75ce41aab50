import io
import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from pacarena.config import RuleConfig
from pacarena.controllers import UnknownController
from pacarena.maze import bundled_maze
from pacarena.tournament import (
    GHOST_TRACK,
    PACMAN_TRACK,
    PairStats,
    Rating,
    RatingConvergenceError,
    derive_outcomes,
    glicko2_update,
    pair_stats,
    rate_period,
    rate_tournament,
    round_robin,
    run_series,
    sweep_values,
    threshold_sweep,
    write_ratings,
    write_results,
    write_stats,
    write_sweep,
)

import oracles

WORKED = (1500, 200, 0.06, [(1400, 30, 1), (1550, 100, 0), (1700, 300, 0)])
SMALL_CFG = RuleConfig(level_tick_limit=300, max_levels=2)


def stats_of(**means):
    return {tuple(k.split("_")): PairStats(*k.split("_"), 2, v, 1.0, 0, 0) for k, v in means.items()}


def test_pair_stats_mean_and_stderr():
    s = pair_stats("A", "B", [1, 2, 3])
    assert s.mean == 2 and s.stderr == pytest.approx(1 / math.sqrt(3), abs=1e-4)
    assert (s.min, s.max, s.n) == (1, 3, 3) and not s.insufficient
    one = pair_stats("A", "B", [7])
    assert one.insufficient and one.stderr == 0
    with pytest.raises(ValueError):
        pair_stats("A", "B", [])


def test_series_is_deterministic_and_worker_independent():
    mazes = [bundled_maze("ring")]
    a, ra = run_series("COP", "POGC", 6, base_seed=4, config=SMALL_CFG, mazes=mazes)
    b, rb = run_series("COP", "POGC", 6, base_seed=4, config=SMALL_CFG, mazes=mazes, workers=2)
    assert a == b and ra == rb
    assert [r.seed for r in ra] == list(range(4, 10))


def test_series_rejects_unknown_names():
    with pytest.raises(UnknownController):
        run_series("NOBODY", "COG", 1)


def test_round_robin_counts_and_errors():
    mazes = [bundled_maze("ring")]
    tour = round_robin(["COP", "POP"], ["COG", "POG"], 2, SMALL_CFG, mazes)
    assert len(tour.all_results()) == 8 and set(tour.stats) == set(itertools.product(["COP", "POP"], ["COG", "POG"]))
    one = round_robin(["COP"], ["COG"], 3, SMALL_CFG, mazes)
    assert len(one.all_results()) == 3
    with pytest.raises(ValueError, match="duplicate"):
        round_robin(["COP", "COP"], ["COG"], 1, SMALL_CFG, mazes)
    with pytest.raises(ValueError):
        round_robin([], ["COG"], 1)
    with pytest.raises(ValueError):
        round_robin(["COP"], ["COG"], 0)
    with pytest.raises(UnknownController):
        round_robin(["COP"], ["NOPE"], 1)


def test_ranking_uses_track_direction():
    from pacarena.tournament import Tournament
    tour = Tournament(["P1", "P2"], ["G1", "G2"], 1, stats=stats_of(P1_G1=100, P1_G2=300, P2_G1=200, P2_G2=400))
    assert [n for n, _ in tour.ranking(PACMAN_TRACK)] == ["P2", "P1"]
    assert [n for n, _ in tour.ranking(GHOST_TRACK)] == ["G1", "G2"]
    with pytest.raises(ValueError):
        tour.ranking("fruit")


def test_ghost_ranking_matches_reference_table():
    # conceded means vs the complete-information pacman: lower is stronger
    from pacarena.tournament import Tournament
    tour = Tournament(["COP"], ["COG", "POG", "POGC"], 1,
                      stats=stats_of(COP_COG=3895.67, COP_POG=17257.24, COP_POGC=5769.30))
    assert [n for n, _ in tour.ranking(GHOST_TRACK)] == ["COG", "POGC", "POG"]


def test_derive_outcomes():
    out = derive_outcomes(stats_of(A_X=10, B_X=5, A_Y=3, B_Y=3))
    assert out[PACMAN_TRACK] == [("A", "B", 1.0), ("A", "B", 0.5)]
    assert out[GHOST_TRACK] == [("X", "Y", 0.0), ("X", "Y", 0.0)]  # X concedes more to both


def test_glicko_worked_example():
    r, rd, sigma, games = WORKED
    new = glicko2_update(Rating(r, rd, sigma), [(Rating(a, b), s) for a, b, s in games], tau=0.5)
    assert abs(new.rating - 1464.06) <= 0.01
    assert abs(new.rd - 151.52) <= 0.01
    assert abs(new.sigma - 0.05999) <= 0.001


def test_glicko_oracle_reproduces_worked_example():
    r, rd, sigma, games = WORKED
    o = oracles.glicko2_oracle(r, rd, sigma, games, 0.5)
    assert abs(o[0] - 1464.06) <= 0.01 and abs(o[1] - 151.52) <= 0.01 and abs(o[2] - 0.05999) <= 0.001


@settings(max_examples=80, deadline=None)
@given(st.floats(1000, 2000), st.floats(30, 350), st.floats(0.03, 0.1),
       st.lists(st.tuples(st.floats(1000, 2000), st.floats(30, 350), st.sampled_from([0, 0.5, 1])),
                min_size=1, max_size=6),
       st.floats(0.3, 1.2))
def test_glicko_matches_oracle(r, rd, sigma, games, tau):
    new = glicko2_update(Rating(r, rd, sigma), [(Rating(a, b), s) for a, b, s in games], tau=tau)
    o = oracles.glicko2_oracle(r, rd, sigma, games, tau)
    assert new.rating == pytest.approx(o[0], abs=1e-4)
    assert new.rd == pytest.approx(o[1], abs=1e-4)
    assert new.sigma == pytest.approx(o[2], abs=1e-6)


def test_glicko_idle_period_only_widens_rd():
    before = Rating(1600, 80, 0.06)
    after = glicko2_update(before, [])
    assert after.rating == before.rating and after.sigma == before.sigma
    assert after.rd == pytest.approx(math.hypot(80 / 173.7178, 0.06) * 173.7178)


def test_glicko_symmetric_pair():
    ratings = {("A", "pacman"): Rating(), ("B", "pacman"): Rating()}
    new = rate_period(ratings, {"pacman": [("A", "B", 1.0)]})
    a, b = new[("A", "pacman")], new[("B", "pacman")]
    assert a.rating - 1500 == pytest.approx(1500 - b.rating)
    assert a.rd == pytest.approx(b.rd)


def test_glicko_convergence_cap():
    with pytest.raises(RatingConvergenceError):
        glicko2_update(Rating(1500, 200, 0.06), [(Rating(1400, 30), 1)], max_iter=1, epsilon=1e-300)


def test_invalid_rating():
    with pytest.raises(ValueError):
        Rating(1500, 0)


def test_rating_order_is_stable_under_entrant_permutation():
    base = stats_of(P1_G1=100, P1_G2=300, P2_G1=200, P2_G2=400, P3_G1=50, P3_G2=120)
    from pacarena.tournament import Tournament
    results = set()
    for perm in itertools.permutations(["P1", "P2", "P3"]):
        tour = Tournament(list(perm), ["G2", "G1"], 1, stats=base)
        rated = rate_tournament(tour)
        order = tuple(sorted((k[0] for k in rated if k[1] == PACMAN_TRACK), key=lambda n: -rated[(n, PACMAN_TRACK)].rating))
        results.add(order)
    assert results == {("P2", "P1", "P3")}


def test_sweep_values():
    assert sweep_values(0, 200, 10) == list(range(0, 201, 10))
    assert sweep_values(0.5, 1.5, 0.5) == [0.5, 1.0, 1.5]
    assert sweep_values(5, 5, 1) == [5]
    for bad in ((0, 10, 0), (10, 0, 1), (0, 10, 20)):
        with pytest.raises(ValueError):
            sweep_values(*bad)


def test_threshold_sweep_rows_and_flags():
    points = threshold_sweep([0, 50, 200], 1, "COP", config=SMALL_CFG, mazes=[bundled_maze("ring")])
    assert [p.value for p in points] == [0, 50, 200]
    assert all(p.stats.insufficient for p in points)
    out = io.StringIO()
    write_sweep(out, points)
    lines = out.getvalue().splitlines()
    assert lines[0] == "param,value,pacman,ghosts,n,mean,stderr,insufficient" and len(lines) == 4


def test_csv_writers():
    mazes = [bundled_maze("ring")]
    tour = round_robin(["COP"], ["COG"], 2, SMALL_CFG, mazes)
    out = io.StringIO()
    write_results(out, tour.all_results(), stamp="2026-01-01T00:00:00")
    lines = out.getvalue().splitlines()
    assert lines[0] == "# generated 2026-01-01T00:00:00"
    assert lines[1] == "pacman,ghosts,seed,score,levels,ticks" and len(lines) == 4
    out = io.StringIO()
    write_stats(out, tour.stats.values())
    assert out.getvalue().splitlines()[0] == "pacman,ghosts,n,mean,stderr,min,max"
    out = io.StringIO()
    write_ratings(out, rate_tournament(tour))
    rows = out.getvalue().splitlines()
    assert rows[0] == "entrant,track,rating,rd,sigma" and rows[1].startswith("COG,ghosts,")
