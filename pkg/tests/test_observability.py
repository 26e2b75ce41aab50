import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from pacarena.config import RuleConfig
from pacarena.engine import GHOSTS, PACMAN, new_game, step
from pacarena.maze import Direction, bundled_maze
from pacarena.observability import ModelKind, Sight, VisibilityModel, make_view, make_views, visible

import oracles
from conftest import SMALL

ROWS = oracles.grid_rows(SMALL)
MODELS = [
    VisibilityModel.full(),
    VisibilityModel.los(),
    VisibilityModel.los(3),
    VisibilityModel.forward_los(),
    VisibilityModel.radius("euclidean", 3.5),
    VisibilityModel.radius("manhattan", 4),
]


def oracle_sees(model, limit, a, facing, b):
    """Visibility recomputed from the raw grid rows."""
    if model.kind is ModelKind.FULL:
        return True
    (ra, ca), (rb, cb) = a, b
    if model.kind is ModelKind.RADIUS:
        if model.metric.value == "euclidean":
            return math.hypot(ra - rb, ca - cb) <= model.d
        return abs(ra - rb) + abs(ca - cb) <= model.d
    if model.kind is ModelKind.LOS:
        return oracles.los_visible(ROWS, a, b, limit)
    if a == b:
        return True
    if facing is Direction.NEUTRAL:
        return False
    dr, dc = facing.delta
    ahead = (rb - ra) * dr > 0 if dr else (cb - ca) * dc > 0
    return ahead and oracles.los_visible(ROWS, a, b, limit)


def longest_straight_run(rows):
    best = 0
    for line in list(rows) + ["".join(col) for col in zip(*rows)]:
        for run in line.split("#"):
            best = max(best, len(run))
    return best


def test_default_range_is_longest_corridor_plus_one(small):
    assert small.longest_corridor() == longest_straight_run(ROWS) == 13
    assert VisibilityModel.los().range_for(small) == 14


def check_view(model, state, agent, view, limit):
    g = state.graph
    if agent == PACMAN:
        me, facing, hidden = state.pac_node, state.pac_dir, False
    else:
        me, facing = state.ghosts[agent].node, state.ghosts[agent].direction
        # a restricted observer inside the lair sees nothing; FULL still sees all
        hidden = state.ghosts[agent].lair > 0 and model.kind is not ModelKind.FULL
    here = g.coords[me]

    def sees(node):
        return not hidden and oracle_sees(model, limit, here, facing, g.coords[node])

    for n in g.pill_nodes:
        if sees(n):
            assert view.pills[n] == bool(state.pills[n])
        else:
            assert n not in view.pills
    for n in g.power_pill_nodes:
        if sees(n):
            assert view.power_pills[n] == bool(state.power_pills[n])
        else:
            assert n not in view.power_pills
    if agent == PACMAN or sees(state.pac_node):
        assert view.pacman == state.pac_node and view.pacman_direction == state.pac_dir
    else:
        assert view.pacman is None and view.pacman_direction is None
    for i, ghost in enumerate(state.ghosts):
        info = view.ghosts.get(GHOSTS[i])
        shown = i == agent or (
            sees(ghost.node) and (model.kind is ModelKind.FULL or not ghost.lair)
        )
        if shown:
            assert info is not None
            assert (info.node, info.direction, info.edible, info.in_lair) == (
                ghost.node, ghost.direction, ghost.edible > 0, ghost.lair > 0)
        else:
            assert info is None


@pytest.mark.parametrize("model", MODELS, ids=lambda m: f"{m.kind.value}-{m.range}-{m.metric.value}")
def test_views_are_sound_and_exact(small, model):
    rng = random.Random(7)
    limit = model.range_for(small) if model.kind in (ModelKind.LOS, ModelKind.FORWARD_LOS) else None
    sight = Sight(model, small)
    for game in range(100):
        state = new_game([small], RuleConfig(level_tick_limit=120), seed=game)
        for _ in range(60):
            views = make_views(sight, state)
            for agent, view in views.items():
                check_view(model, state, agent, view, limit)
            step(state, rng.choice(list(Direction)), [rng.choice(list(Direction)) for _ in GHOSTS])
            if state.game_over:
                break


@pytest.mark.parametrize("model", MODELS[1:], ids=lambda m: m.kind.value)
def test_sight_table_matches_reference(small, model):
    sight = Sight(model, small)
    for node in range(small.size):
        for facing in Direction:
            want = {t for t in range(small.size) if visible(model, small, node, facing, t)}
            assert sight.seen(node, facing) == want


def test_los_is_symmetric(small):
    model = VisibilityModel.los()
    for a in range(small.size):
        for b in range(small.size):
            assert visible(model, small, a, Direction.NEUTRAL, b) == visible(model, small, b, Direction.NEUTRAL, a)


def test_los_range_is_monotone(small):
    prev = set()
    for k in range(1, 15):
        sight = Sight(VisibilityModel.los(k), small)
        now = {(a, b) for a in range(small.size) for b in sight.seen(a, Direction.NEUTRAL)}
        assert prev <= now
        prev = now


def test_forward_is_subset_of_los(small):
    forward = Sight(VisibilityModel.forward_los(), small)
    los = Sight(VisibilityModel.los(), small)
    for node in range(small.size):
        union = set()
        for facing in Direction:
            assert forward.seen(node, facing) <= los.seen(node, facing)
            union |= forward.seen(node, facing)
        assert union == los.seen(node, Direction.NEUTRAL)
        assert forward.seen(node, Direction.NEUTRAL) == {node}


def test_manhattan_radius_is_a_diamond():
    open_maze = "#########\n" + "#.......#\n" * 7 + "#########\n"
    from pacarena.maze import build_graph, parse_maze
    g = build_graph(parse_maze(open_maze))
    centre = g.node_at(4, 4)
    model = VisibilityModel.radius("manhattan", 2)
    seen = {g.coords[n] for n in range(g.size) if visible(model, g, centre, Direction.NEUTRAL, n)}
    assert len(seen) == 13
    assert (2, 4) in seen and (3, 3) in seen and (2, 3) not in seen
    euclid = VisibilityModel.radius("euclidean", 2)
    seen_e = {g.coords[n] for n in range(g.size) if visible(euclid, g, centre, Direction.NEUTRAL, n)}
    assert seen_e == seen  # sqrt(2) <= 2 < sqrt(5)


def test_walls_block_sight(small):
    model = VisibilityModel.los()
    a, b = small.node_at(1, 6), small.node_at(1, 8)
    assert not visible(model, small, a, Direction.NEUTRAL, b)


def test_ghost_in_lair_sees_only_itself(small):
    state = new_game([small], RuleConfig(), seed=0)
    view = make_view(VisibilityModel.los(), state, GHOSTS[1])
    assert view.in_lair and view.pacman is None
    assert set(view.ghosts) == {GHOSTS[1]}
    assert not view.pills and not view.power_pills


def test_view_maps_are_read_only(small):
    state = new_game([small])
    view = make_view(VisibilityModel.full(), state, PACMAN)
    with pytest.raises(TypeError):
        view.pills[small.pill_nodes[0]] = False
    with pytest.raises(Exception):
        view.score = 5


def test_pill_known_three_valued(small):
    state = new_game([small])
    first = small.pill_nodes[0]
    state.pills[first] = 0
    view = make_view(VisibilityModel.los(1), state, PACMAN)
    far = [n for n in small.pill_nodes if n not in view.pills]
    assert view.pill_known(far[0]) is None
    full = make_view(VisibilityModel.full(), state, PACMAN)
    assert full.pill_known(first) is False


def test_invalid_models_rejected():
    with pytest.raises(ValueError):
        VisibilityModel.los(0)
    with pytest.raises(ValueError):
        VisibilityModel.radius("euclidean", 0)
    with pytest.raises(ValueError):
        VisibilityModel.radius("path", 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.data())
def test_los_matches_grid_oracle(k, data):
    g = bundled_maze("arcade_a")
    rows = g.spec.grid
    model = VisibilityModel.los(k)
    a = data.draw(st.integers(0, g.size - 1))
    b = data.draw(st.integers(0, g.size - 1))
    assert visible(model, g, a, Direction.NEUTRAL, b) == oracles.los_visible(rows, g.coords[a], g.coords[b], k)
