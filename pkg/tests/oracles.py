"""Independent reference computations used to check the package.

Nothing here imports the code under test beyond plain data types, so a bug
in the package cannot hide behind the same bug in its check.
"""

import math
from collections import deque


def grid_rows(text):
    rows = [r for r in text.splitlines() if r and ":" not in r]
    return rows


def open_cells(rows):
    return {(r, c) for r, row in enumerate(rows) for c, ch in enumerate(row) if ch != "#"}


def grid_neighbours(rows, cell, blocked="GD"):
    """Open neighbours of ``cell``, wrapping horizontally at the edges."""
    r, c = cell
    cols = len(rows[0])
    out = []
    for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1)):
        nr, nc = r + dr, c + dc
        if dc:
            nc %= cols
        if 0 <= nr < len(rows) and rows[nr][nc] != "#" and rows[nr][nc] not in blocked:
            out.append((nr, nc))
    return out


def bfs_from(rows, source):
    """Shortest moves from ``source`` to every open cell, walking through lair cells too."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        cell = queue.popleft()
        for nxt in grid_neighbours(rows, cell, blocked=""):
            if nxt not in dist:
                dist[nxt] = dist[cell] + 1
                queue.append(nxt)
    return dist


def junction_cells(rows):
    return {cell for cell in open_cells(rows)
            if rows[cell[0]][cell[1]] not in "GD" and len(grid_neighbours(rows, cell)) >= 3}


def los_visible(rows, a, b, limit):
    """Straight unobstructed row/column sight within ``limit`` cells, no wrap."""
    if a == b:
        return True
    (ra, ca), (rb, cb) = a, b
    if ra != rb and ca != cb:
        return False
    if ra == rb:
        span = [(ra, c) for c in range(min(ca, cb) + 1, max(ca, cb))]
        length = abs(ca - cb)
    else:
        span = [(r, ca) for r in range(min(ra, rb) + 1, max(ra, rb))]
        length = abs(ra - rb)
    return length <= limit and all(rows[r][c] != "#" for r, c in span)


# -- Glicko-2, written out step by step with a bisection root finder ---------

def glicko2_oracle(r, rd, sigma, games, tau):
    scale = 173.7178
    mu, phi = (r - 1500) / scale, rd / scale
    opp = [((rj - 1500) / scale, rdj / scale, s) for rj, rdj, s in games]

    def g(p):
        return 1 / math.sqrt(1 + 3 * p ** 2 / math.pi ** 2)

    def expect(mu_j, phi_j):
        return 1 / (1 + math.exp(-g(phi_j) * (mu - mu_j)))

    v = 1 / sum(g(pj) ** 2 * expect(mj, pj) * (1 - expect(mj, pj)) for mj, pj, _ in opp)
    delta = v * sum(g(pj) * (s - expect(mj, pj)) for mj, pj, s in opp)
    a = math.log(sigma ** 2)

    def f(x):
        return (math.exp(x) * (delta ** 2 - phi ** 2 - v - math.exp(x))
                / (2 * (phi ** 2 + v + math.exp(x)) ** 2) - (x - a) / tau ** 2)

    # f is decreasing; widen the bracket until it straddles the root, then bisect
    lo, hi = a - 1, a + 1
    while f(lo) < 0:
        lo -= 2 * (a - lo)
    while f(hi) > 0:
        hi += 2 * (hi - a)
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    sigma_new = math.exp(((lo + hi) / 2) / 2)
    phi_star = math.sqrt(phi ** 2 + sigma_new ** 2)
    phi_new = 1 / math.sqrt(1 / phi_star ** 2 + 1 / v)
    mu_new = mu + phi_new ** 2 * sum(g(pj) * (s - expect(mj, pj)) for mj, pj, s in opp)
    return scale * mu_new + 1500, scale * phi_new, sigma_new
