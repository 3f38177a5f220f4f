"""Contaminated regions on the integer grid.

Tiles are stored as ``(y, x)`` tuples so that plain tuple comparison gives the
row-major ordering used everywhere for tie-breaks and draw order.  A
:class:`RegionState` keeps its 8-neighbour boundary and its 4-neighbour
potential boundary up to date incrementally, since both are read on every
simulation step.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, NamedTuple


class Tile(NamedTuple):
    """A grid vertex.  Field order is ``(y, x)`` so tuples sort row-major."""

    y: int
    x: int


# (dy, dx) offsets
N4 = ((1, 0), (0, 1), (-1, 0), (0, -1))
N8 = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
# 8-neighbourhood walked as a ring; consecutive entries are 4-adjacent and
# the 4-neighbours sit at even indices.
_RING = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))

SHAPES = ("digital_sphere", "square", "cross")


class RegionError(ValueError):
    pass


class RegionState:
    """The contaminated set at one time step, with cached boundaries.

    ``boundary`` holds the tiles with at least one clean 8-neighbour and
    ``potential`` maps every clean tile that has a contaminated 4-neighbour to
    the number of such neighbours.  Note that a clean tile 4-adjacent to any
    contaminated tile is automatically 4-adjacent to a boundary tile, so the
    keys of ``potential`` are exactly the potential boundary.

    Mutating methods keep the caches consistent; callers must not modify
    ``tiles``, ``boundary`` or ``potential`` directly.
    """

    __slots__ = ("tiles", "step", "boundary", "potential", "holes_created",
                 "_sum_y", "_sum_x", "_n8")

    def __init__(self, tiles: Iterable[tuple[int, int]] = (), step: int = 0):
        self.tiles: set[tuple[int, int]] = set()
        self.step = step
        self.boundary: set[tuple[int, int]] = set()
        self.potential: dict[tuple[int, int], int] = {}
        self.holes_created = 0
        self._sum_y = 0
        self._sum_x = 0
        # contaminated 8-neighbour count of every tile near the region
        self._n8: dict[tuple[int, int], int] = {}
        for t in tiles:
            self.add(t)

    def __len__(self) -> int:
        return len(self.tiles)

    def __contains__(self, tile) -> bool:
        return tile in self.tiles

    def __repr__(self) -> str:
        return f"RegionState(size={len(self.tiles)}, step={self.step})"

    @property
    def size(self) -> int:
        return len(self.tiles)

    @property
    def centroid(self) -> tuple[float, float]:
        n = len(self.tiles)
        if n == 0:
            return 0.0, 0.0
        return self._sum_y / n, self._sum_x / n

    def copy(self) -> "RegionState":
        other = RegionState.__new__(RegionState)
        other.tiles = set(self.tiles)
        other.step = self.step
        other.boundary = set(self.boundary)
        other.potential = dict(self.potential)
        other.holes_created = self.holes_created
        other._sum_y = self._sum_y
        other._sum_x = self._sum_x
        other._n8 = dict(self._n8)
        return other

    def sorted_potential(self) -> list[tuple[int, int]]:
        return sorted(self.potential)

    def add(self, t: tuple[int, int]) -> None:
        tiles = self.tiles
        if t in tiles:
            return
        y, x = t = (int(t[0]), int(t[1]))
        tiles.add(t)
        self._sum_y += y
        self._sum_x += x
        pot = self.potential
        pot.pop(t, None)
        get = pot.get
        for u in ((y + 1, x), (y, x + 1), (y - 1, x), (y, x - 1)):
            if u not in tiles:
                pot[u] = get(u, 0) + 1
        n8 = self._n8
        edge = self.boundary
        if n8.get(t, 0) < 8:
            edge.add(t)
        get = n8.get
        for u in ((y + 1, x), (y + 1, x + 1), (y, x + 1), (y - 1, x + 1),
                  (y - 1, x), (y - 1, x - 1), (y, x - 1), (y + 1, x - 1)):
            c = n8[u] = get(u, 0) + 1
            if c == 8:
                # only a neighbour can lose boundary status when a tile appears
                edge.discard(u)

    def remove(self, t: tuple[int, int]) -> None:
        tiles = self.tiles
        if t not in tiles:
            raise RegionError(f"tile {t} is not contaminated")
        tiles.remove(t)
        self.boundary.discard(t)
        y, x = t
        self._sum_y -= y
        self._sum_x -= x
        pot = self.potential
        count = 0
        for dy, dx in N4:
            u = (y + dy, x + dx)
            if u in tiles:
                count += 1
            else:
                c = pot[u] - 1
                if c:
                    pot[u] = c
                else:
                    del pot[u]
        if count:
            pot[t] = count
        if count == 4:
            self.holes_created += 1
        n8 = self._n8
        edge = self.boundary
        for dy, dx in N8:
            u = (y + dy, x + dx)
            c = n8[u] - 1
            if c:
                n8[u] = c
            else:
                del n8[u]
            if u in tiles:
                edge.add(u)

    def add_many(self, tiles: Iterable[tuple[int, int]]) -> None:
        for t in tiles:
            self.add(t)

    def clear(self) -> None:
        self._n8.clear()
        self.tiles.clear()
        self.boundary.clear()
        self.potential.clear()
        self._sum_y = self._sum_x = 0


def compute_boundary(tiles: set) -> set:
    """Boundary recomputed from scratch (tiles with a clean 8-neighbour)."""
    return {
        (y, x) for (y, x) in tiles
        if any((y + dy, x + dx) not in tiles for dy, dx in N8)
    }


def compute_potential(tiles: set) -> set:
    """Potential boundary recomputed from scratch, straight from its definition."""
    edge = compute_boundary(tiles)
    return {
        (y + dy, x + dx) for (y, x) in edge for dy, dx in N4
        if (y + dy, x + dx) not in tiles
    }


def boundary(region: RegionState) -> set:
    return set(region.boundary)


def potential_boundary(region: RegionState) -> set:
    return set(region.potential)


def flood_fill(tiles: set, start: tuple[int, int]) -> set:
    """4-connected component of ``tiles`` containing ``start``."""
    seen = {start}
    queue = deque([start])
    while queue:
        y, x = queue.popleft()
        for dy, dx in N4:
            u = (y + dy, x + dx)
            if u in tiles and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def count_components(tiles: set) -> int:
    remaining = set(tiles)
    n = 0
    while remaining:
        comp = flood_fill(remaining, next(iter(remaining)))
        remaining -= comp
        n += 1
    return n


def is_connected(tiles: set) -> bool:
    """True for a single 4-connected component or the empty set."""
    if not tiles:
        return True
    return len(flood_fill(tiles, next(iter(tiles)))) == len(tiles)


def _locally_simple(tiles: set, v: tuple[int, int]) -> bool | None:
    """Local connectivity test on the 8-neighbourhood ring of ``v``.

    Returns True when the contaminated 4-neighbours of ``v`` are joined
    within the ring (removal is safe), None when the ring splits them and
    only a global search can tell.
    """
    y, x = v
    occ = [(y + dy, x + dx) in tiles for dy, dx in _RING]
    if not (occ[0] or occ[2] or occ[4] or occ[6]):
        return True
    if all(occ):
        return True
    # rotate so the walk starts just after an empty ring slot
    start = occ.index(False)
    runs = 0
    in_run = False
    run_has_4 = False
    for i in range(1, 9):
        j = (start + i) % 8
        if occ[j]:
            if not in_run:
                in_run = True
                run_has_4 = False
            if j % 2 == 0:
                run_has_4 = True
        elif in_run:
            in_run = False
            if run_has_4:
                runs += 1
    if in_run and run_has_4:
        runs += 1
    return True if runs <= 1 else None


def _globally_splits(tiles: set, v: tuple[int, int]) -> bool:
    """Searches from every contaminated 4-neighbour of ``v`` in lockstep.

    Fronts that touch are merged; the region splits as soon as one merged
    front runs dry, so the cost is bounded by the smaller side.
    """
    y, x = v
    nbrs = [(y + dy, x + dx) for dy, dx in N4 if (y + dy, x + dx) in tiles]
    parent = list(range(len(nbrs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner = {v: -1}
    queues = []
    for i, n in enumerate(nbrs):
        owner[n] = i
        queues.append(deque([n]))
    groups = len(nbrs)
    while groups > 1:
        # a group whose every queue is empty is closed off
        live = {}
        for i, q in enumerate(queues):
            r = find(i)
            live[r] = live.get(r, False) or bool(q)
        if not all(live.values()):
            return True
        for i, q in enumerate(queues):
            if not q:
                continue
            cy, cx = q.popleft()
            for dy, dx in N4:
                u = (cy + dy, cx + dx)
                if u not in tiles:
                    continue
                j = owner.get(u)
                if j is None:
                    owner[u] = i
                    q.append(u)
                elif j >= 0:
                    a, b = find(i), find(j)
                    if a != b:
                        parent[a] = b
                        groups -= 1
    return False


def is_critical(region: RegionState, v: tuple[int, int]) -> bool:
    """Whether cleaning ``v`` would split the region into several pieces.

    The 8-neighbourhood ring decides most cases; when the ring separates the
    contaminated 4-neighbours, a flood fill from one of them settles it.  A
    singleton region is never critical.
    """
    tiles = region.tiles
    if v not in tiles:
        raise RegionError(f"tile {v} is not contaminated")
    if _locally_simple(tiles, v):
        return False
    return _globally_splits(tiles, v)


def neighborhood_sphere(center: tuple[int, int], n: int) -> set:
    """Tiles within Manhattan distance ``n`` of ``center``, center excluded."""
    if n < 1:
        raise RegionError("radius must be positive")
    cy, cx = center
    return {
        (cy + dy, cx + dx)
        for dy in range(-n, n + 1)
        for dx in range(-n + abs(dy), n - abs(dy) + 1)
        if dy or dx
    }


def _cross_band(width: int) -> range:
    lo = -(width // 2)
    return range(lo, lo + width)


def shape_tiles(kind: str, target_size: int) -> list[tuple[int, int]]:
    """Tiles of a generated shape, in the order they were taken."""
    if target_size < 1:
        raise RegionError("target_size must be >= 1")
    if kind == "digital_sphere":
        r = 0
        while 2 * r * (r + 1) + 1 < target_size:
            r += 1
        cells = [(y, x) for y in range(-r, r + 1) for x in range(-r, r + 1)
                 if abs(y) + abs(x) <= r]
        cells.sort(key=lambda t: (abs(t[0]) + abs(t[1]), t))
    elif kind == "square":
        r = 0
        while (2 * r + 1) ** 2 < target_size:
            r += 1
        cells = [(y, x) for y in range(-r, r + 1) for x in range(-r, r + 1)]
        # corners of each ring go last so every prefix stays 4-connected
        cells.sort(key=lambda t: (max(abs(t[0]), abs(t[1])),
                                  abs(t[0]) + abs(t[1]), t))
    elif kind == "cross":
        width = max(1, round(math.sqrt(target_size) / 3))
        band = _cross_band(width)
        reach = 0
        while 2 * width * (2 * reach + 1) - width * width < target_size:
            reach += 1
        span = reach + width
        cells = []
        for y in range(-span, span + 1):
            for x in range(-span, span + 1):
                r = min(abs(x) if y in band else math.inf,
                        abs(y) if x in band else math.inf)
                if r <= reach:
                    cells.append(((r, (y, x)), (y, x)))
        cells.sort()
        cells = [c for _, c in cells]
    else:
        raise RegionError(f"unknown shape {kind!r}; expected one of {SHAPES}")
    return cells[:target_size]


def generate_shape(kind: str, target_size: int) -> RegionState:
    """A 4-connected region of exactly ``target_size`` tiles around the origin.

    ``digital_sphere`` fills Manhattan shells, ``square`` fills Chebyshev
    shells (edge midpoints before corners) and ``cross`` grows four arms of
    width ``max(1, round(sqrt(n)/3))`` outward one layer at a time.  Ties
    within a shell are broken row-major.
    """
    return RegionState(shape_tiles(kind, target_size))


def sphere_potential_size(s: int, k: int = 0) -> int:
    """``floor(2*sqrt(2*(s-k)-1))``: the smallest possible potential boundary
    of an ``s - k`` tile region."""
    m = s - k
    if m < 1:
        raise RegionError(f"s - k must be >= 1 (got {m})")
    return math.isqrt(4 * (2 * m - 1))
