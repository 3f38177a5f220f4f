"""Cleaning agents: a boundary-sweeping team and an idealised perfect cleaner.

The team walks the region's boundary clockwise, keeping the clean exterior on
its left, and removes every tile it stands on that is a boundary tile and can
be removed without disconnecting the region.

Co-located agents move out one at a time: on a shared tile only the
lowest-id agent acts, the rest wait, and the acting agent may not clean a tile
somebody else is standing on (unless every remaining tile is occupied).

The team starts stacked on one tile and is released at a fixed gap: agent
``i`` starts moving at step ``i * release_gap``, where the default gap is the
initial boundary length divided by ``k``, so the agents end up spread evenly
around the region instead of marching in a clump.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .region import RegionState, is_critical

# (dy, dx) headings in clockwise order; a right turn is +1
NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3
HEADINGS = ((1, 0), (0, 1), (-1, 0), (0, -1))


class ProtocolError(RuntimeError):
    """An agent was found off the contaminated region."""


@dataclass
class AgentState:
    id: int
    position: tuple[int, int]
    orientation: int = WEST


@dataclass
class AgentTeam:
    agents: list[AgentState]
    start_point: tuple[int, int]
    release_gap: int = 1
    clock: int = 0

    @property
    def k(self) -> int:
        return len(self.agents)

    def positions(self) -> list[tuple[int, int]]:
        return [a.position for a in self.agents]

    def copy(self) -> "AgentTeam":
        return AgentTeam([AgentState(a.id, a.position, a.orientation) for a in self.agents],
                         self.start_point, self.release_gap, self.clock)


def start_tile(region: RegionState) -> tuple[int, int]:
    """Row-major smallest boundary tile."""
    return min(region.boundary)


def place_team(region: RegionState, k: int, release_gap: int | None = None) -> AgentTeam:
    """All ``k`` agents on the start tile, heading west.

    The start tile has clean tiles to its south and west, so heading west puts
    the exterior on the agents' left.
    """
    if k < 1:
        raise ValueError("a team needs at least one agent")
    p0 = start_tile(region)
    if release_gap is None:
        release_gap = max(1, -(-len(region.boundary) // k))
    return AgentTeam([AgentState(i, p0, WEST) for i in range(k)], p0, release_gap)


def boundary_move(region: RegionState, pos: tuple[int, int],
                  heading: int) -> tuple[tuple[int, int], int] | None:
    """Next (tile, heading) of a clockwise boundary walk from ``pos``.

    Tries left, straight, right, back, taking the first contaminated boundary
    tile.  From an interior tile the walker keeps straight until it reaches
    the boundary.  Returns None when no 4-neighbour is contaminated.
    """
    tiles = region.tiles
    edge = region.boundary
    y, x = pos
    fallback = None
    for turn in (3, 0, 1, 2):
        h = (heading + turn) % 4
        dy, dx = HEADINGS[h]
        c = (y + dy, x + dx)
        if c in tiles:
            if c in edge:
                return c, h
            if fallback is None:
                fallback = (c, h)
    if fallback is not None and pos in tiles and pos not in edge:
        dy, dx = HEADINGS[heading]
        c = (y + dy, x + dx)
        if c in tiles:
            return c, heading
    return fallback


def protocol_step(region: RegionState, team: AgentTeam) -> tuple[RegionState, AgentTeam, set]:
    """One synchronous step of the sweeping team; mutates and returns both.

    Agents act in id order.  An acting agent cleans its tile when the tile is
    on the boundary, not critical and not shared, then walks on; otherwise it
    just walks.  An agent alone on the last tile cleans it.
    """
    if not region.tiles:
        raise ProtocolError("protocol_step called on an empty region")
    occupancy: dict[tuple[int, int], int] = {}
    for a in team.agents:
        if a.position not in region.tiles:
            raise ProtocolError(f"agent {a.id} at {a.position} is off the region")
        occupancy[a.position] = occupancy.get(a.position, 0) + 1
    leaders = set()
    seen = set()
    for a in team.agents:
        if a.id * team.release_gap > team.clock:
            continue
        if a.position not in seen:
            seen.add(a.position)
            leaders.add(a.id)

    cleaned: set = set()
    moved: set = set()  # ids that already changed tile this step
    for a in team.agents:
        if a.id not in leaders:
            continue
        if not region.tiles:
            break
        pos = a.position
        move = boundary_move(region, pos, a.orientation)
        if move is None:
            # last tile of the region
            region.remove(pos)
            cleaned.add(pos)
            break
        shared = occupancy[pos] > 1
        # sharing only blocks cleaning while there is somewhere else to stand
        crowded = shared and sum(1 for n in occupancy.values() if n) >= len(region.tiles)
        if shared and any(b.id in moved and b.position == pos for b in team.agents):
            crowded = False  # pushing that agent again would be a two-tile jump
        if ((not shared or crowded) and pos in region.boundary
                and not is_critical(region, pos)):
            region.remove(pos)
            cleaned.add(pos)
            move = boundary_move(region, pos, a.orientation)
            if shared:
                for b in team.agents:
                    if b is not a and b.position == pos:
                        b.position, b.orientation = boundary_move(region, pos, b.orientation)
                        occupancy[b.position] = occupancy.get(b.position, 0) + 1
                        occupancy[pos] -= 1
                        moved.add(b.id)
        new_pos, a.orientation = move
        occupancy[pos] -= 1
        occupancy[new_pos] = occupancy.get(new_pos, 0) + 1
        a.position = new_pos
        moved.add(a.id)
    team.clock += 1
    return region, team, cleaned


def _ranked(region: RegionState, cy: float, cx: float) -> list:
    tiles = region.tiles
    return [
        (-(((y + 1, x) not in tiles) + ((y - 1, x) not in tiles)
           + ((y, x + 1) not in tiles) + ((y, x - 1) not in tiles)),
         -(abs(y - cy) + abs(x - cx)), (y, x))
        for y, x in region.boundary
    ]


def perfect_cleaner_step(region: RegionState, k: int) -> tuple[RegionState, list]:
    """Remove ``min(k, S)`` tiles in place, keeping the rest 4-connected.

    Greedy: boundary tiles with the most clean 4-neighbours go first, then
    those farthest (Manhattan) from the centroid, then row-major order; a
    candidate is skipped if it has become critical.  Ranks are refreshed
    whenever the short list of candidates is used up.  Returns the region and
    the removed tiles in removal order.
    """
    removed: list = []
    if k <= 0 or not region.tiles:
        return region, removed
    if len(region.tiles) <= k:
        removed = sorted(region.tiles)
        region.clear()
        return region, removed
    while len(removed) < k:
        cy, cx = region.centroid
        want = k - len(removed)
        # each pass ranks a few spares beyond what is needed; critical
        # candidates are skipped and a new pass re-ranks if they run out
        cands = heapq.nsmallest(4 * want + 8, _ranked(region, cy, cx))
        before = len(removed)
        for _, _, c in cands:
            if len(removed) == k:
                break
            if c not in region.boundary or is_critical(region, c):
                continue
            region.remove(c)
            removed.append(c)
        if len(removed) == before:
            break
    return region, removed
