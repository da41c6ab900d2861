"""Sector-constrained candidate-hub discovery.

Given a shipment sitting at a hub with a remaining time budget, discovery
finds every hub it could still move through: an anchor bearing is computed
from the current hub toward the midpoint of the first shortest-path hub and
the destination, neighbors outside the angular sector around that anchor are
discarded, and the surviving arcs are expanded breadth-first while cumulative
travel plus a transshipment charge plus the best continuation time stays
within budget. Hubs with no viable continuation are pruned outright.

If the sector leaves no usable next hop, the anchor is recalibrated once to
point straight at the first shortest-path hub. If that still yields nothing,
the shipment cannot meet its deadline and the result reports the shortfall
and a recommended lead-time extension instead of a candidate set.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .errors import NoPath, UnknownHub
from .geo import (
    GeoPoint,
    SectorParams,
    geographic_midpoint,
    initial_bearing,
    within_sector,
)
from .network import Network
from .pathfinding import MinTimeTable, shortest_path

DEFAULT_HANDLING_H = 0.5

# The budget boundary is inclusive. Travel times are summed forward from the
# current hub but continuation times come from a reverse-rooted table, so two
# mathematically equal totals can differ by a few ulps; the slack keeps an
# exactly-affordable shortest path from being rejected.
FEASIBILITY_EPS_H = 1e-9


@dataclass(frozen=True)
class CandidateTimes:
    """Per-member time metadata: best time from the search origin and best
    continuation time to the destination."""

    min_time_from_current_h: float
    min_time_to_dest_h: float


@dataclass(frozen=True)
class CandidateSet:
    """Feasible hubs discovered inside the forward sector.

    members maps every unpruned hub to its time metadata; next_hops is the
    subset directly adjacent to the search origin, which is what the routing
    policy chooses among. The search origin itself is never a member.
    """

    origin: str
    destination: str
    anchor_deg: float
    fallback_used: bool
    members: dict[str, CandidateTimes] = field(default_factory=dict)
    next_hops: tuple[str, ...] = ()
    expansions: int = 0


@dataclass(frozen=True)
class Infeasible:
    """No candidate survives the budget: the deadline cannot be met.

    recommended_extension_h covers the shortfall rounded up to a whole hour.
    """

    shortfall_h: float
    recommended_extension_h: float
    expansions: int = 0


DiscoveryOutcome = Union[CandidateSet, Infeasible]


class AnchorInfo(NamedTuple):
    anchor_deg: float
    first_sp_hub: str


def compute_anchor_bearing(net: Network, current: str, destination: str) -> AnchorInfo:
    """Anchor bearing at a hub: toward the midpoint of the first
    shortest-path hub and the destination (or straight at the destination
    when the first hop already is the destination)."""
    if current == destination:
        raise ValueError("anchor undefined when current == destination")
    sp = shortest_path(net, current, destination)
    first_hop = sp.hubs[1]
    anchor = _anchor_toward(net, current, first_hop, destination)
    return AnchorInfo(anchor, first_hop)


def _anchor_toward(net: Network, current: str, first_hop: str, destination: str) -> float:
    cur = net.location(current)
    if first_hop == destination:
        return initial_bearing(cur, net.location(destination))
    mid = geographic_midpoint(net.location(first_hop), net.location(destination))
    return initial_bearing(cur, mid)


def sector_filter_neighbors(
    net: Network, current: str, anchor_deg: float, params: SectorParams
) -> list[str]:
    """Direct neighbors whose arc bearing falls inside the sector, id-sorted."""
    return [
        v
        for v, _arc in net.neighbors(current)
        if _arc_passes(net.location(current), net.location(v), anchor_deg, params)
    ]


def feasible_continuation(
    table: MinTimeTable,
    hub: str,
    elapsed_h: float,
    budget_h: float,
    handling_h: float = DEFAULT_HANDLING_H,
) -> bool:
    """Whether a hub still allows an on-budget continuation to the
    destination, charging the transshipment time unless the hub is the
    destination itself."""
    remaining = table.get(hub)
    if remaining is None:
        return False
    charge = handling_h if hub != table.destination else 0.0
    return elapsed_h + charge + remaining <= budget_h + FEASIBILITY_EPS_H


def discover_candidates(
    net: Network,
    table: MinTimeTable,
    current: str,
    destination: str,
    budget_h: float,
    params: SectorParams = SectorParams(),
    handling_h: float = DEFAULT_HANDLING_H,
) -> DiscoveryOutcome:
    """Discover the candidate set for one shipment at one hub.

    Returns a CandidateSet on success or an Infeasible verdict when no next
    hop fits the budget even after anchor recalibration. Raises NoPath when
    the destination is unreachable regardless of budget.
    """
    for hub in (current, destination):
        if hub not in net.hubs:
            raise UnknownHub(f"unknown hub {hub!r}")
    if table.destination != destination:
        raise ValueError(
            f"table rooted at {table.destination!r}, expected {destination!r}"
        )
    if budget_h < 0:
        raise ValueError(f"budget must be non-negative, got {budget_h}")

    if current == destination:
        return CandidateSet(
            origin=current,
            destination=destination,
            anchor_deg=0.0,
            fallback_used=False,
            members={destination: CandidateTimes(0.0, 0.0)},
            next_hops=(),
        )

    if current not in table:
        raise NoPath(f"no path from {current!r} to {destination!r}")
    sp = shortest_path(net, current, destination)
    first_hop = sp.hubs[1]

    anchor = _anchor_toward(net, current, first_hop, destination)
    admitted, expansions = _expand(
        net, table, current, destination, budget_h, anchor, params, handling_h
    )
    fallback_used = False
    neighbor_ids = {v for v, _ in net.neighbors(current)}
    next_hops = sorted(set(admitted) & neighbor_ids)

    # One recalibration: aim straight at the first shortest-path hub, so that
    # hop has deviation zero under the new anchor. It runs when the sector
    # came up empty, and also when it dropped an affordable shortest-path hop
    # while keeping others: the guarantee that a budget-feasible shortest
    # path keeps its first hop on offer would not survive otherwise.
    first_arc = net.arcs[(current, first_hop)]
    first_affordable = feasible_continuation(
        table, first_hop, first_arc.travel_time_h, budget_h, handling_h
    )
    if not next_hops or (first_hop not in next_hops and first_affordable):
        fallback_used = True
        anchor = initial_bearing(net.location(current), net.location(first_hop))
        admitted, more = _expand(
            net, table, current, destination, budget_h, anchor, params, handling_h
        )
        expansions += more
        next_hops = sorted(set(admitted) & neighbor_ids)

    if not next_hops:
        needed = sp.total_time_h + (handling_h if first_hop != destination else 0.0)
        shortfall = needed - budget_h
        if shortfall <= 0:
            raise RuntimeError(
                "sector expansion found no next hop although the shortest "
                "path fits the budget; this indicates a search bug"
            )
        return Infeasible(
            shortfall_h=shortfall,
            recommended_extension_h=float(math.ceil(shortfall)),
            expansions=expansions,
        )

    members: dict[str, CandidateTimes] = {}
    for hub in sorted(admitted):
        t_rem = table.get(hub)
        assert t_rem is not None  # admission requires a continuation
        members[hub] = CandidateTimes(admitted[hub], t_rem)
    if destination not in members:
        # The sector never reached the destination itself, but feasible
        # members imply the plain shortest path fits the budget; record it.
        members[destination] = CandidateTimes(sp.total_time_h, 0.0)
        members = dict(sorted(members.items()))
    return CandidateSet(
        origin=current,
        destination=destination,
        anchor_deg=anchor,
        fallback_used=fallback_used,
        members=members,
        next_hops=tuple(next_hops),
        expansions=expansions,
    )


def _expand(
    net: Network,
    table: MinTimeTable,
    current: str,
    destination: str,
    budget_h: float,
    anchor_deg: float,
    params: SectorParams,
    handling_h: float,
) -> tuple[dict[str, float], int]:
    """Budget-pruned expansion over sector-passing arcs.

    Nodes settle in order of cumulative travel time from the search origin
    (revisits relax to the minimum), are admitted iff an on-budget
    continuation to the destination exists at that time, and only admitted
    nodes expand further. Returns admitted hubs with their settled times and
    the number of node expansions performed.
    """
    best_g: dict[str, float] = {current: 0.0}
    admitted: dict[str, float] = {}
    settled: set[str] = set()
    heap: list[tuple[float, str]] = [(0.0, current)]
    expansions = 0
    while heap:
        g_u, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u != current:
            if not feasible_continuation(table, u, g_u, budget_h, handling_h):
                continue  # prune: over budget or no viable continuation
            admitted[u] = g_u
        expansions += 1
        loc_u = net.location(u)
        for v, arc in net.neighbors(u):
            if v in settled or v == current:
                continue
            if not _arc_passes(loc_u, net.location(v), anchor_deg, params):
                continue
            g_v = g_u + arc.travel_time_h
            if g_v < best_g.get(v, math.inf):
                best_g[v] = g_v
                heapq.heappush(heap, (g_v, v))
    return admitted, expansions


def _arc_passes(
    from_loc: GeoPoint, to_loc: GeoPoint, anchor_deg: float, params: SectorParams
) -> bool:
    # A zero-length hop cannot point backwards; treat it as deviation 0.
    if from_loc.lat == to_loc.lat and from_loc.lon == to_loc.lon:
        return True
    return within_sector(initial_bearing(from_loc, to_loc), anchor_deg, params)
