"""Shortest-path baseline and destination-rooted minimum-time tables.

Dijkstra minimizes total travel time; ties break on fewer hops, then on the
lexicographically smaller hub sequence, so repeated runs (and therefore
simulations) are exactly reproducible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import NoPath, UnknownHub
from .network import Network


@dataclass(frozen=True)
class Path:
    """A simple hub sequence with its travel-time and distance totals."""

    hubs: tuple[str, ...]
    total_time_h: float
    total_distance_mi: float


@dataclass(frozen=True)
class MinTimeTable:
    """Minimum travel time from every hub to one destination.

    Hubs that cannot reach the destination are absent from the map.
    """

    destination: str
    min_time_to_dest: dict[str, float] = field(default_factory=dict)

    def get(self, hub_id: str) -> float | None:
        return self.min_time_to_dest.get(hub_id)

    def __contains__(self, hub_id: str) -> bool:
        return hub_id in self.min_time_to_dest


def shortest_path(net: Network, origin: str, destination: str) -> Path:
    """Minimum-travel-time path from origin to destination.

    Raises NoPath when the destination is unreachable. origin == destination
    yields the single-hub path with zero totals.
    """
    for hub in (origin, destination):
        if hub not in net.hubs:
            raise UnknownHub(f"unknown hub {hub!r}")
    if origin == destination:
        return Path((origin,), 0.0, 0.0)

    # Heap entries carry the full hub sequence: comparing
    # (time, hops, sequence) implements the tie-break contract directly.
    heap: list[tuple[float, int, tuple[str, ...], float]] = [
        (0.0, 0, (origin,), 0.0)
    ]
    settled: set[str] = set()
    while heap:
        time_h, hops, seq, dist_mi = heapq.heappop(heap)
        node = seq[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == destination:
            return Path(seq, time_h, dist_mi)
        for neighbor, arc in net.neighbors(node):
            if neighbor in settled or neighbor in seq:
                continue
            heapq.heappush(
                heap,
                (
                    time_h + arc.travel_time_h,
                    hops + 1,
                    seq + (neighbor,),
                    dist_mi + arc.distance_mi,
                ),
            )
    raise NoPath(f"no path from {origin!r} to {destination!r}")


def min_time_table(net: Network, destination: str) -> MinTimeTable:
    """Single-destination shortest times, computed on the reversed graph."""
    if destination not in net.hubs:
        raise UnknownHub(f"unknown hub {destination!r}")
    reverse: dict[str, list[tuple[str, float]]] = {h: [] for h in net.hubs}
    for (u, v), arc in net.arcs.items():
        reverse[v].append((u, arc.travel_time_h))

    times: dict[str, float] = {}
    heap: list[tuple[float, str]] = [(0.0, destination)]
    while heap:
        t, node = heapq.heappop(heap)
        if node in times:
            continue
        times[node] = t
        for pred, travel in reverse[node]:
            if pred not in times:
                heapq.heappush(heap, (t + travel, pred))
    return MinTimeTable(destination, times)
