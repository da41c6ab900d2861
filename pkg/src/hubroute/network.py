"""Hub-network graph model: loading, validation, serialization, generation.

The network file format is a single JSON document:

    {
      "hubs":  [{"id", "name", "lat", "lon", "terminal"}, ...],
      "edges": [{"from", "to", "travel_time_h", "distance_mi",
                 "directed" (optional, default false)}, ...]
    }

Undirected edge entries expand into two symmetric arcs. Storage is always
directed so the search code stays general.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .errors import GenerationError, ParseError, UnknownHub, ValidationError
from .geo import GeoPoint, haversine_distance

DEFAULT_BOUNDING_BOX = (24.0, 37.0, -92.0, -75.0)  # lat_min, lat_max, lon_min, lon_max
DEFAULT_SPEED_MPH = 50.0


@dataclass(frozen=True)
class Hub:
    id: str
    name: str
    location: GeoPoint
    is_terminal: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("hub id must be a non-empty string")


@dataclass(frozen=True)
class Arc:
    """Directed connection between two hubs with fixed time and distance."""

    from_hub: str
    to_hub: str
    travel_time_h: float
    distance_mi: float


class Network:
    """Immutable directed hub graph with a per-hub outgoing-arc index.

    Construction validates all invariants: unique hub ids, no dangling or
    duplicate arcs, positive times and distances, and reachability of every
    terminal from every non-terminal hub.
    """

    def __init__(self, hubs: list[Hub], arcs: list[Arc]):
        hub_index: dict[str, Hub] = {}
        for hub in hubs:
            if hub.id in hub_index:
                raise ValidationError(f"duplicate hub id {hub.id!r}")
            hub_index[hub.id] = hub

        arc_index: dict[tuple[str, str], Arc] = {}
        adjacency: dict[str, list[Arc]] = {h: [] for h in hub_index}
        for arc in arcs:
            for endpoint in (arc.from_hub, arc.to_hub):
                if endpoint not in hub_index:
                    raise ValidationError(
                        f"arc {arc.from_hub!r} -> {arc.to_hub!r} references "
                        f"unknown hub {endpoint!r}"
                    )
            if arc.from_hub == arc.to_hub:
                raise ValidationError(f"self-loop arc on hub {arc.from_hub!r}")
            if arc.travel_time_h <= 0:
                raise ValidationError(
                    f"arc {arc.from_hub!r} -> {arc.to_hub!r} has non-positive "
                    f"travel_time_h {arc.travel_time_h}"
                )
            if arc.distance_mi <= 0:
                raise ValidationError(
                    f"arc {arc.from_hub!r} -> {arc.to_hub!r} has non-positive "
                    f"distance_mi {arc.distance_mi}"
                )
            key = (arc.from_hub, arc.to_hub)
            if key in arc_index:
                raise ValidationError(
                    f"duplicate arc {arc.from_hub!r} -> {arc.to_hub!r}"
                )
            arc_index[key] = arc
            adjacency[arc.from_hub].append(arc)

        for out in adjacency.values():
            out.sort(key=lambda a: a.to_hub)

        self.hubs: dict[str, Hub] = dict(sorted(hub_index.items()))
        self.arcs: dict[tuple[str, str], Arc] = dict(sorted(arc_index.items()))
        self._adjacency = adjacency
        self._check_terminal_reachability()

    def _check_terminal_reachability(self) -> None:
        terminals = [h.id for h in self.hubs.values() if h.is_terminal]
        if not terminals:
            return
        reverse: dict[str, list[str]] = {h: [] for h in self.hubs}
        for (u, v) in self.arcs:
            reverse[v].append(u)
        for t in terminals:
            reached = {t}
            stack = [t]
            while stack:
                node = stack.pop()
                for pred in reverse[node]:
                    if pred not in reached:
                        reached.add(pred)
                        stack.append(pred)
            missing = [
                h for h, hub in self.hubs.items()
                if not hub.is_terminal and h not in reached
            ]
            if missing:
                raise ValidationError(
                    f"hub(s) {', '.join(sorted(missing))} cannot reach "
                    f"terminal {t!r}"
                )

    def neighbors(self, hub_id: str) -> list[tuple[str, Arc]]:
        """Outgoing arcs of a hub as (neighbor id, arc), ascending by id."""
        if hub_id not in self.hubs:
            raise UnknownHub(f"unknown hub {hub_id!r}")
        return [(a.to_hub, a) for a in self._adjacency[hub_id]]

    def location(self, hub_id: str) -> GeoPoint:
        if hub_id not in self.hubs:
            raise UnknownHub(f"unknown hub {hub_id!r}")
        return self.hubs[hub_id].location

    def terminals(self) -> list[str]:
        return [h.id for h in self.hubs.values() if h.is_terminal]

    def non_terminals(self) -> list[str]:
        return [h.id for h in self.hubs.values() if not h.is_terminal]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.hubs == other.hubs and self.arcs == other.arcs

    def __repr__(self) -> str:
        return f"Network({len(self.hubs)} hubs, {len(self.arcs)} arcs)"


def load_network(document: str | dict) -> Network:
    """Parse and validate a network document (JSON text or parsed mapping)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"network document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ParseError("network document must be a JSON object")
    for key in ("hubs", "edges"):
        if key not in document:
            raise ParseError(f"network document missing {key!r} list")
        if not isinstance(document[key], list):
            raise ParseError(f"network document {key!r} must be a list")

    hubs = []
    for i, entry in enumerate(document["hubs"]):
        hubs.append(_parse_hub(entry, i))
    arcs: list[Arc] = []
    for i, entry in enumerate(document["edges"]):
        arcs.extend(_parse_edge(entry, i))
    return Network(hubs, arcs)


def load_network_file(path) -> Network:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read network file {path}: {exc}") from exc
    return load_network(text)


def _parse_hub(entry, index: int) -> Hub:
    if not isinstance(entry, dict):
        raise ParseError(f"hubs[{index}] is not an object")
    try:
        hub_id = entry["id"]
        lat = entry["lat"]
        lon = entry["lon"]
    except KeyError as exc:
        raise ParseError(f"hubs[{index}] missing key {exc}") from exc
    if not isinstance(hub_id, str) or not hub_id:
        raise ParseError(f"hubs[{index}] id must be a non-empty string")
    if not isinstance(lat, (int, float)) or not isinstance(lon, (int, float)):
        raise ParseError(f"hub {hub_id!r}: lat/lon must be numbers")
    try:
        location = GeoPoint(float(lat), float(lon))
    except ValueError as exc:
        raise ValidationError(f"hub {hub_id!r}: {exc}") from exc
    return Hub(
        id=hub_id,
        name=str(entry.get("name", hub_id)),
        location=location,
        is_terminal=bool(entry.get("terminal", False)),
    )


def _parse_edge(entry, index: int) -> list[Arc]:
    if not isinstance(entry, dict):
        raise ParseError(f"edges[{index}] is not an object")
    try:
        u = entry["from"]
        v = entry["to"]
        time_h = entry["travel_time_h"]
        dist_mi = entry["distance_mi"]
    except KeyError as exc:
        raise ParseError(f"edges[{index}] missing key {exc}") from exc
    if not isinstance(u, str) or not isinstance(v, str):
        raise ParseError(f"edges[{index}] endpoints must be strings")
    if not isinstance(time_h, (int, float)) or not isinstance(dist_mi, (int, float)):
        raise ParseError(f"edges[{index}] travel_time_h/distance_mi must be numbers")
    arcs = [Arc(u, v, float(time_h), float(dist_mi))]
    if not bool(entry.get("directed", False)):
        arcs.append(Arc(v, u, float(time_h), float(dist_mi)))
    return arcs


def validate_document(document: str | dict) -> list[str]:
    """Collect every violation in a network document instead of failing on
    the first one. An empty list means the document loads cleanly."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            return [f"network document is not valid JSON: {exc}"]
    if not isinstance(document, dict):
        return ["network document must be a JSON object"]
    problems: list[str] = []
    for key in ("hubs", "edges"):
        if not isinstance(document.get(key), list):
            problems.append(f"network document missing {key!r} list")
    if problems:
        return problems

    hubs: dict[str, Hub] = {}
    for i, entry in enumerate(document["hubs"]):
        try:
            hub = _parse_hub(entry, i)
        except (ParseError, ValidationError) as exc:
            problems.append(str(exc))
            continue
        if hub.id in hubs:
            problems.append(f"duplicate hub id {hub.id!r}")
            continue
        hubs[hub.id] = hub

    arcs: dict[tuple[str, str], Arc] = {}
    for i, entry in enumerate(document["edges"]):
        try:
            parsed = _parse_edge(entry, i)
        except ParseError as exc:
            problems.append(str(exc))
            continue
        # Diagnose the entry once, not each expanded direction.
        first = parsed[0]
        label = f"edge {first.from_hub!r} -> {first.to_hub!r}"
        if first.from_hub not in hubs or first.to_hub not in hubs:
            dangling = first.to_hub if first.from_hub in hubs else first.from_hub
            problems.append(f"{label} references unknown hub {dangling!r}")
            continue
        if first.from_hub == first.to_hub:
            problems.append(f"self-loop arc on hub {first.from_hub!r}")
            continue
        if first.travel_time_h <= 0:
            problems.append(f"{label} has non-positive travel_time_h")
            continue
        if first.distance_mi <= 0:
            problems.append(f"{label} has non-positive distance_mi")
            continue
        for arc in parsed:
            if (arc.from_hub, arc.to_hub) in arcs:
                problems.append(
                    f"duplicate arc {arc.from_hub!r} -> {arc.to_hub!r}"
                )
                continue
            arcs[(arc.from_hub, arc.to_hub)] = arc

    if not problems:
        try:
            Network(list(hubs.values()), list(arcs.values()))
        except ValidationError as exc:
            problems.append(str(exc))
    return problems


def emit(net: Network) -> str:
    """Serialize a network back to its document format.

    Symmetric arc pairs with equal time and distance collapse into one
    undirected entry. Hubs and edges are sorted, keys are sorted, so the
    output is byte-stable for equal networks.
    """
    hubs = [
        {
            "id": hub.id,
            "name": hub.name,
            "lat": hub.location.lat,
            "lon": hub.location.lon,
            "terminal": hub.is_terminal,
        }
        for hub in net.hubs.values()
    ]
    edges = []
    emitted: set[tuple[str, str]] = set()
    for (u, v), arc in net.arcs.items():
        if (u, v) in emitted:
            continue
        twin = net.arcs.get((v, u))
        if (
            twin is not None
            and twin.travel_time_h == arc.travel_time_h
            and twin.distance_mi == arc.distance_mi
        ):
            a, b = min(u, v), max(u, v)
            edges.append(
                {
                    "from": a,
                    "to": b,
                    "travel_time_h": arc.travel_time_h,
                    "distance_mi": arc.distance_mi,
                    "directed": False,
                }
            )
            emitted.add((u, v))
            emitted.add((v, u))
        else:
            edges.append(
                {
                    "from": u,
                    "to": v,
                    "travel_time_h": arc.travel_time_h,
                    "distance_mi": arc.distance_mi,
                    "directed": True,
                }
            )
            emitted.add((u, v))
    edges.sort(key=lambda e: (e["from"], e["to"]))
    document = {"hubs": hubs, "edges": edges}
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def generate_network(
    hub_count: int,
    seed: int,
    *,
    k_nearest: int = 3,
    bounding_box: tuple[float, float, float, float] = DEFAULT_BOUNDING_BOX,
    speed_mph: float = DEFAULT_SPEED_MPH,
    terminal_count: int = 2,
) -> Network:
    """Generate a synthetic hub network, deterministic for (params, seed).

    Hubs are placed uniformly in the bounding box and linked (undirected) to
    their k nearest neighbors by great-circle distance; arc travel time is
    distance over a constant speed so time and mileage stay consistent.
    Disconnected components are stitched together through their closest hub
    pairs, then the farthest-apart pair of hubs is flagged as destination
    terminals (additional terminals, if requested, maximize separation from
    those already chosen).
    """
    if hub_count < 2:
        raise GenerationError(f"hub_count must be >= 2, got {hub_count}")
    if k_nearest < 1:
        raise GenerationError(f"k_nearest must be >= 1, got {k_nearest}")
    if terminal_count < 1:
        raise GenerationError(f"terminal_count must be >= 1, got {terminal_count}")
    if terminal_count > hub_count:
        raise GenerationError(
            f"terminal_count {terminal_count} exceeds hub_count {hub_count}"
        )
    if speed_mph <= 0:
        raise GenerationError(f"speed_mph must be positive, got {speed_mph}")
    lat_min, lat_max, lon_min, lon_max = bounding_box
    if lat_min >= lat_max or lon_min >= lon_max:
        raise GenerationError(f"degenerate bounding box {bounding_box}")

    rng = random.Random(seed)
    width = max(2, len(str(hub_count)))
    ids = [f"H{i + 1:0{width}d}" for i in range(hub_count)]
    locations = {
        hub_id: GeoPoint(rng.uniform(lat_min, lat_max), rng.uniform(lon_min, lon_max))
        for hub_id in ids
    }

    def dist(u: str, v: str) -> float:
        return haversine_distance(locations[u], locations[v])

    edges: set[tuple[str, str]] = set()
    for u in ids:
        ranked = sorted((o for o in ids if o != u), key=lambda v: (dist(u, v), v))
        for v in ranked[:k_nearest]:
            edges.add((min(u, v), max(u, v)))

    _stitch_components(ids, edges, dist)

    terminals = _pick_terminals(ids, dist, terminal_count)

    hubs = [
        Hub(
            id=hub_id,
            name=f"Hub {hub_id[1:]}",
            location=locations[hub_id],
            is_terminal=hub_id in terminals,
        )
        for hub_id in ids
    ]
    arcs: list[Arc] = []
    for (u, v) in sorted(edges):
        d = dist(u, v)
        if d <= 0:
            raise GenerationError(f"generated coincident hubs {u}/{v}; retry with another seed")
        t = d / speed_mph
        arcs.append(Arc(u, v, t, d))
        arcs.append(Arc(v, u, t, d))
    try:
        return Network(hubs, arcs)
    except ValidationError as exc:  # stitching should prevent this
        raise GenerationError(f"generated network failed validation: {exc}") from exc


def _stitch_components(ids, edges, dist) -> None:
    """Add shortest bridging edges until the undirected graph is connected."""
    while True:
        components = _components(ids, edges)
        if len(components) <= 1:
            return
        best: tuple[float, str, str] | None = None
        for i, comp_a in enumerate(components):
            for comp_b in components[i + 1:]:
                for u in comp_a:
                    for v in comp_b:
                        cand = (dist(u, v), min(u, v), max(u, v))
                        if best is None or cand < best:
                            best = cand
        assert best is not None
        edges.add((best[1], best[2]))


def _components(ids, edges) -> list[list[str]]:
    adj: dict[str, list[str]] = {h: [] for h in ids}
    for (u, v) in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen: set[str] = set()
    components = []
    for start in ids:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            node = stack.pop()
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    comp.append(nxt)
                    stack.append(nxt)
        components.append(sorted(comp))
    return components


def _pick_terminals(ids, dist, terminal_count: int) -> set[str]:
    # Farthest-apart pair first; iteration over sorted pairs keeps ties
    # deterministic (first, lexicographically smallest pair wins).
    best_pair = (ids[0], ids[1])
    best_d = -1.0
    for i, u in enumerate(ids):
        for v in ids[i + 1:]:
            d = dist(u, v)
            if d > best_d:
                best_d = d
                best_pair = (u, v)
    chosen = list(best_pair)[:terminal_count]
    while len(chosen) < terminal_count:
        remaining = [h for h in ids if h not in chosen]
        nxt = max(remaining, key=lambda h: (min(dist(h, t) for t in chosen), h))
        chosen.append(nxt)
    return set(chosen)
