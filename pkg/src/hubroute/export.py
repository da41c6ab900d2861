"""GeoJSON export of paths and candidate areas.

Features carry a role property so map viewers can style them apart:
shortest_path and candidate_arc on LineStrings, hub and candidate_hub on
Points. Coordinates are [lon, lat] per the GeoJSON convention.
"""

from __future__ import annotations

import json

from .discovery import CandidateSet, _arc_passes
from .geo import SectorParams
from .network import Network
from .pathfinding import Path


def _point(net: Network, hub_id: str, role: str, extra: dict | None = None) -> dict:
    hub = net.hubs[hub_id]
    properties = {"id": hub.id, "name": hub.name, "terminal": hub.is_terminal, "role": role}
    if extra:
        properties.update(extra)
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [hub.location.lon, hub.location.lat],
        },
        "properties": properties,
    }


def _line(net: Network, u: str, v: str, role: str, extra: dict | None = None) -> dict:
    lu, lv = net.hubs[u].location, net.hubs[v].location
    properties = {"from": u, "to": v, "role": role}
    if extra:
        properties.update(extra)
    return {
        "type": "Feature",
        "geometry": {
            "type": "LineString",
            "coordinates": [[lu.lon, lu.lat], [lv.lon, lv.lat]],
        },
        "properties": properties,
    }


def path_to_geojson(net: Network, path: Path) -> dict:
    """One Point per path hub plus one LineString per traversed arc."""
    features = [_point(net, hub, "hub") for hub in path.hubs]
    for u, v in zip(path.hubs, path.hubs[1:]):
        arc = net.arcs[(u, v)]
        features.append(
            _line(
                net,
                u,
                v,
                "shortest_path",
                {"travel_time_h": arc.travel_time_h, "distance_mi": arc.distance_mi},
            )
        )
    return {"type": "FeatureCollection", "features": features}


def candidates_to_geojson(
    net: Network, cs: CandidateSet, params: SectorParams = SectorParams()
) -> dict:
    """One Point per candidate-set member plus the sector-passing arcs that
    connect the search origin and the members.

    params must match the sector width the candidate set was discovered
    with; the recorded anchor bearing comes from the set itself.
    """
    features = []
    for hub_id, times in cs.members.items():
        features.append(
            _point(
                net,
                hub_id,
                "candidate_hub",
                {
                    "min_time_from_current_h": times.min_time_from_current_h,
                    "min_time_to_dest_h": times.min_time_to_dest_h,
                    "next_hop": hub_id in cs.next_hops,
                },
            )
        )
    inside = set(cs.members) | {cs.origin}
    drawn: set[tuple[str, str]] = set()
    for (u, v) in sorted(net.arcs):
        if u not in inside or v not in cs.members:
            continue
        if (v, u) in drawn:
            continue  # symmetric pair, already drawn
        if _arc_passes(net.location(u), net.location(v), cs.anchor_deg, params):
            features.append(_line(net, u, v, "candidate_arc"))
            drawn.add((u, v))
    return {"type": "FeatureCollection", "features": features}


def write_geojson(document: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")
