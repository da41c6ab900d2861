"""Matplotlib renderings of networks, routes, candidate areas, and KPIs.

Everything renders to a Figure for the caller to save; the CLI writes them
as PNG files next to the delimited outputs. Uses the Agg backend so no
display is required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from collections import Counter

from .discovery import CandidateSet
from .network import Network
from .pathfinding import Path
from .sim import ComparisonReport, TruckTrip


def _draw_network(ax, net: Network, label_hubs: bool = True) -> None:
    drawn = set()
    for (u, v) in net.arcs:
        if (v, u) in drawn:
            continue
        lu, lv = net.hubs[u].location, net.hubs[v].location
        ax.plot([lu.lon, lv.lon], [lu.lat, lv.lat], color="0.85", lw=0.8, zorder=1)
        drawn.add((u, v))
    for hub in net.hubs.values():
        if hub.is_terminal:
            ax.scatter(
                hub.location.lon, hub.location.lat,
                marker="s", s=60, color="firebrick", zorder=3,
            )
        else:
            ax.scatter(
                hub.location.lon, hub.location.lat,
                marker="o", s=25, color="steelblue", zorder=3,
            )
        if label_hubs:
            ax.annotate(
                hub.id, (hub.location.lon, hub.location.lat),
                textcoords="offset points", xytext=(3, 3), fontsize=6,
            )
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_aspect("equal", adjustable="datalim")


def figure_route(net: Network, path: Path, title: str = "Shortest path") -> plt.Figure:
    fig, ax = plt.subplots(figsize=(8, 6))
    _draw_network(ax, net)
    lons = [net.hubs[h].location.lon for h in path.hubs]
    lats = [net.hubs[h].location.lat for h in path.hubs]
    ax.plot(lons, lats, color="navy", lw=2.0, marker="o", ms=4, zorder=4)
    ax.set_title(
        f"{title}: {path.hubs[0]} → {path.hubs[-1]} "
        f"({path.total_time_h:.1f} h, {path.total_distance_mi:.0f} mi)"
    )
    fig.tight_layout()
    return fig


def figure_candidate_area(
    net: Network, cs: CandidateSet, title: str = "Candidate area"
) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(8, 6))
    _draw_network(ax, net)
    for hub_id in cs.members:
        loc = net.hubs[hub_id].location
        ax.scatter(loc.lon, loc.lat, marker="o", s=90, facecolors="none",
                   edgecolors="darkorange", lw=1.6, zorder=4)
    for hub_id in cs.next_hops:
        loc = net.hubs[hub_id].location
        ax.scatter(loc.lon, loc.lat, marker="o", s=150, facecolors="none",
                   edgecolors="seagreen", lw=2.0, zorder=5)
    origin = net.hubs[cs.origin].location
    ax.scatter(origin.lon, origin.lat, marker="*", s=220, color="black", zorder=6)
    dest = net.hubs[cs.destination].location
    ax.scatter(dest.lon, dest.lat, marker="*", s=220, color="firebrick", zorder=6)
    fallback = " (fallback anchor)" if cs.fallback_used else ""
    ax.set_title(
        f"{title}: {cs.origin} → {cs.destination}, anchor "
        f"{cs.anchor_deg:.0f}°{fallback}, {len(cs.members)} members"
    )
    fig.tight_layout()
    return fig


def figure_truck_flows(
    net: Network, trips: list[TruckTrip], title: str = "Truck flows"
) -> plt.Figure:
    """Arc usage map: line width scales with the number of trucks per arc."""
    fig, ax = plt.subplots(figsize=(8, 6))
    _draw_network(ax, net, label_hubs=False)
    counts = Counter()
    for trip in trips:
        key = tuple(sorted((trip.from_hub, trip.to_hub)))
        counts[key] += 1
    peak = max(counts.values()) if counts else 1
    for (u, v), n in sorted(counts.items()):
        lu, lv = net.hubs[u].location, net.hubs[v].location
        ax.plot(
            [lu.lon, lv.lon], [lu.lat, lv.lat],
            color="darkslateblue", lw=0.5 + 4.0 * n / peak, alpha=0.7, zorder=2,
        )
    ax.set_title(f"{title}: {len(trips)} trucks, busiest arc {peak} trips")
    fig.tight_layout()
    return fig


def figure_kpi_comparison(comp: ComparisonReport) -> plt.Figure:
    b, d = comp.baseline, comp.directional
    fig, axes = plt.subplots(1, 3, figsize=(11, 4))
    panels = [
        ("Trucks dispatched", b.trucks_dispatched, d.trucks_dispatched,
         f"{comp.delta_trucks_pct:+.1f}%"),
        ("Total miles", b.total_miles, d.total_miles, f"{comp.delta_miles_pct:+.1f}%"),
        ("On-time %", b.delivered_on_time_pct, d.delivered_on_time_pct, ""),
    ]
    for ax, (label, base, direc, delta) in zip(axes, panels):
        bars = ax.bar(["baseline", "directional"], [base, direc],
                      color=["gray", "darkslateblue"])
        ax.set_title(f"{label} {delta}".strip())
        ax.bar_label(bars, fmt="%.0f", fontsize=8)
    fig.suptitle(f"Baseline vs directional, {b.shipment_count} shipments")
    fig.tight_layout()
    return fig


def save_figure(fig: plt.Figure, path) -> None:
    fig.savefig(path, dpi=140)
    plt.close(fig)
