"""Plain-text KPI reports and reproducibility manifests.

Comparison reports follow the benchmark table layout: one row per routing
scheme with on-time percentage, trucks dispatched, and total truck-miles,
the directional row carrying signed percentage deltas against the baseline.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict

from . import __version__
from .sim import ComparisonReport, KpiReport, ScenarioConfig


def render_kpi_report(kpis: KpiReport) -> str:
    lines = [
        f"Routing scheme:     {kpis.mode}",
        f"Shipments:          {kpis.shipment_count}",
        f"Delivered:          {kpis.delivered} "
        f"(on-time {kpis.delivered_on_time_pct:.1f}%)",
        f"Undelivered:        {kpis.undelivered}",
        f"Infeasible:         {kpis.infeasible}",
        f"Trucks dispatched:  {kpis.trucks_dispatched}",
        f"Total miles:        {kpis.total_miles:,.0f}",
        f"Lateness:           mean {kpis.mean_lateness_h:.2f} h, "
        f"max {kpis.max_lateness_h:.2f} h",
    ]
    return "\n".join(lines) + "\n"


def render_comparison_report(comp: ComparisonReport, cfg: ScenarioConfig) -> str:
    b, d = comp.baseline, comp.directional
    header = (
        f"{'Routing Scheme':<14}  {'Shipments Delivered On-time':<28}  "
        f"{'Trucks Dispatched (Δ%)':<24}  {'Total Miles (Δ%)':<20}"
    )
    row_b = (
        f"{'Baseline':<14}  {b.delivered_on_time_pct:>26.1f}%  "
        f"{b.trucks_dispatched:<24}  {b.total_miles:<20,.0f}"
    )
    trucks_d = f"{d.trucks_dispatched} ({comp.delta_trucks_pct:+.1f}%)"
    miles_d = f"{d.total_miles:,.0f} ({comp.delta_miles_pct:+.1f}%)"
    row_d = (
        f"{'Directional':<14}  {d.delivered_on_time_pct:>26.1f}%  "
        f"{trucks_d:<24}  {miles_d:<20}"
    )
    lines = [
        f"Scenario: {cfg.shipment_count} shipments, seed {cfg.seed}, "
        f"capacity {cfg.truck_capacity}, wait threshold {cfg.wait_threshold_h} h, "
        f"sector ±{cfg.half_width_deg}°",
        "",
        header,
        row_b,
        row_d,
        "",
        f"Delivered/undelivered/infeasible: baseline {b.delivered}/{b.undelivered}/"
        f"{b.infeasible}; directional {d.delivered}/{d.undelivered}/{d.infeasible}",
        f"Lateness: baseline mean {b.mean_lateness_h:.2f} h max {b.max_lateness_h:.2f} h; "
        f"directional mean {d.mean_lateness_h:.2f} h max {d.max_lateness_h:.2f} h",
    ]
    return "\n".join(lines) + "\n"


def kpi_to_dict(kpis: KpiReport) -> dict:
    return asdict(kpis)


def comparison_to_dict(comp: ComparisonReport) -> dict:
    return {
        "baseline": asdict(comp.baseline),
        "directional": asdict(comp.directional),
        "delta_trucks_pct": comp.delta_trucks_pct,
        "delta_miles_pct": comp.delta_miles_pct,
    }


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def build_manifest(
    command: str,
    seed: int | None,
    *,
    network_path: str | None = None,
    network_digest: str | None = None,
    config: dict | None = None,
    shipments_digest: str | None = None,
    outputs: dict[str, str] | None = None,
) -> dict:
    """Everything needed to reproduce a run bit-for-bit.

    Digests are content hashes of the exact inputs; paths record where the
    outputs of this invocation went.
    """
    manifest: dict = {
        "tool": "hubroute",
        "version": __version__,
        "command": command,
        "seed": seed,
    }
    if network_path is not None:
        manifest["network"] = {"path": str(network_path), "sha256": network_digest}
    if config is not None:
        manifest["config"] = config
        manifest["config_sha256"] = sha256_text(json.dumps(config, sort_keys=True))
    if shipments_digest is not None:
        manifest["shipments_sha256"] = shipments_digest
    manifest["outputs"] = outputs or {}
    return manifest


def manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"
