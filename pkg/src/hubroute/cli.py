"""Command-line surface: network generation/validation, routing queries,
scenario execution, and baseline-vs-directional comparison.

Every command that takes a seed is bit-reproducible: identical invocations
write identical files. Simulation commands write their reports, event logs,
shipment lists, figures, and a manifest into --out-dir; route commands can
export GeoJSON and figure files for map tooling.

Exit codes: 0 success (an infeasible-route verdict is a normal result),
1 usage error, 2 validation error, 3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path as FsPath

from . import __version__, figures
from .discovery import DEFAULT_HANDLING_H, Infeasible, discover_candidates
from .errors import ConfigError, HubRouteError, ParseError, StallDetected
from .export import candidates_to_geojson, path_to_geojson, write_geojson
from .geo import SectorParams
from .network import (
    DEFAULT_BOUNDING_BOX,
    DEFAULT_SPEED_MPH,
    emit,
    generate_network,
    load_network_file,
    validate_document,
)
from .pathfinding import min_time_table, shortest_path
from .report import (
    build_manifest,
    comparison_to_dict,
    kpi_to_dict,
    manifest_json,
    render_comparison_report,
    render_kpi_report,
    sha256_file,
    sha256_text,
)
from .sim import (
    MODE_BASELINE,
    MODE_DIRECTIONAL,
    ScenarioConfig,
    compare_runs,
    event_log_lines,
    generate_shipments,
    run_simulation,
    shipments_to_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="hubroute", description=__doc__)
    parser.add_argument(
        "--version", action="version", version=f"hubroute {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_net = sub.add_parser("net", help="generate or validate network files")
    net_sub = p_net.add_subparsers(dest="subcommand", required=True)

    p_gen = net_sub.add_parser("gen", help="generate a synthetic network")
    p_gen.add_argument("--hubs", type=int, required=True, help="number of hubs")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--k", type=int, default=3, help="nearest neighbors per hub")
    p_gen.add_argument("--terminals", type=int, default=2)
    p_gen.add_argument("--speed-mph", type=float, default=DEFAULT_SPEED_MPH)
    p_gen.add_argument(
        "--bbox", type=float, nargs=4,
        metavar=("LAT_MIN", "LAT_MAX", "LON_MIN", "LON_MAX"),
        default=list(DEFAULT_BOUNDING_BOX),
    )
    p_gen.add_argument("-o", "--out", default="network.json")
    p_gen.set_defaults(func=cmd_net_gen)

    p_val = net_sub.add_parser("validate", help="check a network file")
    p_val.add_argument("--network", required=True)
    p_val.set_defaults(func=cmd_net_validate)

    p_route = sub.add_parser("route", help="one-shot routing queries")
    route_sub = p_route.add_subparsers(dest="subcommand", required=True)

    p_sp = route_sub.add_parser("sp", help="shortest travel-time path")
    _add_route_args(p_sp)
    p_sp.set_defaults(func=cmd_route_sp)

    p_disc = route_sub.add_parser("discover", help="candidate-area discovery")
    _add_route_args(p_disc)
    p_disc.add_argument(
        "--budget", type=float, required=True, help="remaining hours until deadline"
    )
    p_disc.add_argument("--half-width", type=float, default=50.0)
    p_disc.add_argument("--handling", type=float, default=DEFAULT_HANDLING_H)
    p_disc.set_defaults(func=cmd_route_discover)

    p_sim = sub.add_parser("sim", help="run or compare simulation scenarios")
    sim_sub = p_sim.add_subparsers(dest="subcommand", required=True)

    p_run = sim_sub.add_parser("run", help="run one scenario in one mode")
    _add_sim_args(p_run)
    p_run.add_argument("--mode", choices=(MODE_BASELINE, MODE_DIRECTIONAL))
    p_run.set_defaults(func=cmd_sim_run)

    p_cmp = sim_sub.add_parser(
        "compare", help="run both modes on identical shipments"
    )
    _add_sim_args(p_cmp)
    p_cmp.set_defaults(func=cmd_sim_compare)

    return parser


def _add_route_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", required=True)
    p.add_argument("--from", dest="origin", required=True, metavar="HUB")
    p.add_argument("--to", dest="destination", required=True, metavar="HUB")
    p.add_argument("--geojson", help="write the result as a GeoJSON file")
    p.add_argument("--figure", help="render the result to an image file")


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", required=True)
    p.add_argument("--config", help="scenario config file (JSON)")
    p.add_argument("--out-dir", default="hubroute-out")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    # Scenario fields; flags override config-file values which override defaults.
    p.add_argument("--shipments", dest="shipment_count", type=int)
    p.add_argument("--seed", dest="seed", type=int)
    p.add_argument("--window", dest="generation_window_h", type=float)
    p.add_argument("--half-width", dest="half_width_deg", type=float)
    p.add_argument("--capacity", dest="truck_capacity", type=int)
    p.add_argument("--call-delay", dest="truck_call_delay_h", type=float)
    p.add_argument("--load-base", dest="load_time_base_h", type=float)
    p.add_argument("--load-per-shipment", dest="load_time_per_shipment_h", type=float)
    p.add_argument("--handling", dest="handling_charge_h", type=float)
    p.add_argument("--wait-threshold", dest="wait_threshold_h", type=float)
    p.add_argument("--urgency-slack", dest="urgency_slack_h", type=float)
    p.add_argument("--w-time", dest="w_time", type=float)
    p.add_argument("--w-consolidation", dest="w_consolidation", type=float)


# -- net ---------------------------------------------------------------------


def cmd_net_gen(args) -> int:
    net = generate_network(
        args.hubs,
        args.seed,
        k_nearest=args.k,
        bounding_box=tuple(args.bbox),
        speed_mph=args.speed_mph,
        terminal_count=args.terminals,
    )
    text = emit(net)
    out = FsPath(args.out)
    out.write_text(text, encoding="utf-8")
    manifest = build_manifest(
        "net gen",
        args.seed,
        config={
            "hubs": args.hubs,
            "k_nearest": args.k,
            "terminal_count": args.terminals,
            "speed_mph": args.speed_mph,
            "bounding_box": list(args.bbox),
        },
        network_path=str(out),
        network_digest=sha256_text(text),
        outputs={"network": str(out)},
    )
    _write(out.with_suffix(out.suffix + ".manifest.json"), manifest_json(manifest))
    terminals = ", ".join(net.terminals())
    print(
        f"wrote {out}: {len(net.hubs)} hubs, {len(net.arcs)} arcs, "
        f"terminals {terminals}"
    )
    return EXIT_OK


def cmd_net_validate(args) -> int:
    try:
        text = FsPath(args.network).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read network file {args.network}: {exc}") from exc
    problems = validate_document(text)
    if problems:
        for problem in problems:
            print(f"hubroute: error[validation]: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    net = load_network_file(args.network)
    print(
        f"OK: {args.network} is a valid network "
        f"({len(net.hubs)} hubs, {len(net.arcs)} arcs)"
    )
    return EXIT_OK


# -- route --------------------------------------------------------------------


def cmd_route_sp(args) -> int:
    net = load_network_file(args.network)
    path = shortest_path(net, args.origin, args.destination)
    print(f"Shortest path {args.origin} -> {args.destination}")
    print(f"  hubs: {' -> '.join(path.hubs)}")
    print(f"  total time: {path.total_time_h:.2f} h")
    print(f"  total distance: {path.total_distance_mi:.1f} mi")
    outputs: dict[str, str] = {}
    if args.geojson:
        write_geojson(path_to_geojson(net, path), args.geojson)
        outputs["geojson"] = args.geojson
        print(f"wrote {args.geojson}")
    if args.figure:
        figures.save_figure(figures.figure_route(net, path), args.figure)
        outputs["figure"] = args.figure
        print(f"wrote {args.figure}")
    if outputs:
        _write_route_manifest(
            "route sp",
            args,
            {"from": args.origin, "to": args.destination},
            outputs,
        )
    return EXIT_OK


def cmd_route_discover(args) -> int:
    net = load_network_file(args.network)
    params = SectorParams(args.half_width)
    table = min_time_table(net, args.destination)
    outcome = discover_candidates(
        net, table, args.origin, args.destination,
        args.budget, params, args.handling,
    )
    if isinstance(outcome, Infeasible):
        print(
            f"INFEASIBLE: {args.origin} -> {args.destination} cannot meet a "
            f"{args.budget:g} h budget"
        )
        print(f"  shortfall: {outcome.shortfall_h:.2f} h")
        print(f"  recommended lead-time extension: {outcome.recommended_extension_h:g} h")
        if args.geojson or args.figure:
            print("no candidate set; skipping GeoJSON/figure export")
        return EXIT_OK
    fallback = "yes" if outcome.fallback_used else "no"
    print(
        f"Candidate discovery {args.origin} -> {args.destination} "
        f"(budget {args.budget:g} h, sector ±{args.half_width:g}°)"
    )
    print(f"  anchor: {outcome.anchor_deg:.1f}°  fallback: {fallback}")
    print(f"  next hops: {', '.join(outcome.next_hops)}")
    print(f"  members ({len(outcome.members)}):")
    print(f"    {'hub':<8} {'from_current_h':>14} {'to_dest_h':>10}")
    for hub_id, times in outcome.members.items():
        print(
            f"    {hub_id:<8} {times.min_time_from_current_h:>14.2f} "
            f"{times.min_time_to_dest_h:>10.2f}"
        )
    print(f"  node expansions: {outcome.expansions}")
    outputs: dict[str, str] = {}
    if args.geojson:
        write_geojson(candidates_to_geojson(net, outcome, params), args.geojson)
        outputs["geojson"] = args.geojson
        print(f"wrote {args.geojson}")
    if args.figure:
        figures.save_figure(figures.figure_candidate_area(net, outcome), args.figure)
        outputs["figure"] = args.figure
        print(f"wrote {args.figure}")
    if outputs:
        _write_route_manifest(
            "route discover",
            args,
            {
                "from": args.origin,
                "to": args.destination,
                "budget_h": args.budget,
                "half_width_deg": args.half_width,
                "handling_charge_h": args.handling,
            },
            outputs,
        )
    return EXIT_OK


# -- sim ----------------------------------------------------------------------


def _resolve_config(args, *, mode: str | None) -> ScenarioConfig:
    merged: dict = {}
    if args.config:
        try:
            loaded = json.loads(FsPath(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(ScenarioConfig)}
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        merged.update(loaded)
    for f in fields(ScenarioConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            merged[f.name] = value
    if mode is not None:
        merged["mode"] = mode
    if "shipment_count" not in merged:
        raise ConfigError("shipment_count is required (--shipments or config file)")
    try:
        return ScenarioConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sim_run(args) -> int:
    net = load_network_file(args.network)
    cfg = _resolve_config(args, mode=args.mode)
    shipments = generate_shipments(net, cfg)
    result = run_simulation(net, shipments, cfg)

    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: dict[str, str] = {}
    shipments_text = shipments_to_json(shipments)
    outputs["shipments"] = _write(out_dir / "shipments.json", shipments_text)
    outputs["events"] = _write(
        out_dir / "events.ndjson", "\n".join(event_log_lines(result.events)) + "\n"
    )
    kpi_text = render_kpi_report(result.kpis)
    outputs["report"] = _write(out_dir / "kpis.txt", kpi_text)
    outputs["report_json"] = _write(
        out_dir / "kpis.json",
        json.dumps(kpi_to_dict(result.kpis), indent=2, sort_keys=True) + "\n",
    )
    if not args.no_figures:
        fig_path = out_dir / "truck_flows.png"
        figures.save_figure(
            figures.figure_truck_flows(net, result.trips, f"Truck flows ({cfg.mode})"),
            fig_path,
        )
        outputs["truck_flows_figure"] = str(fig_path)
    manifest = build_manifest(
        "sim run",
        cfg.seed,
        network_path=args.network,
        network_digest=sha256_file(args.network),
        config=_config_dict(cfg),
        shipments_digest=sha256_text(shipments_text),
        outputs=outputs,
    )
    _write(out_dir / "manifest.json", manifest_json(manifest))
    print(kpi_text, end="")
    print(f"outputs in {out_dir}")
    return EXIT_OK


def cmd_sim_compare(args) -> int:
    net = load_network_file(args.network)
    cfg = _resolve_config(args, mode=MODE_DIRECTIONAL)
    shipments = generate_shipments(net, cfg)

    result_b = run_simulation(net, shipments, cfg.with_mode(MODE_BASELINE))
    result_d = run_simulation(net, shipments, cfg.with_mode(MODE_DIRECTIONAL))
    comp = compare_runs(result_b.kpis, result_d.kpis)

    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: dict[str, str] = {}
    shipments_text = shipments_to_json(shipments)
    outputs["shipments"] = _write(out_dir / "shipments.json", shipments_text)
    outputs["events_baseline"] = _write(
        out_dir / "events_baseline.ndjson",
        "\n".join(event_log_lines(result_b.events)) + "\n",
    )
    outputs["events_directional"] = _write(
        out_dir / "events_directional.ndjson",
        "\n".join(event_log_lines(result_d.events)) + "\n",
    )
    report_text = render_comparison_report(comp, cfg)
    outputs["report"] = _write(out_dir / "comparison.txt", report_text)
    outputs["report_json"] = _write(
        out_dir / "comparison.json",
        json.dumps(comparison_to_dict(comp), indent=2, sort_keys=True) + "\n",
    )
    if not args.no_figures:
        kpi_fig = out_dir / "kpi_comparison.png"
        figures.save_figure(figures.figure_kpi_comparison(comp), kpi_fig)
        outputs["kpi_figure"] = str(kpi_fig)
        for label, result in (("baseline", result_b), ("directional", result_d)):
            fig_path = out_dir / f"truck_flows_{label}.png"
            figures.save_figure(
                figures.figure_truck_flows(net, result.trips, f"Truck flows ({label})"),
                fig_path,
            )
            outputs[f"truck_flows_{label}"] = str(fig_path)
    manifest = build_manifest(
        "sim compare",
        cfg.seed,
        network_path=args.network,
        network_digest=sha256_file(args.network),
        config=_config_dict(cfg.with_mode(MODE_DIRECTIONAL)),
        shipments_digest=sha256_text(shipments_text),
        outputs=outputs,
    )
    _write(out_dir / "manifest.json", manifest_json(manifest))
    print(report_text, end="")
    print(f"outputs in {out_dir}")
    return EXIT_OK


def _write_route_manifest(command: str, args, query: dict, outputs: dict) -> None:
    manifest = build_manifest(
        command,
        seed=None,
        network_path=args.network,
        network_digest=sha256_file(args.network),
        config=query,
        outputs=outputs,
    )
    first = FsPath(next(iter(outputs.values())))
    _write(first.with_suffix(first.suffix + ".manifest.json"), manifest_json(manifest))


def _config_dict(cfg: ScenarioConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def _write(path: FsPath, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"hubroute: error[usage]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StallDetected as exc:
        print(f"hubroute: error[internal]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except HubRouteError as exc:
        print(f"hubroute: error[validation]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
