"""Deterministic discrete-event simulation of the consolidation protocol.

Shipments enter the network over a generation window, queue at hubs, and are
grouped by chosen next hop. A truck is called for a group when it fills a
truck, when its oldest member has waited past the threshold, or when any
member's remaining slack runs low. Trucks are created on demand: call delay,
load time growing with shipment count, then the arc travel time.

Routing is per-mode. Baseline shipments follow their precomputed shortest
travel-time path. Directional shipments rerun candidate discovery at every
hub arrival against their live remaining budget and pick a hop via the
scoring policy; when discovery reports the deadline unreachable, the event
is logged, the deadline is extended by the recommended amount, and discovery
retries once.

Randomness is confined to shipment generation. The event loop itself is
RNG-free and replays byte-identically for identical inputs.
"""

from __future__ import annotations

import copy
import hashlib
import heapq
import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields, replace

from .discovery import CandidateSet, Infeasible, discover_candidates
from .errors import ConfigError, MismatchedScenarios, StallDetected
from .geo import SectorParams
from .network import Network, emit
from .pathfinding import MinTimeTable, Path, min_time_table, shortest_path
from .policy import NextHopDecision, PolicyWeights, baseline_next_hop, directional_next_hop

SERVICE_DEADLINE_H = {1: 24.0, 2: 48.0, 3: 72.0}

MODE_BASELINE = "baseline"
MODE_DIRECTIONAL = "directional"

EV_SHIPMENT_CREATED = "ShipmentCreated"
EV_SHIPMENT_ARRIVED = "ShipmentArrivedAtHub"
EV_TRUCK_CALLED = "TruckCalled"
EV_TRUCK_READY = "TruckReadyToLoad"
EV_TRUCK_DEPARTED = "TruckDeparted"
EV_TRUCK_ARRIVED = "TruckArrived"
EV_SHIPMENT_DELIVERED = "ShipmentDelivered"
EV_INFEASIBLE_LOGGED = "InfeasibleRouteLogged"

# Internal timer event; never written to the event log.
_EV_CHECK = "_DispatchCheck"

# Trigger comparisons tolerate float cancellation: a check scheduled at
# enqueue + W computes a wait of W plus/minus a few ulps at its own instant.
TRIGGER_EPS_H = 1e-9


@dataclass
class Shipment:
    id: str
    origin: str
    destination: str
    service_level: int
    created_at: float
    deadline: float
    original_deadline: float
    status: str = "queued"  # queued | in_transit | delivered | infeasible
    location: str | None = None
    hop_history: list[tuple[str, float]] = field(default_factory=list)
    extended: bool = False
    delivered_at: float | None = None


@dataclass
class QueueEntry:
    shipment: Shipment
    enqueue_time: float  # dispatchable from this instant (post handling)
    chosen_next_hop: str
    min_remaining_h: float  # best continuation time from this hub
    candidate_set: CandidateSet | None = None
    path: Path | None = None
    decision: NextHopDecision | None = None

    @property
    def shipment_id(self) -> str:
        return self.shipment.id

    @property
    def planned_next_hops(self) -> tuple[str, ...]:
        if self.candidate_set is not None:
            return self.candidate_set.next_hops
        return (self.chosen_next_hop,)


@dataclass
class HubQueue:
    hub: str
    entries: list[QueueEntry] = field(default_factory=list)


@dataclass(frozen=True)
class DispatchCall:
    """A truck to be called: the group's hub pair and its cargo."""

    from_hub: str
    to_hub: str
    shipment_ids: tuple[str, ...]


@dataclass(frozen=True)
class TruckTrip:
    id: str
    from_hub: str
    to_hub: str
    shipment_ids: tuple[str, ...]
    called_at: float
    arrived_for_loading_at: float
    departed_at: float
    arrived_at: float
    miles: float


@dataclass(frozen=True)
class Event:
    time: float
    sequence: int
    kind: str
    payload: dict


@dataclass(frozen=True)
class ScenarioConfig:
    shipment_count: int
    mode: str = MODE_DIRECTIONAL
    seed: int = 0
    generation_window_h: float = 12.0
    half_width_deg: float = 50.0
    truck_capacity: int = 20
    truck_call_delay_h: float = 1.0
    load_time_base_h: float = 0.25
    load_time_per_shipment_h: float = 0.05
    handling_charge_h: float = 0.5
    wait_threshold_h: float = 4.0
    urgency_slack_h: float = 1.0
    w_time: float = 1.0
    w_consolidation: float = 0.5

    def __post_init__(self) -> None:
        if self.shipment_count < 0:
            raise ConfigError(f"shipment_count must be >= 0, got {self.shipment_count}")
        if self.mode not in (MODE_BASELINE, MODE_DIRECTIONAL):
            raise ConfigError(f"mode must be baseline or directional, got {self.mode!r}")
        if self.truck_capacity < 1:
            raise ConfigError(f"truck_capacity must be >= 1, got {self.truck_capacity}")
        if not 0.0 < self.half_width_deg <= 180.0:
            raise ConfigError(
                f"half_width_deg must be in (0, 180], got {self.half_width_deg}"
            )
        for name in (
            "generation_window_h",
            "truck_call_delay_h",
            "load_time_base_h",
            "load_time_per_shipment_h",
            "handling_charge_h",
            "wait_threshold_h",
            "urgency_slack_h",
        ):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        PolicyWeights(self.w_time, self.w_consolidation)  # validates weights

    def with_mode(self, mode: str) -> "ScenarioConfig":
        return replace(self, mode=mode)


@dataclass(frozen=True)
class KpiReport:
    mode: str
    shipment_count: int
    delivered: int
    undelivered: int
    infeasible: int
    delivered_on_time_pct: float
    trucks_dispatched: int
    total_miles: float
    mean_lateness_h: float
    max_lateness_h: float
    scenario_digest: str = ""


@dataclass(frozen=True)
class ComparisonReport:
    baseline: KpiReport
    directional: KpiReport
    delta_trucks_pct: float
    delta_miles_pct: float


@dataclass
class SimulationResult:
    kpis: KpiReport
    events: list[Event]
    trips: list[TruckTrip]
    shipments: list[Shipment]


def generate_shipments(net: Network, cfg: ScenarioConfig) -> list[Shipment]:
    """Draw shipments per the scenario: uniform origins over non-terminal
    hubs, destinations over terminals, service levels over {1,2,3}, creation
    times over the generation window. Sorted by creation time; deterministic
    for a fixed seed."""
    terminals = net.terminals()
    non_terminals = net.non_terminals()
    if not terminals:
        raise ConfigError("network has no destination terminals")
    if len(non_terminals) < 2:
        raise ConfigError("network needs at least 2 non-terminal hubs")
    rng = random.Random(cfg.seed)
    draws = []
    for _ in range(cfg.shipment_count):
        origin = rng.choice(non_terminals)
        destination = rng.choice(terminals)
        level = rng.choice((1, 2, 3))
        created = rng.uniform(0.0, cfg.generation_window_h)
        draws.append((created, origin, destination, level))
    draws.sort(key=lambda d: d[0])  # stable: equal times keep draw order
    shipments = []
    for i, (created, origin, destination, level) in enumerate(draws):
        deadline = created + SERVICE_DEADLINE_H[level]
        shipments.append(
            Shipment(
                id=f"S{i + 1:05d}",
                origin=origin,
                destination=destination,
                service_level=level,
                created_at=created,
                deadline=deadline,
                original_deadline=deadline,
            )
        )
    return shipments


def shipments_to_json(shipments: list[Shipment]) -> str:
    records = [
        {
            "id": s.id,
            "origin": s.origin,
            "destination": s.destination,
            "service_level": s.service_level,
            "created_at": s.created_at,
            "deadline": s.original_deadline,
        }
        for s in shipments
    ]
    return json.dumps(records, indent=2, sort_keys=True) + "\n"


def try_dispatch(
    queue: HubQueue, now: float, cfg: ScenarioConfig, decisions: dict[str, str]
) -> list[DispatchCall]:
    """Evaluate the dispatch triggers at one hub.

    Ready entries group by their decided next hop; a group calls a truck when
    it reaches capacity, when its oldest member has waited at least the
    threshold, or when any member's slack (deadline minus now minus handling
    minus best continuation time) is at or below the urgency slack. A truck
    takes up to capacity shipments in enqueue order; a group larger than
    capacity can call several trucks in one evaluation.
    """
    ready = [e for e in queue.entries if e.enqueue_time <= now]
    groups: dict[str, list[QueueEntry]] = defaultdict(list)
    for entry in ready:
        groups[decisions[entry.shipment_id]].append(entry)

    calls: list[DispatchCall] = []
    for hop in sorted(groups):
        group = groups[hop]
        while group:
            full = len(group) >= cfg.truck_capacity
            waited = (
                now - group[0].enqueue_time
                >= cfg.wait_threshold_h - TRIGGER_EPS_H
            )
            # Urgency rescues shipments that can still make their original
            # deadline; one that is already past rescue (negative slack or a
            # granted lead-time extension, which counts as late regardless)
            # gains nothing from a hurried, often underfilled truck and
            # consolidates normally instead.
            urgent = any(
                not e.shipment.extended
                and -TRIGGER_EPS_H
                <= e.shipment.deadline - now - cfg.handling_charge_h - e.min_remaining_h
                <= cfg.urgency_slack_h + TRIGGER_EPS_H
                for e in group
            )
            if not (full or waited or urgent):
                break
            take = group[: cfg.truck_capacity]
            group = group[cfg.truck_capacity:]
            calls.append(
                DispatchCall(queue.hub, hop, tuple(e.shipment_id for e in take))
            )
    return calls


class _Engine:
    """Single-run event loop. One instance per simulation; single-threaded."""

    def __init__(self, net: Network, shipments: list[Shipment], cfg: ScenarioConfig):
        self.net = net
        self.cfg = cfg
        self.shipments = {s.id: s for s in shipments}
        self.queues = {hub: HubQueue(hub) for hub in net.hubs}
        self.weights = PolicyWeights(cfg.w_time, cfg.w_consolidation)
        self.sector = SectorParams(cfg.half_width_deg)
        self._tables: dict[str, MinTimeTable] = {}
        self._paths: dict[tuple[str, str], Path] = {}
        self.baseline_paths: dict[str, Path] = {}
        self.events: list[Event] = []
        self.trips: list[TruckTrip] = []
        self._trip_by_id: dict[str, TruckTrip] = {}
        self._heap: list[tuple[float, int, str, dict]] = []
        self._push_seq = 0
        self._log_seq = 0
        self._truck_seq = 0
        # Guard against routing livelock; normal runs use a small fraction.
        self._event_budget = 10_000 + 500 * len(shipments)

    # -- plumbing ----------------------------------------------------------

    def _push(self, time: float, kind: str, payload: dict) -> None:
        heapq.heappush(self._heap, (time, self._push_seq, kind, payload))
        self._push_seq += 1

    def _log(self, time: float, kind: str, payload: dict) -> None:
        self.events.append(Event(time, self._log_seq, kind, payload))
        self._log_seq += 1

    def _table(self, destination: str) -> MinTimeTable:
        if destination not in self._tables:
            self._tables[destination] = min_time_table(self.net, destination)
        return self._tables[destination]

    def _shortest_path(self, origin: str, destination: str) -> Path:
        key = (origin, destination)
        if key not in self._paths:
            self._paths[key] = shortest_path(self.net, origin, destination)
        return self._paths[key]

    # -- run ---------------------------------------------------------------

    def run(self) -> None:
        for shipment in self.shipments.values():
            self._push(shipment.created_at, EV_SHIPMENT_CREATED, {"shipment": shipment.id})
        handlers = {
            EV_SHIPMENT_CREATED: self._on_created,
            EV_SHIPMENT_ARRIVED: self._on_arrived,
            EV_SHIPMENT_DELIVERED: self._on_delivered,
            EV_TRUCK_READY: self._on_truck_ready,
            EV_TRUCK_DEPARTED: self._on_truck_departed,
            EV_TRUCK_ARRIVED: self._on_truck_arrived,
            _EV_CHECK: self._on_check,
        }
        processed = 0
        while self._heap:
            time, _seq, kind, payload = heapq.heappop(self._heap)
            processed += 1
            if processed > self._event_budget:
                raise StallDetected(
                    "event budget exceeded; routing appears to be livelocked"
                )
            handlers[kind](time, payload)
        leftovers = [
            s.id
            for s in self.shipments.values()
            if s.status not in ("delivered", "infeasible")
        ]
        if leftovers:
            raise StallDetected(
                f"event queue drained with shipments unaccounted for: "
                f"{', '.join(sorted(leftovers)[:5])}"
            )

    # -- shipment events ----------------------------------------------------

    def _on_created(self, time: float, payload: dict) -> None:
        shipment = self.shipments[payload["shipment"]]
        shipment.hop_history.append((shipment.origin, time))
        shipment.location = shipment.origin
        record = {
            "shipment": shipment.id,
            "hub": shipment.origin,
            "destination": shipment.destination,
            "service_level": shipment.service_level,
            "deadline_h": shipment.deadline,
        }
        # No handling at the origin: dispatchable immediately.
        self._route_and_enqueue(
            shipment, shipment.origin, time, time, EV_SHIPMENT_CREATED, record
        )

    def _on_arrived(self, time: float, payload: dict) -> None:
        shipment = self.shipments[payload["shipment"]]
        hub = payload["hub"]
        shipment.location = hub
        shipment.status = "queued"
        shipment.hop_history.append((hub, time))
        ready = time + self.cfg.handling_charge_h
        record = {"shipment": shipment.id, "hub": hub, "ready_h": ready}
        self._route_and_enqueue(shipment, hub, time, ready, EV_SHIPMENT_ARRIVED, record)

    def _on_delivered(self, time: float, payload: dict) -> None:
        shipment = self.shipments[payload["shipment"]]
        hub = payload["hub"]
        shipment.hop_history.append((hub, time))
        shipment.location = hub
        shipment.status = "delivered"
        shipment.delivered_at = time
        lateness = max(0.0, time - shipment.original_deadline)
        self._log(
            time,
            EV_SHIPMENT_DELIVERED,
            {
                "shipment": shipment.id,
                "hub": hub,
                "on_time": time <= shipment.original_deadline,
                "lateness_h": lateness,
                "deadline_h": shipment.original_deadline,
            },
        )

    # -- routing ------------------------------------------------------------

    def _route_and_enqueue(
        self,
        shipment: Shipment,
        hub: str,
        now: float,
        ready: float,
        kind: str,
        record: dict,
    ) -> None:
        """Decide the next hop at a hub, log the arrival/creation event with
        the decision in its payload, enqueue the shipment, schedule its
        trigger checks, and run a dispatch evaluation at the hub."""
        side_logs: list[dict] = []
        if self.cfg.mode == MODE_BASELINE:
            entry = self._route_baseline(shipment, hub, ready, record)
        else:
            entry = self._route_directional(shipment, hub, ready, record, side_logs)
        self._log(now, kind, record)
        for payload in side_logs:
            self._log(now, EV_INFEASIBLE_LOGGED, payload)
        if entry is not None:  # None: abandoned as infeasible
            self.queues[hub].entries.append(entry)
            self._schedule_checks(entry, hub, now)
        self._evaluate_hub(hub, now)

    def _route_baseline(
        self, shipment: Shipment, hub: str, ready: float, record: dict
    ) -> QueueEntry:
        path = self.baseline_paths.get(shipment.id)
        if path is None:
            path = self._shortest_path(shipment.origin, shipment.destination)
            self.baseline_paths[shipment.id] = path
            record["path"] = list(path.hubs)
        next_hop = baseline_next_hop(path, hub)
        record["routing"] = {"mode": MODE_BASELINE, "chosen": next_hop}
        remaining = self._table(shipment.destination).get(hub)
        return QueueEntry(
            shipment=shipment,
            enqueue_time=ready,
            chosen_next_hop=next_hop,
            min_remaining_h=remaining if remaining is not None else math.inf,
            path=path,
        )

    def _route_directional(
        self,
        shipment: Shipment,
        hub: str,
        ready: float,
        record: dict,
        side_logs: list[dict],
    ) -> QueueEntry | None:
        table = self._table(shipment.destination)
        raw_budget = shipment.deadline - ready
        budget = max(0.0, raw_budget)
        outcome = discover_candidates(
            self.net,
            table,
            hub,
            shipment.destination,
            budget,
            self.sector,
            self.cfg.handling_charge_h,
        )
        extended_by = 0.0
        if isinstance(outcome, Infeasible):
            # When the deadline has already passed, the extension must also
            # cover the elapsed overshoot, not just the reported shortfall.
            extension = outcome.recommended_extension_h
            if raw_budget < 0:
                extension += math.ceil(-raw_budget)
            side_logs.append(
                self._infeasible_payload(shipment, hub, outcome, extension, attempt=1)
            )
            shipment.deadline += extension
            shipment.extended = True
            extended_by = extension
            budget = max(0.0, shipment.deadline - ready)
            outcome = discover_candidates(
                self.net,
                table,
                hub,
                shipment.destination,
                budget,
                self.sector,
                self.cfg.handling_charge_h,
            )
            if isinstance(outcome, Infeasible):
                # The granted extension covers the shortfall, so a second
                # failure means no amount of time helps; abandon.
                side_logs.append(
                    self._infeasible_payload(
                        shipment, hub, outcome, outcome.recommended_extension_h, attempt=2
                    )
                )
                shipment.status = "infeasible"
                record["routing"] = {"mode": MODE_DIRECTIONAL, "abandoned": True}
                return None

        decision = directional_next_hop(
            outcome, table, self.queues[hub], shipment, self.weights
        )
        routing = {
            "mode": MODE_DIRECTIONAL,
            "budget_h": budget,
            "anchor_deg": outcome.anchor_deg,
            "fallback_used": outcome.fallback_used,
            "expansions": outcome.expansions,
            "next_hops": list(outcome.next_hops),
            "chosen": decision.chosen,
            "score_breakdown": {
                hop: {
                    "time_score": parts.time_score,
                    "consolidation_score": parts.consolidation_score,
                    "total": parts.total,
                }
                for hop, parts in decision.score_breakdown.items()
            },
        }
        if extended_by:
            routing["extended_by_h"] = extended_by
        record["routing"] = routing
        remaining = table.get(hub)
        return QueueEntry(
            shipment=shipment,
            enqueue_time=ready,
            chosen_next_hop=decision.chosen,
            min_remaining_h=remaining if remaining is not None else math.inf,
            candidate_set=outcome,
            decision=decision,
        )

    @staticmethod
    def _infeasible_payload(
        shipment: Shipment, hub: str, verdict: Infeasible, granted: float, attempt: int
    ) -> dict:
        return {
            "shipment": shipment.id,
            "hub": hub,
            "attempt": attempt,
            "shortfall_h": verdict.shortfall_h,
            "recommended_extension_h": verdict.recommended_extension_h,
            "granted_extension_h": granted if attempt == 1 else 0.0,
            "abandoned": attempt > 1,
        }

    def _schedule_checks(self, entry: QueueEntry, hub: str, now: float) -> None:
        cfg = self.cfg
        check = {"hub": hub}
        if entry.enqueue_time > now:
            self._push(entry.enqueue_time, _EV_CHECK, check)
        self._push(entry.enqueue_time + cfg.wait_threshold_h, _EV_CHECK, check)
        urgency_at = (
            entry.shipment.deadline
            - cfg.handling_charge_h
            - entry.min_remaining_h
            - cfg.urgency_slack_h
        )
        if urgency_at > entry.enqueue_time and not entry.shipment.extended:
            self._push(urgency_at, _EV_CHECK, check)

    # -- dispatch and trucks --------------------------------------------------

    def _on_check(self, time: float, payload: dict) -> None:
        self._evaluate_hub(payload["hub"], time)

    def _evaluate_hub(self, hub: str, now: float) -> None:
        queue = self.queues[hub]
        if not queue.entries:
            return
        if self.cfg.mode == MODE_DIRECTIONAL:
            self._rescore_queue(queue)
        decisions = {e.shipment_id: e.chosen_next_hop for e in queue.entries}
        calls = try_dispatch(queue, now, self.cfg, decisions)
        for call in calls:
            self._call_truck(call, now)

    def _rescore_queue(self, queue: HubQueue) -> None:
        """Refresh next-hop choices against the live queue before grouping.

        Candidate sets stay cached from each shipment's hub arrival; only the
        consolidation affinities move as shipments join and leave the queue.
        Equivalent to rerunning the scoring policy per entry, but shares one
        inclusion count across the queue."""
        entries = queue.entries
        others = len(entries) - 1
        if others < 1:
            return
        inclusion = Counter()
        for entry in entries:
            for hop in entry.planned_next_hops:
                inclusion[hop] += 1
        w_time, w_cons = self.weights.w_time, self.weights.w_consolidation
        for entry in entries:
            cs = entry.candidate_set
            if cs is None or len(cs.next_hops) < 2:
                continue
            via = {
                hop: cs.members[hop].min_time_from_current_h
                + cs.members[hop].min_time_to_dest_h
                for hop in cs.next_hops
            }
            best_via = min(via.values())
            best: tuple[float, str] | None = None
            for hop in cs.next_hops:
                t_score = via[hop] / best_via if best_via > 0 else 1.0
                c_score = (inclusion[hop] - 1) / others
                total = w_time * t_score - w_cons * c_score
                if best is None or (total, hop) < best:
                    best = (total, hop)
            entry.chosen_next_hop = best[1]

    def _call_truck(self, call: DispatchCall, now: float) -> None:
        cfg = self.cfg
        self._truck_seq += 1
        truck_id = f"T{self._truck_seq:05d}"
        count = len(call.shipment_ids)
        ready = now + cfg.truck_call_delay_h
        depart = ready + cfg.load_time_base_h + cfg.load_time_per_shipment_h * count
        arc = self.net.arcs[(call.from_hub, call.to_hub)]
        arrive = depart + arc.travel_time_h
        trip = TruckTrip(
            id=truck_id,
            from_hub=call.from_hub,
            to_hub=call.to_hub,
            shipment_ids=call.shipment_ids,
            called_at=now,
            arrived_for_loading_at=ready,
            departed_at=depart,
            arrived_at=arrive,
            miles=arc.distance_mi,
        )
        self.trips.append(trip)
        self._trip_by_id[truck_id] = trip

        taken = set(call.shipment_ids)
        queue = self.queues[call.from_hub]
        queue.entries = [e for e in queue.entries if e.shipment_id not in taken]
        for sid in call.shipment_ids:
            shipment = self.shipments[sid]
            shipment.status = "in_transit"
            shipment.location = None

        self._log(
            now,
            EV_TRUCK_CALLED,
            {
                "truck": truck_id,
                "from": call.from_hub,
                "to": call.to_hub,
                "shipments": list(call.shipment_ids),
                "count": count,
                "miles": arc.distance_mi,
                "ready_h": ready,
                "depart_h": depart,
                "arrive_h": arrive,
            },
        )
        self._push(ready, EV_TRUCK_READY, {"truck": truck_id})
        self._push(depart, EV_TRUCK_DEPARTED, {"truck": truck_id})
        self._push(arrive, EV_TRUCK_ARRIVED, {"truck": truck_id})

    def _on_truck_ready(self, time: float, payload: dict) -> None:
        trip = self._trip_by_id[payload["truck"]]
        self._log(time, EV_TRUCK_READY, {"truck": trip.id, "hub": trip.from_hub})
        self._evaluate_hub(trip.from_hub, time)

    def _on_truck_departed(self, time: float, payload: dict) -> None:
        trip = self._trip_by_id[payload["truck"]]
        self._log(
            time,
            EV_TRUCK_DEPARTED,
            {
                "truck": trip.id,
                "from": trip.from_hub,
                "to": trip.to_hub,
                "count": len(trip.shipment_ids),
            },
        )
        self._evaluate_hub(trip.from_hub, time)

    def _on_truck_arrived(self, time: float, payload: dict) -> None:
        trip = self._trip_by_id[payload["truck"]]
        self._log(
            time,
            EV_TRUCK_ARRIVED,
            {"truck": trip.id, "hub": trip.to_hub, "shipments": list(trip.shipment_ids)},
        )
        for sid in trip.shipment_ids:
            shipment = self.shipments[sid]
            if trip.to_hub == shipment.destination:
                self._push(
                    time, EV_SHIPMENT_DELIVERED, {"shipment": sid, "hub": trip.to_hub}
                )
            else:
                self._push(
                    time, EV_SHIPMENT_ARRIVED, {"shipment": sid, "hub": trip.to_hub}
                )
        self._evaluate_hub(trip.to_hub, time)


def run_simulation(
    net: Network, shipments: list[Shipment], cfg: ScenarioConfig
) -> SimulationResult:
    """Run one scenario to completion. The caller's shipment list is left
    untouched; the result carries the mutated copies."""
    digest = scenario_digest(net, shipments, cfg)
    working = copy.deepcopy(shipments)
    engine = _Engine(net, working, cfg)
    engine.run()
    kpis = compute_kpis(
        engine.events, engine.trips, working, mode=cfg.mode, scenario_digest=digest
    )
    return SimulationResult(
        kpis=kpis, events=engine.events, trips=engine.trips, shipments=working
    )


def compute_kpis(
    events: list[Event],
    trips: list[TruckTrip],
    shipments: list[Shipment],
    *,
    mode: str,
    scenario_digest: str = "",
) -> KpiReport:
    """Aggregate the headline KPIs from a completed run."""
    delivered = [s for s in shipments if s.status == "delivered"]
    infeasible = [s for s in shipments if s.status == "infeasible"]
    on_time = sum(1 for s in delivered if s.delivered_at <= s.original_deadline)
    lateness = [max(0.0, s.delivered_at - s.original_deadline) for s in delivered]
    total = len(shipments)
    return KpiReport(
        mode=mode,
        shipment_count=total,
        delivered=len(delivered),
        undelivered=total - len(delivered) - len(infeasible),
        infeasible=len(infeasible),
        delivered_on_time_pct=100.0 * on_time / total if total else 0.0,
        trucks_dispatched=len(trips),
        total_miles=sum(t.miles for t in trips),
        mean_lateness_h=sum(lateness) / len(lateness) if lateness else 0.0,
        max_lateness_h=max(lateness) if lateness else 0.0,
        scenario_digest=scenario_digest,
    )


def compare_runs(baseline: KpiReport, directional: KpiReport) -> ComparisonReport:
    """Relative truck and mileage deltas of directional vs baseline routing.

    Both reports must come from the same scenario (identical network,
    shipments, and protocol parameters; only the mode differs).
    """
    if baseline.mode != MODE_BASELINE or directional.mode != MODE_DIRECTIONAL:
        raise MismatchedScenarios(
            f"expected a baseline and a directional report, got "
            f"{baseline.mode!r} and {directional.mode!r}"
        )
    if (
        baseline.scenario_digest
        and directional.scenario_digest
        and baseline.scenario_digest != directional.scenario_digest
    ):
        raise MismatchedScenarios("reports come from different scenarios")
    return ComparisonReport(
        baseline=baseline,
        directional=directional,
        delta_trucks_pct=_delta_pct(baseline.trucks_dispatched, directional.trucks_dispatched),
        delta_miles_pct=_delta_pct(baseline.total_miles, directional.total_miles),
    )


def _delta_pct(base: float, new: float) -> float:
    if base == 0 and new == 0:
        return 0.0
    return (new - base) / base * 100.0


def scenario_digest(net: Network, shipments: list[Shipment], cfg: ScenarioConfig) -> str:
    """Content hash of everything two comparison runs must share."""
    shared = {
        f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name != "mode"
    }
    blob = json.dumps(shared, sort_keys=True) + emit(net) + shipments_to_json(shipments)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def event_to_record(event: Event) -> dict:
    return {
        "time": event.time,
        "sequence": event.sequence,
        "kind": event.kind,
        "payload": event.payload,
    }


def event_log_lines(events: list[Event]) -> list[str]:
    return [json.dumps(event_to_record(e), sort_keys=True) for e in events]


def write_event_log(events: list[Event], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in event_log_lines(events):
            fh.write(line + "\n")
