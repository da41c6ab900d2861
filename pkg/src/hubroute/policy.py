"""Next-hop selection policies.

Baseline mode walks the shipment's precomputed shortest path. Directional
mode scores the discovered next-hop candidates on normalized via-time minus
a consolidation affinity: the fraction of co-queued shipments whose own
candidate hops include the same hub. Lower total wins; ties go to the
smaller hub id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .discovery import CandidateSet
from .errors import AlreadyAtDestination, EmptyCandidates, NotOnPath
from .pathfinding import MinTimeTable, Path


@dataclass(frozen=True)
class PolicyWeights:
    w_time: float = 1.0
    w_consolidation: float = 0.5

    def __post_init__(self) -> None:
        if self.w_time < 0 or self.w_consolidation < 0:
            raise ValueError("policy weights must be non-negative")
        if self.w_time == 0 and self.w_consolidation == 0:
            raise ValueError("policy weights must not both be zero")


@dataclass(frozen=True)
class ScoreParts:
    time_score: float
    consolidation_score: float
    total: float


@dataclass(frozen=True)
class NextHopDecision:
    shipment_id: str
    chosen: str
    mode: str
    score_breakdown: dict[str, ScoreParts] = field(default_factory=dict)


def baseline_next_hop(path: Path, current: str) -> str:
    """The hub immediately after current on a precomputed path."""
    if current not in path.hubs:
        raise NotOnPath(f"hub {current!r} is not on path {list(path.hubs)}")
    idx = path.hubs.index(current)
    if idx == len(path.hubs) - 1:
        raise AlreadyAtDestination(f"{current!r} is the final hub of the path")
    return path.hubs[idx + 1]


def consolidation_score(queue, candidate: str, shipment) -> float:
    """Fraction of other queued shipments whose planned next hops include
    the candidate; 0.0 when the queue holds no other shipment.

    queue entries must expose shipment_id and planned_next_hops.
    """
    others = [e for e in queue.entries if e.shipment_id != shipment.id]
    if not others:
        return 0.0
    sharing = sum(1 for e in others if candidate in e.planned_next_hops)
    return sharing / len(others)


def directional_next_hop(
    cs: CandidateSet,
    table: MinTimeTable,
    queue,
    shipment,
    weights: PolicyWeights = PolicyWeights(),
) -> NextHopDecision:
    """Score the candidate next hops and pick the argmin total.

    time_score(n) = (time to n + best continuation from n), normalized so the
    fastest candidate scores 1.0; total = w_time * time_score minus
    w_consolidation * consolidation affinity.
    """
    if not cs.next_hops:
        raise EmptyCandidates(
            f"no next-hop candidates at {cs.origin!r} for shipment {shipment.id}"
        )
    via: dict[str, float] = {}
    for hop in cs.next_hops:
        remaining = table.get(hop)
        if remaining is None:
            raise ValueError(f"candidate {hop!r} missing from min-time table")
        via[hop] = cs.members[hop].min_time_from_current_h + remaining
    best_via = min(via.values())
    breakdown: dict[str, ScoreParts] = {}
    for hop in cs.next_hops:
        t_score = via[hop] / best_via if best_via > 0 else 1.0
        c_score = consolidation_score(queue, hop, shipment)
        total = weights.w_time * t_score - weights.w_consolidation * c_score
        breakdown[hop] = ScoreParts(t_score, c_score, total)
    chosen = min(cs.next_hops, key=lambda h: (breakdown[h].total, h))
    return NextHopDecision(
        shipment_id=shipment.id,
        chosen=chosen,
        mode="directional",
        score_breakdown=breakdown,
    )
