import json
import random

import pytest

from hubroute.discovery import (
    CandidateSet,
    Infeasible,
    compute_anchor_bearing,
    feasible_continuation,
    discover_candidates,
    sector_filter_neighbors,
)
from hubroute.errors import NoPath
from hubroute.geo import SectorParams, angular_deviation, initial_bearing
from hubroute.network import load_network
from hubroute.pathfinding import min_time_table, shortest_path
from oracles import make_geo_graph, oracle_discover, vec_bearing, vec_midpoint

WIDE = SectorParams(50.0)


def equatorial_chain():
    """A(0,0) -> B(0,5) -> C(0,10), 2 h per hop, all due east."""
    return load_network(json.dumps({
        "hubs": [
            {"id": "A", "name": "A", "lat": 0.0, "lon": 0.0},
            {"id": "B", "name": "B", "lat": 0.0, "lon": 5.0},
            {"id": "C", "name": "C", "lat": 0.0, "lon": 10.0},
        ],
        "edges": [
            {"from": "A", "to": "B", "travel_time_h": 2.0, "distance_mi": 100.0},
            {"from": "B", "to": "C", "travel_time_h": 2.0, "distance_mi": 100.0},
        ],
    }))


class TestComputeAnchorBearing:
    def test_adjacent_due_east(self):
        net = equatorial_chain()
        info = compute_anchor_bearing(net, "B", "C")
        assert info.first_sp_hub == "C"
        assert info.anchor_deg == pytest.approx(90.0, abs=1e-9)

    def test_collinear_chain_midpoint(self):
        net = equatorial_chain()
        info = compute_anchor_bearing(net, "A", "C")
        assert info.first_sp_hub == "B"
        # midpoint of B and C sits at (0, 7.5): still due east of A
        assert info.anchor_deg == pytest.approx(90.0, abs=1e-9)

    def test_five_hub_fixture_matches_geodesy_oracle(self, five_hub_net):
        info = compute_anchor_bearing(five_hub_net, "H1", "T1")
        assert info.first_sp_hub == "H2"
        h1 = five_hub_net.location("H1")
        mid = vec_midpoint(
            (five_hub_net.location("H2").lat, five_hub_net.location("H2").lon),
            (five_hub_net.location("T1").lat, five_hub_net.location("T1").lon),
        )
        want = vec_bearing((h1.lat, h1.lon), mid)
        assert angular_deviation(info.anchor_deg, want) <= 1.0

    def test_no_path_propagates(self):
        net = load_network(json.dumps({
            "hubs": [
                {"id": "A", "name": "A", "lat": 0.0, "lon": 0.0},
                {"id": "B", "name": "B", "lat": 0.0, "lon": 5.0},
                {"id": "C", "name": "C", "lat": 0.0, "lon": 10.0},
            ],
            "edges": [
                {"from": "A", "to": "B", "travel_time_h": 1.0, "distance_mi": 1.0,
                 "directed": True},
                {"from": "C", "to": "B", "travel_time_h": 1.0, "distance_mi": 1.0,
                 "directed": True},
            ],
        }))
        with pytest.raises(NoPath):
            compute_anchor_bearing(net, "A", "C")


class TestSectorFilterNeighbors:
    def test_keeps_forward_drops_backward(self, five_hub_net):
        anchor = compute_anchor_bearing(five_hub_net, "H1", "T1").anchor_deg
        kept = sector_filter_neighbors(five_hub_net, "H1", anchor, WIDE)
        assert kept == ["H2", "H3"]  # H4 points away from the terminal

    def test_no_neighbors(self):
        net = load_network(json.dumps({
            "hubs": [
                {"id": "A", "name": "A", "lat": 0.0, "lon": 0.0},
                {"id": "B", "name": "B", "lat": 0.0, "lon": 5.0},
            ],
            "edges": [
                {"from": "B", "to": "A", "travel_time_h": 1.0, "distance_mi": 1.0,
                 "directed": True},
            ],
        }))
        assert sector_filter_neighbors(net, "A", 90.0, WIDE) == []

    def test_boundary_rule_with_synthetic_bearings(self):
        # neighbors at bearings ~0, ~49, ~51, ~180 from the center hub
        net = load_network(json.dumps({
            "hubs": [
                {"id": "O", "name": "O", "lat": 0.0, "lon": 0.0},
                {"id": "N00", "name": "N00", "lat": 1.0, "lon": 0.0},
                {"id": "N49", "name": "N49", "lat": 0.65270965435, "lon": 0.75093750625},
                {"id": "N51", "name": "N51", "lat": 0.62932039105, "lon": 0.77719262265},
                {"id": "N180", "name": "N180", "lat": -1.0, "lon": 0.0},
            ],
            "edges": [
                {"from": "O", "to": "N00", "travel_time_h": 1.0, "distance_mi": 69.0},
                {"from": "O", "to": "N49", "travel_time_h": 1.0, "distance_mi": 69.0},
                {"from": "O", "to": "N51", "travel_time_h": 1.0, "distance_mi": 69.0},
                {"from": "O", "to": "N180", "travel_time_h": 1.0, "distance_mi": 69.0},
            ],
        }))
        kept = sector_filter_neighbors(net, "O", 0.0, WIDE)
        assert kept == ["N00", "N49"]


class TestFeasibleContinuation:
    def test_boundary_inclusive_at_destination(self, five_hub_net):
        table = min_time_table(five_hub_net, "T1")
        assert feasible_continuation(table, "T1", elapsed_h=5.0, budget_h=5.0,
                                     handling_h=0.0)

    def test_absent_hub_is_false(self, five_hub_net):
        table = min_time_table(five_hub_net, "T1")
        assert not feasible_continuation(table, "nope", 0.0, 100.0)

    def test_chain_over_budget(self):
        net = equatorial_chain()
        table = min_time_table(net, "C")
        # elapsed 1 h at B, 2 h still to go, budget 1.5 h
        assert table.get("B") == pytest.approx(2.0)
        assert not feasible_continuation(table, "B", 1.0, 1.5, handling_h=0.0)

    def test_handling_charged_at_intermediate_only(self):
        net = equatorial_chain()
        table = min_time_table(net, "C")
        assert feasible_continuation(table, "B", 0.0, 2.5, handling_h=0.5)
        assert not feasible_continuation(table, "B", 0.0, 2.4, handling_h=0.5)
        assert feasible_continuation(table, "C", 2.4, 2.4, handling_h=0.5)


class TestRssBfs:
    def test_current_equals_destination(self, five_hub_net):
        table = min_time_table(five_hub_net, "T1")
        out = discover_candidates(five_hub_net, table, "T1", "T1", 0.0, WIDE)
        assert isinstance(out, CandidateSet)
        assert set(out.members) == {"T1"}
        assert out.members["T1"].min_time_from_current_h == 0.0
        assert out.next_hops == ()

    def test_equatorial_chain_members_and_next_hops(self):
        net = equatorial_chain()
        table = min_time_table(net, "C")
        out = discover_candidates(net, table, "A", "C", 10.0, WIDE, handling_h=0.0)
        assert isinstance(out, CandidateSet)
        assert set(out.members) == {"B", "C"}
        assert out.members["B"].min_time_from_current_h == pytest.approx(2.0)
        assert out.members["B"].min_time_to_dest_h == pytest.approx(2.0)
        assert out.members["C"].min_time_from_current_h == pytest.approx(4.0)
        assert out.members["C"].min_time_to_dest_h == 0.0
        assert out.next_hops == ("B",)
        assert not out.fallback_used

    def test_zero_budget_is_infeasible(self):
        net = equatorial_chain()
        table = min_time_table(net, "C")
        out = discover_candidates(net, table, "A", "C", 0.0, WIDE, handling_h=0.5)
        assert isinstance(out, Infeasible)
        assert out.shortfall_h == pytest.approx(4.5)  # 4 h travel + handling at B
        assert out.recommended_extension_h == 5.0

    def test_extension_covers_shortfall(self):
        net = equatorial_chain()
        table = min_time_table(net, "C")
        out = discover_candidates(net, table, "A", "C", 3.0, WIDE, handling_h=0.5)
        assert isinstance(out, Infeasible)
        retry = discover_candidates(
            net, table, "A", "C", 3.0 + out.recommended_extension_h, WIDE, 0.5
        )
        assert isinstance(retry, CandidateSet)
        assert "B" in retry.next_hops

    def test_no_path_distinct_from_infeasible(self):
        net = load_network(json.dumps({
            "hubs": [
                {"id": "A", "name": "A", "lat": 0.0, "lon": 0.0},
                {"id": "B", "name": "B", "lat": 0.0, "lon": 5.0},
                {"id": "C", "name": "C", "lat": 0.0, "lon": 10.0},
            ],
            "edges": [
                {"from": "A", "to": "B", "travel_time_h": 1.0, "distance_mi": 1.0},
                {"from": "C", "to": "B", "travel_time_h": 1.0, "distance_mi": 1.0,
                 "directed": True},
            ],
        }))
        table = min_time_table(net, "C")
        with pytest.raises(NoPath):
            discover_candidates(net, table, "A", "C", 1000.0, WIDE)

    def test_destination_always_member_when_found(self):
        rng = random.Random(200)
        found = 0
        for _ in range(300):
            net = make_geo_graph(rng, rng.randint(3, 8))
            ids = list(net.hubs)
            s, d = rng.sample(ids, 2)
            table = min_time_table(net, d)
            if s not in table:
                continue
            out = discover_candidates(net, table, s, d, rng.randrange(4, 80) * 0.25, WIDE)
            if isinstance(out, CandidateSet):
                found += 1
                assert d in out.members
                assert s not in out.members
                for hop in out.next_hops:
                    assert hop in dict(net.neighbors(s))
        assert found > 50

    def test_fallback_guarantee(self):
        # budget-feasible shortest path implies Found with the first hop offered
        rng = random.Random(201)
        checked = 0
        while checked < 500:
            net = make_geo_graph(rng, rng.randint(3, 8))
            ids = list(net.hubs)
            s, d = rng.sample(ids, 2)
            table = min_time_table(net, d)
            if s not in table:
                continue
            sp = shortest_path(net, s, d)
            first = sp.hubs[1]
            handling = 0.5 if first != d else 0.0
            budget = sp.total_time_h + handling + rng.randrange(0, 20) * 0.25
            out = discover_candidates(net, table, s, d, budget, WIDE, handling_h=0.5)
            assert isinstance(out, CandidateSet), (
                f"budget-feasible instance reported infeasible: {s}->{d}"
            )
            assert first in out.next_hops
            checked += 1

    def test_oracle_equivalence(self):
        rng = random.Random(202)
        agreements = {"found": 0, "infeasible": 0}
        for _ in range(200):
            net = make_geo_graph(rng, rng.randint(3, 8))
            ids = list(net.hubs)
            s, d = rng.sample(ids, 2)
            table = min_time_table(net, d)
            if s not in table:
                continue
            budget = rng.randrange(0, 60) * 0.25
            got = discover_candidates(net, table, s, d, budget, WIDE, handling_h=0.5)
            want = oracle_discover(net, s, d, budget, 50.0, 0.5)
            if isinstance(got, CandidateSet):
                assert want[0] == "found", f"oracle disagrees on {s}->{d} b={budget}"
                assert set(got.members) == want[1]
                assert set(got.next_hops) == want[2]
                assert got.fallback_used == want[3]
                agreements["found"] += 1
            else:
                assert want[0] == "infeasible"
                assert got.shortfall_h == pytest.approx(want[1], abs=1e-9)
                assert got.recommended_extension_h >= got.shortfall_h
                agreements["infeasible"] += 1
        assert agreements["found"] >= 40
        assert agreements["infeasible"] >= 20

    def test_sector_monotonicity(self):
        rng = random.Random(203)
        done = 0
        while done < 200:
            net = make_geo_graph(rng, rng.randint(3, 8))
            ids = list(net.hubs)
            s, d = rng.sample(ids, 2)
            table = min_time_table(net, d)
            if s not in table:
                continue
            budget = rng.randrange(4, 60) * 0.25
            narrow = discover_candidates(net, table, s, d, budget, SectorParams(35.0))
            wide = discover_candidates(net, table, s, d, budget, SectorParams(80.0))
            if isinstance(narrow, CandidateSet) and not narrow.fallback_used:
                if isinstance(wide, CandidateSet) and not wide.fallback_used:
                    assert set(narrow.members) <= set(wide.members)
                    done += 1

    def test_budget_monotonicity(self):
        rng = random.Random(204)
        done = 0
        while done < 200:
            net = make_geo_graph(rng, rng.randint(3, 8))
            ids = list(net.hubs)
            s, d = rng.sample(ids, 2)
            table = min_time_table(net, d)
            if s not in table:
                continue
            small = rng.randrange(2, 40) * 0.25
            big = small + rng.randrange(1, 24) * 0.25
            lo = discover_candidates(net, table, s, d, small, WIDE)
            hi = discover_candidates(net, table, s, d, big, WIDE)
            if isinstance(lo, CandidateSet) and isinstance(hi, CandidateSet):
                if lo.fallback_used == hi.fallback_used:
                    assert set(lo.members) <= set(hi.members)
                    done += 1

    def test_soundness_of_recorded_times(self):
        rng = random.Random(205)
        for _ in range(100):
            net = make_geo_graph(rng, rng.randint(3, 8))
            ids = list(net.hubs)
            s, d = rng.sample(ids, 2)
            table = min_time_table(net, d)
            if s not in table:
                continue
            budget = rng.randrange(4, 60) * 0.25
            out = discover_candidates(net, table, s, d, budget, WIDE, handling_h=0.5)
            if isinstance(out, CandidateSet):
                for hub, times in out.members.items():
                    assert feasible_continuation(
                        table, hub, times.min_time_from_current_h, budget, 0.5
                    )

    def test_determinism(self):
        net = make_geo_graph(random.Random(6), 8)
        ids = list(net.hubs)
        d = ids[0]
        table = min_time_table(net, d)
        for s in ids[1:]:
            a = discover_candidates(net, table, s, d, 8.0, WIDE)
            b = discover_candidates(net, table, s, d, 8.0, WIDE)
            assert a == b
            if isinstance(a, CandidateSet):
                assert list(a.members) == list(b.members)
