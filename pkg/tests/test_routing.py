import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from paarc.sim import (
    ENROLLED,
    IDLE,
    NEAR_FINISH,
    RUNNING,
    AvState,
    BookingRequest,
    NoEligibleVehicle,
    RouteGraph,
    UnknownStop,
    Unreachable,
    compute_eta,
    elect_vehicle,
)

from worlds import random_graph


def line():
    g = RouteGraph()
    for s in ("S1", "S2", "S3"):
        g.add_stop(s)
    g.add_edge("S1", "S2", 30)
    g.add_edge("S2", "S3", 45)
    return g


def test_eta_along_line():
    g = line()
    assert compute_eta(g, "S1", "S3") == oracles.all_simple_path_costs(g.edges, "S1", "S3") == 75


def test_eta_identity():
    assert compute_eta(line(), "S1", "S1") == 0


def test_eta_unreachable_and_unknown():
    with pytest.raises(Unreachable):
        compute_eta(line(), "S3", "S1")
    with pytest.raises(UnknownStop):
        compute_eta(line(), "S1", "S9")


def test_edge_weights_validated():
    g = line()
    for bad in (0, -3, 1.5, True):
        with pytest.raises(ValueError):
            g.add_edge("S1", "S3", bad)


def test_parallel_edges_keep_fastest():
    g = line()
    g.add_edge("S1", "S2", 50)
    g.add_edge("S1", "S2", 10)
    assert g.travel_time("S1", "S2") == 10


def test_shortest_path_is_consistent_with_eta():
    g = line()
    g.add_edge("S1", "S3", 80)
    secs, path = g.shortest_path("S1", "S3")
    assert (secs, path) == (75, ["S1", "S2", "S3"])


@given(st.integers(0, 2**32), st.integers(1, 7))
def test_eta_matches_brute_force(seed, n):
    rng = random.Random(seed)
    g = random_graph(rng, n)
    for a in g.stops:
        for b in g.stops:
            want = oracles.all_simple_path_costs(g.edges, a, b)
            if want is None:
                with pytest.raises(Unreachable):
                    compute_eta(g, a, b)
            else:
                secs, path = g.shortest_path(a, b)
                assert secs == want
                assert sum(g.travel_time(x, y) for x, y in zip(path, path[1:])) == secs


# -- election -----------------------------------------------------------------


def av(av_id, stop, route_state=IDLE, lifecycle=ENROLLED, **kw):
    return AvState(av_id, stop, lifecycle=lifecycle, route_state=route_state, **kw)


def booking(origin="S0"):
    return BookingRequest("b1", "p1", origin, 0, 0)


def star():
    g = RouteGraph()
    for s in ("S0", "A", "B", "C"):
        g.add_stop(s)
    g.add_edge("A", "S0", 120)
    g.add_edge("B", "S0", 80)
    g.add_edge("C", "S0", 80)
    return g


def test_smallest_eta_wins():
    fleet = [av("av-01", "A"), av("av-02", "B")]
    assert elect_vehicle(booking(), fleet, star(), "A") == "av-02"


def test_tie_breaks_on_id():
    fleet = [av("av-02", "B"), av("av-01", "C")]
    assert elect_vehicle(booking(), fleet, star(), "A") == "av-01"


def test_ineligible_vehicles_skipped():
    fleet = [
        av("av-01", "B", route_state=RUNNING, route=["S0"]),
        av("av-02", "C", lifecycle="withdrawn"),
        av("av-03", "A", pending_withdraw=True),
        av("av-04", "A", route_state=NEAR_FINISH, route=[]),
    ]
    assert elect_vehicle(booking(), fleet, star(), "A") == "av-04"


def test_running_vehicle_measured_from_edge_head():
    g = star()
    g.add_edge("S0", "B", 5)
    moving = av("av-01", "S0", route_state=NEAR_FINISH, route=["B"], edge_elapsed=2)
    assert moving.nearest_stop() == "B"
    assert elect_vehicle(booking(), [moving, av("av-02", "A")], g, "A") == "av-01"


def test_mode_b_requires_authorization():
    fleet = [av("av-01", "B")]
    with pytest.raises(NoEligibleVehicle):
        elect_vehicle(booking(), fleet, star(), "B", authorize=lambda a: False)
    with pytest.raises(ValueError):
        elect_vehicle(booking(), fleet, star(), "B")


def test_mode_b_falls_back_to_next_candidate():
    fleet = [av("av-01", "A"), av("av-02", "B")]
    picked = elect_vehicle(booking(), fleet, star(), "B", authorize=lambda a: a.av_id != "av-02")
    assert picked == "av-01"


def test_empty_fleet():
    with pytest.raises(NoEligibleVehicle):
        elect_vehicle(booking(), [], star(), "A")


def _random_fleet(rng, g, n):
    stops = sorted(g.stops)
    states = [IDLE, IDLE, NEAR_FINISH, RUNNING]
    return [av(f"av-{i:02d}", rng.choice(stops), route_state=rng.choice(states))
            for i in range(n)]


def _oracle_elect(b, fleet, g, allowed=lambda a: True):
    best = None
    for a in fleet:
        if a.lifecycle != ENROLLED or a.route_state == RUNNING or not allowed(a):
            continue
        eta = oracles.all_simple_path_costs(g.edges, a.nearest_stop(), b.origin_stop)
        if eta is not None and (best is None or (eta, a.av_id) < best):
            best = (eta, a.av_id)
    return None if best is None else best[1]


@given(st.integers(0, 2**32), st.integers(1, 6), st.integers(0, 5))
def test_election_matches_exhaustive_comparison(seed, n_stops, n_avs):
    rng = random.Random(seed)
    g = random_graph(rng, n_stops, density=0.5)
    fleet = _random_fleet(rng, g, n_avs)
    b = booking(rng.choice(sorted(g.stops)))
    allowed = lambda a: int(a.av_id[-2:]) % 2 == 0  # noqa: E731
    for mode, auth in (("A", None), ("B", allowed)):
        want = _oracle_elect(b, fleet, g, auth or (lambda a: True))
        if want is None:
            with pytest.raises(NoEligibleVehicle):
                elect_vehicle(b, fleet, g, mode, auth)
        else:
            assert elect_vehicle(b, fleet, g, mode, auth) == want


@given(st.integers(0, 2**32), st.sampled_from([2, 5, 10]))
def test_election_is_scale_invariant(seed, k):
    rng = random.Random(seed)
    g = random_graph(rng, 6, density=0.5)
    fleet = _random_fleet(rng, g, 4)
    b = booking(rng.choice(sorted(g.stops)))
    try:
        base = elect_vehicle(b, fleet, g, "A")
    except NoEligibleVehicle:
        base = None
    try:
        scaled = elect_vehicle(b, fleet, g.scaled(k), "A")
    except NoEligibleVehicle:
        scaled = None
    assert base == scaled
