"""Small scenario builders shared by the simulation tests."""

import random

from paarc import data_path
from paarc.sim import RouteGraph, build_scenario, load_policies

CAMPUS = load_policies(data_path("campus.pol"))


def line_graph_doc(weights=(30, 45)):
    stops = [f"S{i + 1}" for i in range(len(weights) + 1)]
    return {
        "stops": [{"id": s, "x": 0, "y": 0} for s in stops],
        "edges": [{"from": a, "to": b, "s": w} for a, b, w in zip(stops, stops[1:], weights)],
    }


def scenario(mode="B", events=(), avs=(("av-01", "S1"),), graph=None, policies=None, **extra):
    doc = {
        "mode": mode,
        "seed": extra.pop("seed", 1),
        "graph": graph or line_graph_doc(),
        "avs": [{"id": a, "start_stop": s, "secret": f"pw-{a}"} for a, s in avs],
        "pki": {"ca_key": "ab" * 16, **extra.pop("pki", {})},
        "events": list(events),
        **extra,
    }
    return build_scenario(doc, CAMPUS if policies is None else policies)


def random_graph(rng: random.Random, n_stops: int, density: float = 0.4, max_w: int = 50):
    g = RouteGraph()
    stops = [f"S{i}" for i in range(n_stops)]
    for s in stops:
        g.add_stop(s)
    for a in stops:
        for b in stops:
            if a != b and rng.random() < density:
                g.add_edge(a, b, rng.randint(1, max_w))
    return g
