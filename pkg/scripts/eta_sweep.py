"""Time Dijkstra ETAs on random graphs and cross-check small ones by path enumeration.

    python3 scripts/eta_sweep.py [--graphs 500] [--max-stops 40] [--seed 0]
"""

import argparse
import random
import time

from paarc.sim import RouteGraph, Unreachable, compute_eta


def random_graph(rng, n, density):
    g = RouteGraph()
    for i in range(n):
        g.add_stop(f"S{i}", rng.uniform(0, 500), rng.uniform(0, 500))
    for a in g.stops:
        for b in g.stops:
            if a != b and rng.random() < density:
                g.add_edge(a, b, rng.randint(1, 120))
    return g


def brute_force(g, src, dst):
    best = None
    stack = [(src, 0, {src})]
    while stack:
        node, cost, seen = stack.pop()
        if node == dst:
            best = cost if best is None else min(best, cost)
            continue
        for nxt, w in g.edges[node].items():
            if nxt not in seen:
                stack.append((nxt, cost + w, seen | {nxt}))
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=500)
    ap.add_argument("--max-stops", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    queries = checked = disagreements = 0
    start = time.perf_counter()
    for _ in range(args.graphs):
        n = rng.randint(2, args.max_stops)
        g = random_graph(rng, n, min(1.0, 3.0 / n))
        stops = sorted(g.stops)
        for _ in range(10):
            a, b = rng.choice(stops), rng.choice(stops)
            try:
                eta = compute_eta(g, a, b)
            except Unreachable:
                eta = None
            queries += 1
            if n <= 8:
                checked += 1
                disagreements += eta != brute_force(g, a, b)
    elapsed = time.perf_counter() - start
    print(f"{queries} ETA queries on {args.graphs} graphs in {elapsed:.2f}s")
    print(f"{checked} cross-checked by enumeration, {disagreements} disagreements")


if __name__ == "__main__":
    main()
