from __future__ import annotations

import heapq
from dataclasses import dataclass, field


class RoutingError(Exception):
    pass


class UnknownStop(RoutingError):
    pass


class Unreachable(RoutingError):
    pass


@dataclass
class RouteGraph:
    """Directed stop graph; edge weights are integer travel seconds."""

    stops: dict[str, tuple[float, float]] = field(default_factory=dict)
    edges: dict[str, dict[str, int]] = field(default_factory=dict)

    def add_stop(self, stop_id: str, x: float = 0.0, y: float = 0.0) -> None:
        if stop_id in self.stops:
            raise ValueError(f"duplicate stop {stop_id!r}")
        self.stops[stop_id] = (x, y)
        self.edges.setdefault(stop_id, {})

    def add_edge(self, src: str, dst: str, seconds: int) -> None:
        for s in (src, dst):
            if s not in self.stops:
                raise UnknownStop(s)
        if isinstance(seconds, bool) or not isinstance(seconds, int) or seconds < 1:
            raise ValueError(f"travel time must be a positive integer, got {seconds!r}")
        # parallel edges collapse to the fastest one
        prev = self.edges[src].get(dst)
        self.edges[src][dst] = seconds if prev is None else min(prev, seconds)

    def travel_time(self, src: str, dst: str) -> int:
        return self.edges[src][dst]

    def scaled(self, k: int) -> RouteGraph:
        g = RouteGraph(dict(self.stops), {})
        for s in self.stops:
            g.edges[s] = {d: w * k for d, w in self.edges.get(s, {}).items()}
        return g

    def shortest_path(self, src: str, dst: str) -> tuple[int, list[str]]:
        """Dijkstra; returns (seconds, [src, ..., dst]).

        Ties between equal-cost paths resolve towards lexicographically
        smaller stop ids so routes are reproducible.
        """
        for s in (src, dst):
            if s not in self.stops:
                raise UnknownStop(s)
        dist = {src: 0}
        prev: dict[str, str] = {}
        heap = [(0, src)]
        done = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == dst:
                break
            for v, w in sorted(self.edges[u].items()):
                nd = d + w
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        if dst not in done:
            raise Unreachable(f"{src} -> {dst}")
        path = [dst]
        while path[-1] != src:
            path.append(prev[path[-1]])
        return dist[dst], path[::-1]


def compute_eta(g: RouteGraph, src: str, dst: str) -> int:
    return g.shortest_path(src, dst)[0]
