"""Vehicle state, telemetry, bookings and vehicle election."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from ..pki import Certificate
from .graph import RouteGraph, Unreachable, compute_eta

UNENROLLED, ENROLLED, WITHDRAWN = "unenrolled", "enrolled", "withdrawn"
IDLE, RUNNING, NEAR_FINISH = "idle", "running", "near-finish"

NEAR_FINISH_SECONDS = 60

LIFECYCLE_MOVES = {(UNENROLLED, ENROLLED), (ENROLLED, WITHDRAWN), (WITHDRAWN, ENROLLED)}
ROUTE_MOVES = {(IDLE, RUNNING), (RUNNING, NEAR_FINISH), (NEAR_FINISH, IDLE)}


class InvariantViolation(AssertionError):
    pass


class NoEligibleVehicle(Exception):
    pass


@dataclass(frozen=True)
class Telemetry:
    av_id: str
    location: object
    route_paths: tuple[str, ...]
    service_bulletins: tuple[str, ...]
    stop_list: tuple[str, ...]
    route_state: str
    tick: int


@dataclass(frozen=True)
class BookingRequest:
    booking_id: str
    passenger_id: str
    origin_stop: str
    walk_seconds: int
    tick: int
    destination_stop: str | None = None

    def __post_init__(self):
        if self.walk_seconds < 0:
            raise ValueError("walk_seconds must be non-negative")


@dataclass
class AvState:
    av_id: str
    position: str  # last stop reached
    lifecycle: str = UNENROLLED
    route_state: str = IDLE
    route: list[str] = field(default_factory=list)  # stops still to reach, next first
    edge_elapsed: int = 0
    cert: Certificate | None = None
    last_telemetry: Telemetry | None = None
    queue: list[list[str]] = field(default_factory=list)
    pending_withdraw: bool = False
    enrolled_at: int | None = None
    enroll_request_id: str | None = None

    @property
    def location(self):
        """A stop id, or ``(from, to, elapsed)`` while between stops."""
        if self.edge_elapsed == 0:
            return self.position
        return (self.position, self.route[0], self.edge_elapsed)

    def nearest_stop(self) -> str:
        # current stop when stopped, the edge head when on the way
        return self.route[0] if self.edge_elapsed > 0 else self.position

    def remaining_seconds(self, g: RouteGraph) -> int:
        if not self.route:
            return 0
        total = g.travel_time(self.position, self.route[0]) - self.edge_elapsed
        for a, b in zip(self.route, self.route[1:]):
            total += g.travel_time(a, b)
        return total

    def set_lifecycle(self, new: str) -> None:
        if (self.lifecycle, new) not in LIFECYCLE_MOVES:
            raise InvariantViolation(f"{self.av_id}: lifecycle {self.lifecycle} -> {new}")
        self.lifecycle = new

    def set_route_state(self, new: str) -> None:
        if (self.route_state, new) not in ROUTE_MOVES:
            raise InvariantViolation(f"{self.av_id}: route state {self.route_state} -> {new}")
        self.route_state = new


def is_candidate(av: AvState) -> bool:
    return (
        av.lifecycle == ENROLLED
        and av.route_state in (IDLE, NEAR_FINISH)
        and not av.pending_withdraw
    )


def rank_candidates(booking: BookingRequest, fleet: Iterable[AvState],
                    g: RouteGraph) -> list[tuple[int, str]]:
    """(eta, av_id) for every candidate that can reach the origin, best first."""
    ranked = []
    for av in fleet:
        if not is_candidate(av):
            continue
        try:
            ranked.append((compute_eta(g, av.nearest_stop(), booking.origin_stop), av.av_id))
        except Unreachable:
            continue
    ranked.sort()
    return ranked


def elect_vehicle(booking: BookingRequest, fleet: Iterable[AvState], g: RouteGraph,
                  mode: str, authorize: Callable[[AvState], bool] | None = None) -> str:
    """Pick the eligible AV with the smallest ETA to the booking's origin.

    In mode B every candidate must also pass ``authorize`` (certificate and
    policy check). Candidates are tried in ETA order and the first one that
    passes wins, which equals filtering first and taking the minimum.
    """
    fleet = list(fleet)
    by_id = {av.av_id: av for av in fleet}
    for _, av_id in rank_candidates(booking, fleet, g):
        if mode == "B":
            if authorize is None:
                raise ValueError("mode B election needs an authorize callback")
            if not authorize(by_id[av_id]):
                continue
        return av_id
    raise NoEligibleVehicle(booking.booking_id)
