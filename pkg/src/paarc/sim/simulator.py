"""Tick-driven simulation of the campus AV service in mode A or mode B.

Mode A is the original workflow: the control unit (CU) takes enrollments
and telemetry at face value. Mode B routes every fleet action through the
PKI (RA/CA/VA) and the enforcement pipeline.
"""

from __future__ import annotations

import itertools
import json
import random
from collections import Counter

from ..audit import AuditLog, Domain
from ..enforcement import (
    AttributeSourceBinding,
    EnforcementError,
    PolicyEnforcementPoint,
    PolicyInformationPoint,
    PolicyStore,
    Publisher,
    ServiceDataRepository,
    ServiceRequest,
)
from ..pki import (
    Approved,
    CertificateAuthority,
    CertStatus,
    HmacSigner,
    IdentityClaim,
    RegistrationAuthority,
    UnknownSubject,
    ValidationAuthority,
)
from ..policy import Effect
from ..registry import ServiceRegistry
from .fleet import (
    ENROLLED,
    IDLE,
    NEAR_FINISH,
    NEAR_FINISH_SECONDS,
    RUNNING,
    WITHDRAWN,
    AvState,
    BookingRequest,
    NoEligibleVehicle,
    Telemetry,
    elect_vehicle,
)
from .graph import Unreachable, compute_eta
from .scenario import Scenario

ENROLL_SERVICE = "fleet-enrollment"
TELEMETRY_SERVICE = "telemetry"
BOOKING_SERVICE = "booking"

_CERT_REASONS = {
    CertStatus.EXPIRED: "cert-expired",
    CertStatus.NOT_YET_VALID: "cert-not-yet-valid",
    CertStatus.REVOKED: "cert-revoked",
    CertStatus.BAD_SIGNATURE: "cert-invalid",
    CertStatus.UNKNOWN_ISSUER: "cert-invalid",
}


class ActionRejected(Exception):
    """A fleet action refused by the CU or the enforcement pipeline."""

    def __init__(self, reason: str, decision=None):
        super().__init__(reason)
        self.reason = reason
        self.decision = decision


class Simulation:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.mode = scenario.mode
        self.graph = scenario.graph
        self.clock = 0
        self.rng = random.Random(scenario.seed)

        self.fleet: dict[str, AvState] = {
            a.id: AvState(a.id, a.start_stop) for a in scenario.avs
        }
        self.registered = {a.id for a in scenario.avs}

        self.audit = AuditLog()
        self.registry = ServiceRegistry(scenario.services)
        self.store = PolicyStore(scenario.policies)
        self.fleet_data = ServiceDataRepository()
        for a in scenario.avs:
            self.fleet_data.set(a.id, "role", "av")
            self.fleet_data.set(a.id, "registered", True)
        self.pip = PolicyInformationPoint(
            [AttributeSourceBinding("subject", "fleet-data")],
            {"fleet-data": self.fleet_data},
        )
        self.publisher = Publisher(
            default_channel="api",
            routes={"booking.assign": "text-message", "av.enroll": "notice-board",
                    "av.withdraw": "notice-board"},
        )
        self.pep = PolicyEnforcementPoint(
            self.registry, self.store, self.pip, self.audit, self.publisher,
            clock=lambda: self.clock,
        )
        self.ca = CertificateAuthority("ca", HmacSigner.from_hex(scenario.ca_key))
        self.ra = RegistrationAuthority(scenario.secrets)
        self.va = ValidationAuthority([self.ca])

        self.telemetry: dict[str, Telemetry] = {}
        self.log: list[dict] = []
        self.assignments: list[dict] = []
        self.tally: Counter[str] = Counter()
        self.by_kind: dict[str, Counter[str]] = {}
        self._request_ids = itertools.count(1)
        self._events = list(scenario.events)
        self._next_event = 0
        self._started = False

    # -- driver ---------------------------------------------------------

    def start(self) -> list[dict]:
        self._started = True
        return self._dispatch_due()

    def step(self) -> list[dict]:
        """Advance one second: move vehicles, then run events due now."""
        if not self._started:
            self.start()
        mark = len(self.log)
        self.clock += 1
        for av_id in sorted(self.fleet):
            self._advance(self.fleet[av_id])
        self._dispatch_due()
        return self.log[mark:]

    def run(self, until: int | None = None) -> dict:
        end = self.scenario.final_tick if until is None else until
        if not self._started:
            self.start()
        while self.clock < end:
            self.step()
        return self.report()

    def _dispatch_due(self) -> list[dict]:
        mark = len(self.log)
        while self._next_event < len(self._events) and self._events[self._next_event]["tick"] <= self.clock:
            self.dispatch(self._events[self._next_event])
            self._next_event += 1
        return self.log[mark:]

    def dispatch(self, event: dict) -> None:
        kind = event["kind"]
        if kind == "enroll":
            self._scripted(event, self.is_legit_enroll(event), lambda: self.enroll_av(
                event["av"], proof=event.get("proof"), start_stop=event.get("start_stop"),
                validity=event.get("validity")))
        elif kind == "withdraw":
            self._scripted(event, event["av"] in self.registered,
                           lambda: self.withdraw_av(event["av"]))
        elif kind == "telemetry":
            self._scripted(event, event["av"] in self.registered,
                           lambda: self.submit_telemetry(self._telemetry_from(event)))
        elif kind == "booking":
            self.handle_booking(BookingRequest(
                booking_id=event["booking_id"],
                passenger_id=event.get("passenger", "anonymous"),
                origin_stop=event["origin"],
                walk_seconds=event.get("walk_seconds", 0),
                tick=self.clock,
                destination_stop=event.get("destination"),
            ))
        elif kind == "revoke-cert":
            self.revoke_cert(event["av"])
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    def is_legit_enroll(self, event: dict) -> bool:
        av = event["av"]
        if av not in self.registered:
            return False
        proof = event.get("proof", self.scenario.secrets.get(av))
        return proof is not None and proof == self.scenario.secrets.get(av)

    def _scripted(self, event: dict, legit: bool, action) -> None:
        kind = event["kind"]
        counts = self.by_kind.setdefault(kind, Counter())
        entry = {"tick": self.clock, "kind": kind, "actor": event["av"], "legit": legit}
        try:
            detail = action()
        except ActionRejected as exc:
            entry.update(outcome="rejected", reason=exc.reason)
            verdict = "rejected"
        else:
            entry["outcome"] = "accepted"
            if detail:
                entry["detail"] = detail
            verdict = "accepted"
        counts[verdict] += 1
        self.tally[verdict] += 1
        self.tally[f"{'legitimate' if legit else 'illegitimate'}_{verdict}"] += 1
        self.log.append(entry)

    def _emit(self, kind: str, **fields) -> None:
        self.log.append({"tick": self.clock, "kind": kind, **fields})

    def _new_request_id(self) -> str:
        return f"req-{next(self._request_ids):05d}"

    def _enforce(self, requester: str, service_id: str, action: str, attrs: dict,
                 provider=None):
        req = ServiceRequest(self._new_request_id(), requester, service_id, action,
                             payload=json.dumps(attrs, sort_keys=True).encode(), attrs=attrs)
        try:
            return self.pep.enforce(req, provider or self._cu_provider)
        except EnforcementError as exc:
            if exc.result.decision is None:
                raise ActionRejected("service-not-found") from exc
            raise ActionRejected("provider-failure", exc.result.decision) from exc

    def _cu_provider(self, msg: dict) -> bytes:
        head = msg["header"]
        return f"cu ack {head['operation']} {head['from']}".encode()

    def _require_permit(self, result, reason: str) -> None:
        if result.decision.effect is not Effect.PERMIT:
            effect = result.decision.effect
            raise ActionRejected(reason if effect is Effect.DENY else "indeterminate", result.decision)

    def _cert_status(self, av: AvState) -> CertStatus | None:
        return None if av.cert is None else self.va.validate(av.cert, self.clock)

    # -- fleet lifecycle ------------------------------------------------

    def enroll_av(self, av_id: str, proof: str | None = None, start_stop: str | None = None,
                  validity: int | None = None) -> str:
        av = self.fleet.get(av_id)
        if av is None:
            if start_stop is None:
                raise ActionRejected("unknown-av")
            av = AvState(av_id, start_stop)  # joins the fleet table only once admitted
        if av.lifecycle == ENROLLED:
            raise ActionRejected("already-enrolled")
        self.audit.record(self.clock, Domain.DEVICE, av_id, "av.enroll.request")
        if proof is None:
            proof = self.scenario.secrets.get(av_id, "")

        if self.mode == "A":
            self._admit(av, None, None)
            self.audit.record(self.clock, Domain.APPLICATION, "cu", "av.enroll",
                              detail=f"{av_id} recorded")
            return "recorded"

        claim = IdentityClaim(
            av_id, proof, self.clock, self.clock + (validity or self.scenario.cert_validity),
            key_fingerprint=f"{self.rng.getrandbits(128):032x}",
        )
        try:
            verdict = self.ra.verify_identity(claim)
        except UnknownSubject:
            self.audit.record(self.clock, Domain.NETWORK, "ra", "identity.verify",
                              detail=f"{av_id} unknown-subject")
            raise ActionRejected("identity-rejected") from None
        approved = isinstance(verdict, Approved)
        self.audit.record(self.clock, Domain.NETWORK, "ra", "identity.verify",
                          detail=f"{av_id} {'approved' if approved else verdict.reason}")
        if not approved:
            raise ActionRejected("identity-rejected")
        cert = self.ca.issue(verdict)
        self.audit.record(self.clock, Domain.NETWORK, "ca", "cert.issue",
                          detail=f"{av_id} serial={cert.serial}")
        status = self.va.validate(cert, self.clock)
        self.audit.record(self.clock, Domain.NETWORK, "va", "cert.validate",
                          detail=f"{av_id} serial={cert.serial} {status.value}")
        result = self._enforce(av_id, ENROLL_SERVICE, "av.enroll",
                               {"subject.cert.status": status.value.lower(),
                                "environment.tick": self.clock})
        if result.decision.effect is not Effect.PERMIT:
            self.ca.revoke(cert.serial, self.clock)
            self.audit.record(self.clock, Domain.NETWORK, "ca", "cert.revoke",
                              detail=f"{av_id} serial={cert.serial} enrollment-denied")
            self._require_permit(result, "enrollment-denied")
        self._admit(av, cert, result.request_id)
        return f"serial={cert.serial}"

    def _admit(self, av: AvState, cert, request_id) -> None:
        self.fleet.setdefault(av.av_id, av)
        av.set_lifecycle(ENROLLED)
        av.cert = cert
        av.enrolled_at = self.clock
        av.enroll_request_id = request_id
        av.pending_withdraw = False
        self.fleet_data.set(av.av_id, "enrolled", True)

    def withdraw_av(self, av_id: str) -> str:
        av = self.fleet.get(av_id)
        if av is None or av.lifecycle != ENROLLED:
            raise ActionRejected("not-enrolled")
        self.audit.record(self.clock, Domain.DEVICE, av_id, "av.withdraw.request")
        if self.mode == "B":
            result = self._enforce(av_id, ENROLL_SERVICE, "av.withdraw",
                                   {"environment.tick": self.clock})
            self._require_permit(result, "withdrawal-denied")
        return self._schedule_withdrawal(av)

    def _schedule_withdrawal(self, av: AvState) -> str:
        if av.route_state == IDLE and not av.queue:
            self._complete_withdrawal(av)
            return "withdrawn"
        av.pending_withdraw = True
        self.audit.record(self.clock, Domain.APPLICATION, "cu", "av.withdraw.deferred",
                          detail=av.av_id)
        return "deferred"

    def _complete_withdrawal(self, av: AvState) -> None:
        av.set_lifecycle(WITHDRAWN)
        av.pending_withdraw = False
        self.fleet_data.set(av.av_id, "enrolled", False)
        if self.mode == "B" and av.cert is not None and av.cert.serial not in self.ca.revocations:
            self.ca.revoke(av.cert.serial, self.clock)
            self.audit.record(self.clock, Domain.NETWORK, "ca", "cert.revoke",
                              detail=f"{av.av_id} serial={av.cert.serial} withdrawn")
        self.audit.record(self.clock, Domain.APPLICATION, "cu", "av.withdraw",
                          detail=f"{av.av_id} withdrawn")
        self._emit("withdrawn", actor=av.av_id)

    def revoke_cert(self, av_id: str) -> None:
        av = self.fleet.get(av_id)
        if self.mode == "A" or av is None or av.cert is None:
            self._emit("revoke-cert", actor=av_id, outcome="ignored")
            return
        self.ca.revoke(av.cert.serial, self.clock)
        self.audit.record(self.clock, Domain.NETWORK, "ca", "cert.revoke",
                          detail=f"{av_id} serial={av.cert.serial}")
        obligations = self.pep.trigger_event(
            "cert-revoked", {"subject.cert.status": "revoked"}, requester=av_id)
        self._emit("revoke-cert", actor=av_id, outcome="revoked", obligations=obligations)
        for ob in obligations:
            self.audit.record(self.clock, Domain.APPLICATION, "cu", "obligation",
                              detail=f"{ob} {av_id}")
            if ob == "withdraw-av" and av.lifecycle == ENROLLED and not av.pending_withdraw:
                self._schedule_withdrawal(av)

    # -- telemetry ------------------------------------------------------

    def _telemetry_from(self, event: dict) -> Telemetry:
        av = self.fleet.get(event["av"])
        return Telemetry(
            av_id=event["av"],
            location=event.get("location", av.location if av else None),
            route_paths=tuple(event.get("route_paths", av.route if av else ())),
            service_bulletins=tuple(event.get("bulletins", ())),
            stop_list=tuple(event.get("stop_list", sorted(self.graph.stops))),
            route_state=event.get("route_state", av.route_state if av else IDLE),
            tick=self.clock,
        )

    def submit_telemetry(self, t: Telemetry) -> str:
        self.audit.record(self.clock, Domain.DEVICE, t.av_id, "telemetry.submit")
        if self.mode == "B":
            av = self.fleet.get(t.av_id)
            if av is None or av.lifecycle != ENROLLED:
                raise ActionRejected("not-enrolled")
            status = self._cert_status(av)
            if status is not CertStatus.VALID:
                raise ActionRejected(_CERT_REASONS.get(status, "no-cert"))
            result = self._enforce(t.av_id, TELEMETRY_SERVICE, "telemetry.submit",
                                   {"subject.cert.status": "valid",
                                    "environment.tick": self.clock})
            self._require_permit(result, "denied")
        self.telemetry[t.av_id] = t
        if t.av_id in self.fleet:
            self.fleet[t.av_id].last_telemetry = t
        self.audit.record(self.clock, Domain.APPLICATION, "cu", "telemetry.accept",
                          detail=t.av_id)
        return "stored"

    # -- bookings -------------------------------------------------------

    def _authorize_assignment(self, booking: BookingRequest):
        def authorize(av: AvState) -> bool:
            if self._cert_status(av) is not CertStatus.VALID:
                return False
            try:
                result = self._enforce(av.av_id, BOOKING_SERVICE, "booking.assign",
                                       {"subject.cert.status": "valid",
                                        "resource.booking": booking.booking_id,
                                        "environment.tick": self.clock})
            except ActionRejected:
                return False
            return result.decision.effect is Effect.PERMIT
        return authorize

    def handle_booking(self, b: BookingRequest) -> dict:
        self.audit.record(self.clock, Domain.APPLICATION, "booking-app", "booking.request",
                          detail=f"{b.booking_id} {b.passenger_id} at {b.origin_stop}")
        fleet = [self.fleet[k] for k in sorted(self.fleet)]
        try:
            av_id = elect_vehicle(b, fleet, self.graph, self.mode,
                                  self._authorize_assignment(b) if self.mode == "B" else None)
        except NoEligibleVehicle:
            record = {"booking_id": b.booking_id, "passenger": b.passenger_id, "tick": self.clock,
                      "av_id": None, "outcome": "no-vehicle"}
            self.assignments.append(record)
            self.tally["bookings_unserved"] += 1
            self.audit.record(self.clock, Domain.APPLICATION, "cu", "booking.no-vehicle",
                              detail=b.booking_id)
            self._emit("booking", booking_id=b.booking_id, outcome="no-vehicle")
            return record

        av = self.fleet[av_id]
        av_eta = compute_eta(self.graph, av.nearest_stop(), b.origin_stop)
        waypoints = [b.origin_stop]
        if b.destination_stop is not None:
            waypoints.append(b.destination_stop)
        record = {"booking_id": b.booking_id, "passenger": b.passenger_id, "tick": self.clock,
                  "av_id": av_id, "av_eta": av_eta, "passenger_eta": b.walk_seconds,
                  "outcome": "assigned"}
        self.assignments.append(record)
        self.tally["bookings_served"] += 1
        self.audit.record(self.clock, Domain.APPLICATION, "cu", "booking.assign",
                          detail=f"{b.booking_id} -> {av_id} av_eta={av_eta} "
                                 f"passenger_eta={b.walk_seconds}")
        self._emit("booking", booking_id=b.booking_id, outcome="assigned", av_id=av_id,
                   av_eta=av_eta, passenger_eta=b.walk_seconds)
        if av.route_state == IDLE:
            self._begin(av, waypoints)
        else:
            av.queue.append(waypoints)
        return record

    # -- movement -------------------------------------------------------

    def _begin(self, av: AvState, waypoints: list[str]) -> None:
        route, here = [], av.position
        try:
            for stop in waypoints:
                route += self.graph.shortest_path(here, stop)[1][1:]
                here = stop
        except Unreachable:
            # only queued work can hit this: the ETA was taken from another stop
            self._emit("itinerary-aborted", actor=av.av_id, waypoints=waypoints)
            return
        av.route = route
        av.edge_elapsed = 0
        self._transition(av, RUNNING)
        self._refresh(av, allow_finish=False)

    def _transition(self, av: AvState, new: str) -> None:
        old = av.route_state
        av.set_route_state(new)
        self._emit("route-state", actor=av.av_id, old=old, new=new)

    def _advance(self, av: AvState) -> None:
        if av.lifecycle != ENROLLED or av.route_state == IDLE:
            return
        if av.route:
            av.edge_elapsed += 1
            if av.edge_elapsed >= self.graph.travel_time(av.position, av.route[0]):
                av.position = av.route.pop(0)
                av.edge_elapsed = 0
        self._refresh(av, allow_finish=True)

    def _refresh(self, av: AvState, allow_finish: bool) -> None:
        if av.route_state == RUNNING and av.remaining_seconds(self.graph) <= NEAR_FINISH_SECONDS:
            self._transition(av, NEAR_FINISH)
        if allow_finish and av.route_state == NEAR_FINISH and not av.route:
            self._transition(av, IDLE)
            self.audit.record(self.clock, Domain.DEVICE, av.av_id, "itinerary.complete",
                              detail=f"at {av.position}")
            if av.queue:
                self._begin(av, av.queue.pop(0))
            elif av.pending_withdraw:
                self._complete_withdrawal(av)

    # -- reporting ------------------------------------------------------

    def report(self) -> dict:
        fleet = []
        for av_id in sorted(self.fleet):
            av = self.fleet[av_id]
            loc = av.location
            fleet.append({
                "id": av_id,
                "lifecycle": av.lifecycle,
                "route_state": av.route_state,
                "location": list(loc) if isinstance(loc, tuple) else loc,
                "cert_serial": av.cert.serial if av.cert else None,
                "cert_status": self._cert_status(av).value if av.cert else None,
            })
        tallies = {
            key: self.tally.get(key, 0)
            for key in ("accepted", "rejected", "legitimate_accepted", "legitimate_rejected",
                        "illegitimate_accepted", "illegitimate_rejected",
                        "bookings_served", "bookings_unserved")
        }
        tallies["by_kind"] = {k: dict(sorted(c.items())) for k, c in sorted(self.by_kind.items())}
        return {
            "mode": self.mode,
            "seed": self.scenario.seed,
            "final_tick": self.clock,
            "policy_version": self.store.version,
            "events": self.log,
            "assignments": self.assignments,
            "tallies": tallies,
            "fleet": fleet,
            "decision_count": len(self.pep.decisions),
            "notifications": [
                {"channel": n.channel, "recipient": n.recipient, "body": n.body}
                for n in self.publisher.sent
            ],
            "audit_record_count": len(self.audit),
            "audit": self.audit.to_json(),
        }


def run_scenario(scenario: Scenario) -> dict:
    return Simulation(scenario).run()


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
