"""Policy Enforcement Point and the ordered message trace it produces."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

from ..audit import AuditLog, Domain
from ..policy import AttrValue, Decision, Effect
from ..registry import ServiceRegistry
from .pdp import pdp_decide
from .pip import PolicyInformationPoint
from .request import ServiceRequest
from .store import PolicyStore

ENVELOPE_VERSION = "paarc-envelope/1"


class Entity(str, Enum):
    REQ = "REQ"
    REG = "REG"
    PEP = "PEP"
    PDP = "PDP"
    STORE = "STORE"
    PROV = "PROV"
    PUB = "PUB"


class MessageKind(str, Enum):
    FIND = "find"
    RECORD = "record"
    NOT_FOUND = "not-found"
    REQUEST = "request"
    DECIDE = "decide"
    RETRIEVE = "retrieve"
    DECISION = "decision"
    INVOKE = "invoke"
    OUTCOME = "outcome"
    FAILURE = "failure"
    NOTIFY = "notify"


E, K = Entity, MessageKind

CANONICAL_TRACE = (
    (E.REQ, E.REG, K.FIND),
    (E.REG, E.REQ, K.RECORD),
    (E.REQ, E.PEP, K.REQUEST),
    (E.PEP, E.PDP, K.DECIDE),
    (E.PDP, E.STORE, K.RETRIEVE),
    (E.PDP, E.PEP, K.DECISION),
    (E.PEP, E.PROV, K.INVOKE),
    (E.PROV, E.PEP, K.OUTCOME),
    (E.PEP, E.PUB, K.NOTIFY),
)
DENIED_TRACE = CANONICAL_TRACE[:6] + CANONICAL_TRACE[8:]
NOT_FOUND_TRACE = ((E.REQ, E.REG, K.FIND), (E.REG, E.REQ, K.NOT_FOUND))


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    sender: Entity
    receiver: Entity
    kind: MessageKind


@dataclass
class MessageTrace:
    events: list[TraceEvent] = field(default_factory=list)

    def add(self, sender: Entity, receiver: Entity, kind: MessageKind) -> None:
        self.events.append(TraceEvent(len(self.events) + 1, sender, receiver, kind))

    def shape(self) -> tuple[tuple[Entity, Entity, MessageKind], ...]:
        return tuple((e.sender, e.receiver, e.kind) for e in self.events)

    def to_json(self) -> list[dict]:
        return [
            {"seq": e.seq, "from": e.sender.value, "to": e.receiver.value, "kind": e.kind.value}
            for e in self.events
        ]


CHANNELS = ("notice-board", "api", "text-message")


@dataclass(frozen=True)
class Notification:
    channel: str
    recipient: str
    body: str

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")


class Publisher:
    """Collects notifications; channels are local sinks."""

    def __init__(self, default_channel: str = "api", routes: Mapping[str, str] | None = None):
        self.default_channel = default_channel
        self.routes = dict(routes or {})  # action -> channel
        self.sent: list[Notification] = []

    def channel_for(self, action: str) -> str:
        return self.routes.get(action, self.default_channel)

    def notify(self, note: Notification) -> None:
        self.sent.append(note)


@dataclass(frozen=True)
class EnforcementResult:
    request_id: str
    decision: Decision | None
    trace: MessageTrace
    outcome: bytes | None = None
    notification: Notification | None = None
    snapshot_version: int | None = None


class EnforcementError(Exception):
    def __init__(self, message: str, result: EnforcementResult):
        super().__init__(message)
        self.result = result


class ServiceNotFound(EnforcementError):
    pass


class ProviderFailure(EnforcementError):
    pass


Provider = Callable[[dict], bytes]


def to_technical(req: ServiceRequest) -> dict:
    """Canonical request -> technical envelope handed to providers."""
    return {
        "envelope": ENVELOPE_VERSION,
        "header": {
            "id": req.request_id,
            "from": req.requester,
            "service": req.service_id,
            "operation": req.action,
        },
        "attributes": {str(k): v for k, v in sorted(req.attrs.items())},
        "body": req.payload.hex(),
    }


def from_technical(msg: dict) -> ServiceRequest:
    if msg.get("envelope") != ENVELOPE_VERSION:
        raise ValueError(f"unsupported envelope {msg.get('envelope')!r}")
    head = msg["header"]
    return ServiceRequest(
        request_id=head["id"],
        requester=head["from"],
        service_id=head["service"],
        action=head["operation"],
        payload=bytes.fromhex(msg["body"]),
        attrs=msg["attributes"],
    )


def _describe(decision: Decision) -> str:
    parts = [decision.effect.value]
    if decision.matched:
        parts.append("matched=" + ",".join(f"{p}#{i}" for p, i in decision.matched))
    if decision.missing:
        parts.append("missing=" + ",".join(str(p) for p in decision.missing))
    if decision.obligations:
        parts.append("obligations=" + ",".join(decision.obligations))
    return " ".join(parts)


class PolicyEnforcementPoint:
    def __init__(self, registry: ServiceRegistry, store: PolicyStore,
                 pip: PolicyInformationPoint | None = None, audit: AuditLog | None = None,
                 publisher: Publisher | None = None, clock: Callable[[], int] = lambda: 0):
        self.registry = registry
        self.store = store
        self.pip = pip
        self.audit = audit if audit is not None else AuditLog()
        self.publisher = publisher if publisher is not None else Publisher()
        self.clock = clock
        self.decisions: list[tuple[str, Decision]] = []
        self._event_ids = itertools.count(1)

    def _decide(self, req: ServiceRequest) -> tuple[Decision, int]:
        snap = self.store.snapshot
        decision = pdp_decide(req, snap, self.pip)
        self.decisions.append((req.request_id, decision))
        self.audit.record(
            self.clock(), Domain.NETWORK, "pdp", req.action,
            request_id=req.request_id,
            decision_effect=decision.effect.value,
            policy_ids=tuple(dict.fromkeys(pid for pid, _ in decision.matched)),
            detail=f"v{snap.version} {_describe(decision)}",
        )
        return decision, snap.version

    def enforce(self, req: ServiceRequest, provider: Provider) -> EnforcementResult:
        tick = self.clock()
        trace = MessageTrace()
        trace.add(E.REQ, E.REG, K.FIND)
        found = self.registry.find(service_id=req.service_id)
        if not found:
            trace.add(E.REG, E.REQ, K.NOT_FOUND)
            self.audit.record(tick, Domain.NETWORK, "registry", "registry.find",
                              request_id=req.request_id, detail=f"{req.service_id} not-found")
            result = EnforcementResult(req.request_id, None, trace)
            raise ServiceNotFound(req.service_id, result)
        record = found[0]
        trace.add(E.REG, E.REQ, K.RECORD)
        self.audit.record(tick, Domain.NETWORK, "registry", "registry.find",
                          request_id=req.request_id,
                          detail=f"{req.service_id} provider={record.provider}")

        trace.add(E.REQ, E.PEP, K.REQUEST)
        technical = to_technical(req)
        trace.add(E.PEP, E.PDP, K.DECIDE)
        trace.add(E.PDP, E.STORE, K.RETRIEVE)
        decision, version = self._decide(req)
        trace.add(E.PDP, E.PEP, K.DECISION)

        outcome = None
        failure = None
        if decision.effect is Effect.PERMIT:
            trace.add(E.PEP, E.PROV, K.INVOKE)
            try:
                outcome = bytes(provider(technical))
            except Exception as exc:  # provider faults are reported, not propagated raw
                failure = exc
                trace.add(E.PROV, E.PEP, K.FAILURE)
                self.audit.record(tick, Domain.APPLICATION, record.provider, req.action,
                                  request_id=req.request_id, detail=f"failure: {exc}")
            else:
                trace.add(E.PROV, E.PEP, K.OUTCOME)
                self.audit.record(tick, Domain.APPLICATION, record.provider, req.action,
                                  request_id=req.request_id, detail=f"outcome {len(outcome)} bytes")

        status = "failed" if failure is not None else decision.effect.value
        note = Notification(
            self.publisher.channel_for(req.action), req.requester,
            f"{req.request_id} {req.action} {status}",
        )
        trace.add(E.PEP, E.PUB, K.NOTIFY)
        self.publisher.notify(note)
        self.audit.record(tick, Domain.APPLICATION, "publisher", "notify",
                          request_id=req.request_id, detail=f"{note.channel}: {note.body}")

        result = EnforcementResult(req.request_id, decision, trace, outcome, note, version)
        if failure is not None:
            raise ProviderFailure(str(failure), result) from failure
        return result

    def trigger_event(self, kind: str, attrs: Mapping[str, AttrValue] | None = None,
                      requester: str = "cu") -> list[str]:
        """Run an event through the PDP and return the obligations it triggers."""
        req = ServiceRequest(
            request_id=f"evt-{next(self._event_ids)}",
            requester=requester,
            service_id="events",
            action=f"event.{kind}",
            attrs=dict(attrs or {}),
        )
        decision, _ = self._decide(req)
        return list(decision.obligations)


def pep_enforce(req: ServiceRequest, registry: ServiceRegistry, provider: Provider,
                publisher: Publisher, *, store: PolicyStore,
                pip: PolicyInformationPoint | None = None, audit: AuditLog | None = None,
                tick: int = 0) -> EnforcementResult:
    pep = PolicyEnforcementPoint(registry, store, pip, audit, publisher, clock=lambda: tick)
    return pep.enforce(req, provider)


def trigger_event(pep: PolicyEnforcementPoint, kind: str, attrs=None) -> list[str]:
    return pep.trigger_event(kind, attrs)
