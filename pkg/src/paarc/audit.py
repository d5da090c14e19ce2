"""Append-only reporting system with traceability queries."""

from __future__ import annotations

import threading
from dataclasses import asdict, dataclass, replace
from enum import Enum


class Domain(str, Enum):
    DEVICE = "device"
    NETWORK = "network"
    APPLICATION = "application"


@dataclass(frozen=True)
class AuditRecord:
    tick: int
    domain: Domain
    actor: str
    action: str
    request_id: str | None = None
    decision_effect: str | None = None
    policy_ids: tuple[str, ...] = ()
    detail: str = ""
    seq: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain(self.domain))
        object.__setattr__(self, "policy_ids", tuple(self.policy_ids))

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["domain"] = self.domain.value
        doc["policy_ids"] = list(self.policy_ids)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> AuditRecord:
        return cls(**doc)


class AuditLog:
    def __init__(self, records=()):
        self._records: list[AuditRecord] = []
        self._lock = threading.Lock()
        for r in records:
            if r.seq != len(self._records) + 1:
                raise ValueError(f"audit seq {r.seq} breaks contiguity")
            self._records.append(r)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(tuple(self._records))

    def append(self, record: AuditRecord) -> int:
        if record.seq is not None:
            raise ValueError("record already carries a seq")
        with self._lock:
            seq = len(self._records) + 1
            self._records.append(replace(record, seq=seq))
        return seq

    def record(self, tick: int, domain: Domain | str, actor: str, action: str, **fields) -> int:
        return self.append(AuditRecord(tick, domain, actor, action, **fields))

    def query(self, *, domain=None, actor=None, action=None, effect=None,
              tick_range: tuple[int, int] | None = None) -> list[AuditRecord]:
        """Records matching every given filter, in seq order.

        ``tick_range`` is inclusive at both ends; ``effect`` is matched
        case-insensitively.
        """
        domain = Domain(domain) if domain is not None else None
        effect = effect.lower() if effect is not None else None
        out = []
        for r in tuple(self._records):
            if domain is not None and r.domain is not domain:
                continue
            if actor is not None and r.actor != actor:
                continue
            if action is not None and r.action != action:
                continue
            if effect is not None and (r.decision_effect or "").lower() != effect:
                continue
            if tick_range is not None and not tick_range[0] <= r.tick <= tick_range[1]:
                continue
            out.append(r)
        return out

    def trace_request(self, request_id: str) -> list[AuditRecord]:
        return [r for r in tuple(self._records) if r.request_id == request_id]

    def decision_records(self) -> list[AuditRecord]:
        return [r for r in tuple(self._records) if r.decision_effect is not None]

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in tuple(self._records)]

    @classmethod
    def from_json(cls, docs) -> AuditLog:
        return cls(AuditRecord.from_json(d) for d in docs)


def append_record(log: AuditLog, record: AuditRecord) -> int:
    return log.append(record)


def query_records(log: AuditLog, **filters) -> list[AuditRecord]:
    return log.query(**filters)


def trace_request(log: AuditLog, request_id: str) -> list[AuditRecord]:
    return log.trace_request(request_id)
