"""Service registry: publish, find and invalidate service descriptions."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

VALID = "valid"
INVALIDATED = "invalidated"


class RegistryError(Exception):
    pass


class DuplicateServiceId(RegistryError):
    pass


class UnknownServiceId(RegistryError):
    pass


@dataclass(frozen=True)
class ServiceRecord:
    service_id: str
    provider: str
    properties: Mapping[str, str] = field(default_factory=dict)
    process_doc: str = ""
    status: str = VALID

    def __post_init__(self):
        if self.status not in (VALID, INVALIDATED):
            raise ValueError(f"unknown service status {self.status!r}")
        object.__setattr__(self, "properties", MappingProxyType(dict(self.properties)))

    def to_json(self) -> dict:
        return {
            "id": self.service_id,
            "provider": self.provider,
            "properties": dict(self.properties),
            "process_doc": self.process_doc,
        }

    @classmethod
    def from_json(cls, doc: dict) -> ServiceRecord:
        return cls(
            service_id=doc["id"],
            provider=doc["provider"],
            properties={str(k): str(v) for k, v in doc.get("properties", {}).items()},
            process_doc=doc.get("process_doc", ""),
        )


class ServiceRegistry:
    """Single writer; readers see whole dictionaries swapped in atomically."""

    def __init__(self, records=()):
        self._lock = threading.Lock()
        self._valid: Mapping[str, ServiceRecord] = MappingProxyType({})
        self.retired: list[ServiceRecord] = []
        for rec in records:
            self.publish(rec)

    def publish(self, rec: ServiceRecord) -> None:
        if rec.status != VALID:
            raise ValueError("only valid records can be published")
        with self._lock:
            if rec.service_id in self._valid:
                raise DuplicateServiceId(rec.service_id)
            self._valid = MappingProxyType({**self._valid, rec.service_id: rec})

    def find(self, query: Mapping[str, str] | None = None,
             service_id: str | None = None) -> list[ServiceRecord]:
        valid = self._valid
        if service_id is not None:
            candidates = [valid[service_id]] if service_id in valid else []
        else:
            candidates = sorted(valid.values(), key=lambda r: r.service_id)
        query = query or {}
        return [
            r for r in candidates
            if all(r.properties.get(k) == v for k, v in query.items())
        ]

    def invalidate(self, service_id: str) -> None:
        with self._lock:
            if service_id not in self._valid:
                raise UnknownServiceId(service_id)
            remaining = dict(self._valid)
            self.retired.append(replace(remaining.pop(service_id), status=INVALIDATED))
            self._valid = MappingProxyType(remaining)


def publish_service(registry: ServiceRegistry, rec: ServiceRecord) -> None:
    registry.publish(rec)


def find_service(registry: ServiceRegistry, query=None, service_id=None) -> list[ServiceRecord]:
    return registry.find(query, service_id)


def invalidate_service(registry: ServiceRegistry, service_id: str) -> None:
    registry.invalidate(service_id)
