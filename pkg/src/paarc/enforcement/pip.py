"""Policy Information Point over service-data repositories."""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ..policy import AttrPath, AttrValue
from .request import ServiceRequest


class NoBinding(LookupError):
    pass


class AttributeUnavailable(LookupError):
    pass


@dataclass
class ServiceDataRepository:
    """Attribute values keyed by entity id, then by attribute name.

    Entity ids are the requester for ``subject`` paths, the service id for
    ``resource``, the action for ``action`` and ``"environment"`` for
    environment paths.
    """

    entries: dict[str, dict[str, AttrValue]] = field(default_factory=dict)

    def set(self, entity: str, name: str, value: AttrValue) -> None:
        self.entries.setdefault(entity, {})[name] = value

    def lookup(self, entity: str, name: str) -> AttrValue:
        try:
            return self.entries[entity][name]
        except KeyError:
            raise AttributeUnavailable(f"{entity}/{name}") from None


@dataclass(frozen=True)
class AttributeSourceBinding:
    pattern: str  # dotted prefix, e.g. "subject" or "subject.cert"
    resolver: str

    def covers(self, path: AttrPath) -> bool:
        full = str(path)
        return full == self.pattern or full.startswith(self.pattern + ".")


def _entity_for(path: AttrPath, req: ServiceRequest) -> str:
    if path.category == "subject":
        return req.requester
    if path.category == "resource":
        return req.service_id
    if path.category == "action":
        return req.action
    return "environment"


class PolicyInformationPoint:
    def __init__(self, bindings: Iterable[AttributeSourceBinding] = (),
                 repositories: dict[str, ServiceDataRepository] | None = None):
        self.bindings = tuple(bindings)
        self.repositories = dict(repositories or {})
        for i, a in enumerate(self.bindings):
            for b in self.bindings[i + 1:]:
                if _overlaps(a.pattern, b.pattern):
                    raise ValueError(f"bindings {a.pattern!r} and {b.pattern!r} overlap")
            if a.resolver not in self.repositories:
                raise ValueError(f"binding {a.pattern!r} names unknown resolver {a.resolver!r}")
        self._calls: Counter[str] = Counter()
        self._lock = threading.Lock()

    def resolve(self, path: AttrPath, req: ServiceRequest) -> AttrValue:
        with self._lock:
            self._calls[req.request_id] += 1
        for binding in self.bindings:
            if binding.covers(path):
                break
        else:
            raise NoBinding(str(path))
        repo = self.repositories[binding.resolver]
        # repository keys are the path name relative to its category
        return repo.lookup(_entity_for(path, req), path.name)

    def call_count(self, request_id: str) -> int:
        return self._calls[request_id]


def _overlaps(a: str, b: str) -> bool:
    return a == b or a.startswith(b + ".") or b.startswith(a + ".")


def pip_resolve(pip: PolicyInformationPoint, path: AttrPath, req: ServiceRequest) -> AttrValue:
    return pip.resolve(path, req)
