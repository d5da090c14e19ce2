from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from ..policy import AttrPath, AttrValue, make_context

SUBJECT_ID = AttrPath("subject", "id")
RESOURCE_ID = AttrPath("resource", "id")
ACTION_NAME = AttrPath("action", "name")


@dataclass(frozen=True)
class ServiceRequest:
    request_id: str
    requester: str
    service_id: str
    action: str
    payload: bytes = b""
    attrs: Mapping[AttrPath, AttrValue] = field(default_factory=dict)

    def __post_init__(self):
        if not self.action:
            raise ValueError("request action must be non-empty")
        object.__setattr__(self, "attrs", MappingProxyType(make_context(self.attrs)))

    def context(self) -> dict[AttrPath, AttrValue]:
        """Attribute bag seen by the PDP.

        The request envelope fields are exposed as ``subject.id``,
        ``resource.id`` and ``action.name`` unless the caller bound them.
        """
        ctx = {SUBJECT_ID: self.requester, RESOURCE_ID: self.service_id, ACTION_NAME: self.action}
        ctx.update(self.attrs)
        return ctx

    @classmethod
    def from_json(cls, doc: dict) -> ServiceRequest:
        payload = doc.get("payload", "")
        return cls(
            request_id=str(doc["request_id"]),
            requester=str(doc["requester"]),
            service_id=str(doc["service_id"]),
            action=str(doc["action"]),
            payload=payload.encode() if isinstance(payload, str) else bytes(payload),
            attrs=dict(doc.get("attrs", {})),
        )
