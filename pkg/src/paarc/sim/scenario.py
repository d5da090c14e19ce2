"""Scenario files: JSON schema, loading and defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema

from ..policy import Policy, PolicyError, parse_policy_set
from ..registry import ServiceRecord
from .graph import RouteGraph

EVENT_KINDS = ("enroll", "withdraw", "booking", "telemetry", "revoke-cert")
DEFAULT_CERT_VALIDITY = 3600

DEFAULT_SERVICES = (
    ServiceRecord("fleet-enrollment", "cu", {"kind": "fleet"}, "enroll/withdraw AVs"),
    ServiceRecord("telemetry", "cu", {"kind": "telemetry"}, "AV status ingestion"),
    ServiceRecord("booking", "cu", {"kind": "booking"}, "itinerary assignment"),
)

_ID = {"type": "string", "minLength": 1}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["mode", "graph", "events"],
    "properties": {
        "mode": {"enum": ["A", "B"]},
        "seed": {"type": "integer"},
        "until": {"type": "integer", "minimum": 0},
        "graph": {
            "type": "object",
            "required": ["stops", "edges"],
            "properties": {
                "stops": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id"],
                        "properties": {"id": _ID, "x": {"type": "number"}, "y": {"type": "number"}},
                    },
                },
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["from", "to", "s"],
                        "properties": {"from": _ID, "to": _ID, "s": {"type": "integer", "minimum": 1}},
                    },
                },
            },
        },
        "avs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "start_stop"],
                "properties": {"id": _ID, "start_stop": _ID, "secret": {"type": "string"}},
            },
        },
        "services": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "provider"],
                "properties": {
                    "id": _ID,
                    "provider": _ID,
                    "properties": {"type": "object", "additionalProperties": {"type": "string"}},
                    "process_doc": {"type": "string"},
                },
            },
        },
        "policies": {"type": "string"},
        "pki": {
            "type": "object",
            "properties": {
                "ca_key": {"type": "string", "pattern": "^([0-9a-fA-F]{2})+$"},
                "secrets": {"type": "object", "additionalProperties": {"type": "string"}},
                "cert_validity": {"type": "integer", "minimum": 1},
            },
        },
        "events": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["tick", "kind"],
                "properties": {"tick": {"type": "integer", "minimum": 0}, "kind": {"enum": list(EVENT_KINDS)}},
                "allOf": [
                    {"if": {"properties": {"kind": {"const": "booking"}}},
                     "then": {"required": ["booking_id", "origin"]},
                     "else": {"required": ["av"]}},
                ],
            },
        },
    },
}


class ScenarioError(Exception):
    pass


class PolicyFileError(ScenarioError):
    def __init__(self, path, error: PolicyError):
        super().__init__(f"{path}:{error}")
        self.path = path
        self.error = error


@dataclass(frozen=True)
class AvSpec:
    id: str
    start_stop: str
    secret: str | None = None


@dataclass
class Scenario:
    mode: str
    graph: RouteGraph
    avs: list[AvSpec] = field(default_factory=list)
    services: list[ServiceRecord] = field(default_factory=lambda: list(DEFAULT_SERVICES))
    policies: list[Policy] = field(default_factory=list)
    ca_key: str = "00" * 32
    secrets: dict[str, str] = field(default_factory=dict)
    cert_validity: int = DEFAULT_CERT_VALIDITY
    events: list[dict] = field(default_factory=list)
    seed: int = 0
    until: int | None = None

    @property
    def final_tick(self) -> int:
        last = max((e["tick"] for e in self.events), default=0)
        return max(last, self.until or 0)

    def with_mode(self, mode: str) -> Scenario:
        return replace(self, mode=mode)


def build_scenario(doc: dict, policies: list[Policy] | None = None) -> Scenario:
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"scenario schema error at {where}: {exc.message}") from None

    graph = RouteGraph()
    try:
        for s in doc["graph"]["stops"]:
            graph.add_stop(s["id"], s.get("x", 0.0), s.get("y", 0.0))
        for e in doc["graph"]["edges"]:
            graph.add_edge(e["from"], e["to"], e["s"])
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"bad graph: {exc}") from None

    avs = [AvSpec(a["id"], a["start_stop"], a.get("secret")) for a in doc.get("avs", [])]
    if len({a.id for a in avs}) != len(avs):
        raise ScenarioError("duplicate AV ids")
    for a in avs:
        if a.start_stop not in graph.stops:
            raise ScenarioError(f"AV {a.id} starts at unknown stop {a.start_stop!r}")

    events = list(doc["events"])
    ticks = [e["tick"] for e in events]
    if ticks != sorted(ticks):
        raise ScenarioError("event ticks must be non-decreasing")
    for e in events:
        for key in ("origin", "destination", "start_stop"):
            if key in e and e[key] not in graph.stops:
                raise ScenarioError(f"event at tick {e['tick']} names unknown stop {e[key]!r}")

    pki = doc.get("pki", {})
    secrets = {a.id: a.secret for a in avs if a.secret is not None}
    secrets.update(pki.get("secrets", {}))
    services = (
        [ServiceRecord.from_json(s) for s in doc["services"]]
        if "services" in doc else list(DEFAULT_SERVICES)
    )
    return Scenario(
        mode=doc["mode"],
        graph=graph,
        avs=avs,
        services=services,
        policies=list(policies or []),
        ca_key=pki.get("ca_key", "00" * 32),
        secrets=secrets,
        cert_validity=pki.get("cert_validity", DEFAULT_CERT_VALIDITY),
        events=events,
        seed=doc.get("seed", 0),
        until=doc.get("until"),
    )


def load_policies(path: str | Path) -> list[Policy]:
    return parse_policy_set(Path(path).read_text(encoding="utf-8"))


def load_scenario(path: str | Path, policies_path: str | Path | None = None,
                  mode: str | None = None) -> Scenario:
    """Read a scenario file.

    The policy file comes from ``policies_path`` if given, else from the
    scenario's ``policies`` entry (relative to the scenario file). Raises
    OSError for I/O problems, ScenarioError/PolicyError for bad content.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if policies_path is None and isinstance(doc, dict) and "policies" in doc:
        policies_path = path.parent / doc["policies"]
    policies = []
    if policies_path is not None:
        try:
            policies = load_policies(policies_path)
        except PolicyError as exc:
            raise PolicyFileError(policies_path, exc) from exc
    scenario = build_scenario(doc, policies)
    return scenario.with_mode(mode) if mode else scenario
