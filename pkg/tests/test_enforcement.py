import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from paarc.audit import AuditLog
from paarc.enforcement import (
    CANONICAL_TRACE,
    DENIED_TRACE,
    NOT_FOUND_TRACE,
    AttributeSourceBinding,
    AttributeUnavailable,
    NoBinding,
    PolicyEnforcementPoint,
    PolicyInformationPoint,
    PolicyStore,
    ProviderFailure,
    Publisher,
    ServiceDataRepository,
    ServiceNotFound,
    ServiceRequest,
    UnknownPolicyId,
    from_technical,
    pap_update,
    pdp_decide,
    pep_enforce,
    to_technical,
)
from paarc.policy import AttrPath, Effect, InvalidPolicy, parse_policy_set
from paarc.registry import ServiceRecord, ServiceRegistry


def pol(text):
    [p] = parse_policy_set(text)
    return p


P1 = pol('policy "p1" { rule permit when action.name == "read" }')
P2 = pol('policy "p2" { rule deny when action.name == "write" }')


def request(action="read", requester="av-07", service="telemetry", rid="r1", **attrs):
    return ServiceRequest(rid, requester, service, action, b"", attrs)


def make_pip(entries=None, patterns=("subject",)):
    repo = ServiceDataRepository(dict(entries or {}))
    return PolicyInformationPoint([AttributeSourceBinding(p, "repo") for p in patterns],
                                  {"repo": repo})


# -- PAP / policy store -----------------------------------------------------


def test_put_on_empty_store():
    store = PolicyStore()
    assert pap_update(store, "put", P1) == 1
    assert store.snapshot.policies == (P1,)


def test_remove_absent_id():
    with pytest.raises(UnknownPolicyId):
        pap_update(PolicyStore(), "remove", "absent")


def test_put_rejects_malformed_text():
    with pytest.raises(InvalidPolicy):
        PolicyStore().put('policy "x" { rule }')
    with pytest.raises(InvalidPolicy):
        PolicyStore().put("")


def test_put_remove_sequence():
    store = PolicyStore()
    store.put(P1)
    store.put(P2)
    assert store.remove("p1") == 3
    assert store.snapshot.policies == (P2,)


def test_put_replaces_same_id_in_place():
    store = PolicyStore([P1, P2])
    newer = pol('policy "p1" { rule deny otherwise }')
    store.put(newer)
    assert [p.id for p in store.snapshot.policies] == ["p1", "p2"]
    assert store.snapshot.get("p1") is newer


POOL = [pol(f'policy "q{i}" {{ rule {"permit" if i % 2 else "deny"} otherwise }}') for i in range(4)]


@given(st.lists(st.tuples(st.sampled_from(["put", "remove"]), st.integers(0, 3)), max_size=30))
def test_store_matches_shadow_replay(ops):
    store = PolicyStore()
    shadow: dict[str, object] = {}
    version = 0
    for op, i in ops:
        p = POOL[i]
        if op == "put":
            shadow[p.id] = p
            version += 1
            assert pap_update(store, "put", p) == version
        elif p.id in shadow:
            del shadow[p.id]
            version += 1
            assert pap_update(store, "remove", p.id) == version
        else:
            with pytest.raises(UnknownPolicyId):
                pap_update(store, "remove", p.id)
        assert store.version == version
    assert {p.id: p for p in store.snapshot.policies} == shadow


def test_snapshots_never_change():
    store = PolicyStore([P1])
    snap = store.snapshot
    store.put(P2)
    store.remove("p1")
    assert snap.version == 1 and snap.policies == (P1,)


def test_update_mid_evaluation_is_invisible():
    store = PolicyStore([pol('policy "gate" { rule permit when subject.ok == true }')])

    class MutatingRepo(ServiceDataRepository):
        def lookup(self, entity, name):
            store.put(pol('policy "lockdown" { rule deny otherwise }'))
            return True

    pip = PolicyInformationPoint([AttributeSourceBinding("subject", "r")], {"r": MutatingRepo()})
    snap = store.snapshot
    assert pdp_decide(request(), snap, pip).effect is Effect.PERMIT
    assert store.version == 2
    assert pdp_decide(request(rid="r2"), store.snapshot, pip).effect is Effect.DENY


# -- PIP ----------------------------------------------------------------------


def test_pip_direct_lookup():
    pip = make_pip({"av-07": {"enrolled": True}})
    assert pip.resolve(AttrPath("subject", "enrolled"), request()) is True
    assert pip.call_count("r1") == 1


def test_pip_unbound_path():
    with pytest.raises(NoBinding):
        make_pip().resolve(AttrPath("environment", "weather"), request())


def test_pip_bound_but_empty():
    with pytest.raises(AttributeUnavailable):
        make_pip().resolve(AttrPath("subject", "enrolled"), request())


def test_pip_rejects_overlapping_bindings():
    with pytest.raises(ValueError):
        make_pip(patterns=("subject", "subject.cert"))
    # siblings sharing a string prefix are fine
    make_pip(patterns=("subject.cert", "subject.certs"))


def test_pip_counts_per_request():
    pip = make_pip({"av-07": {"a": 1}})
    pip.resolve(AttrPath("subject", "a"), request(rid="x"))
    pip.resolve(AttrPath("subject", "a"), request(rid="x"))
    pip.resolve(AttrPath("subject", "a"), request(rid="y"))
    assert (pip.call_count("x"), pip.call_count("y"), pip.call_count("z")) == (2, 1, 0)


# -- PDP ----------------------------------------------------------------------


def test_phase_one_deny_skips_pip():
    store = PolicyStore([pol('policy "d" { rule deny when action.name == "enroll" }')])
    pip = make_pip()
    d = pdp_decide(request("enroll"), store.snapshot, pip)
    assert d.effect is Effect.DENY
    assert pip.call_count("r1") == 0


def test_phase_two_resolves_missing():
    store = PolicyStore([pol('policy "e" { rule permit when subject.enrolled == true }')])
    pip = make_pip({"av-07": {"enrolled": True}})
    d = pdp_decide(request(), store.snapshot, pip)
    assert d.effect is Effect.PERMIT
    assert pip.call_count("r1") == 1


def test_request_attrs_take_precedence_over_pip():
    store = PolicyStore([pol('policy "e" { rule permit when subject.enrolled == true }')])
    pip = make_pip({"av-07": {"enrolled": False}})
    assert pdp_decide(request(**{"subject.enrolled": True}), store.snapshot, pip).effect is Effect.PERMIT
    assert pip.call_count("r1") == 0


TWO_PATHS = [
    pol('policy "a" { rule permit when subject.a == 1 }'),
    pol('policy "b" { rule permit when subject.b == 1 }'),
]


@pytest.mark.parametrize("resolvable", [(), ("a",), ("b",), ("a", "b")])
def test_partial_resolution_leaves_rest_missing(resolvable):
    pip = make_pip({"av-07": {k: 1 for k in resolvable}})
    d = pdp_decide(request(), PolicyStore(TWO_PATHS).snapshot, pip)
    # oracle: each policy permits iff its attribute resolved; deny-overrides
    # keeps Indeterminate while any policy still lacks its attribute
    unresolved = [f"subject.{k}" for k in ("a", "b") if k not in resolvable]
    if unresolved:
        assert d.effect is Effect.INDETERMINATE
        assert [str(p) for p in d.missing] == unresolved
    else:
        assert d.effect is Effect.PERMIT
    assert pip.call_count("r1") == 2


def test_single_resolution_round():
    # resolving a exposes b inside the same rule; one round only
    store = PolicyStore([pol('policy "ab" { rule permit when subject.a == 1 and subject.b == 1 }')])
    pip = make_pip({"av-07": {"a": 1, "b": 1}})
    d = pdp_decide(request(), store.snapshot, pip)
    assert d.effect is Effect.INDETERMINATE
    assert [str(p) for p in d.missing] == ["subject.b"]
    assert pip.call_count("r1") == 1


def test_envelope_fields_are_attributes():
    store = PolicyStore([pol(
        'policy "x" { rule permit when subject.id == "av-07" and resource.id == "telemetry" }')])
    assert pdp_decide(request(), store.snapshot).effect is Effect.PERMIT


# -- PEP ----------------------------------------------------------------------


@pytest.fixture
def pipeline():
    registry = ServiceRegistry([ServiceRecord("telemetry", "cu", {"kind": "telemetry"})])
    store = PolicyStore([P1, P2])
    audit = AuditLog()
    publisher = Publisher()
    pep = PolicyEnforcementPoint(registry, store, None, audit, publisher)
    return pep


def echo(msg):
    return json.dumps(msg["header"], sort_keys=True).encode()


def test_permitted_request_trace(pipeline):
    result = pipeline.enforce(request("read"), echo)
    assert result.trace.shape() == CANONICAL_TRACE
    assert [e.seq for e in result.trace.events] == list(range(1, 10))
    assert result.decision.effect is Effect.PERMIT
    assert json.loads(result.outcome)["operation"] == "read"
    assert result.notification.body == "r1 read Permit"


def test_denied_request_trace(pipeline):
    result = pipeline.enforce(request("write"), echo)
    assert result.trace.shape() == DENIED_TRACE
    assert result.outcome is None


def test_not_applicable_is_not_permitted(pipeline):
    result = pipeline.enforce(request("delete"), echo)
    assert result.decision.effect is Effect.NOT_APPLICABLE
    assert result.outcome is None


def test_unknown_service(pipeline):
    with pytest.raises(ServiceNotFound) as info:
        pipeline.enforce(request(service="nope"), echo)
    assert info.value.result.trace.shape() == NOT_FOUND_TRACE
    assert info.value.result.decision is None
    assert pipeline.decisions == []


def test_invalidated_service_is_not_found(pipeline):
    pipeline.registry.invalidate("telemetry")
    with pytest.raises(ServiceNotFound):
        pipeline.enforce(request(), echo)


def test_provider_failure_is_recorded(pipeline):
    def broken(msg):
        raise RuntimeError("disk on fire")

    with pytest.raises(ProviderFailure) as info:
        pipeline.enforce(request("read"), broken)
    result = info.value.result
    assert result.decision.effect is Effect.PERMIT
    kinds = [e.kind.value for e in result.trace.events]
    assert kinds[-3:] == ["invoke", "failure", "notify"]
    assert any("disk on fire" in r.detail for r in pipeline.audit.trace_request("r1"))


def test_audit_trace_per_request(pipeline):
    pipeline.enforce(request("read", rid="ok"), echo)
    pipeline.enforce(request("write", rid="no"), echo)
    ok = [(r.domain.value, r.action) for r in pipeline.audit.trace_request("ok")]
    no = [(r.domain.value, r.action) for r in pipeline.audit.trace_request("no")]
    assert ok == [("network", "registry.find"), ("network", "read"),
                  ("application", "read"), ("application", "notify")]
    assert no == [("network", "registry.find"), ("network", "write"),
                  ("application", "notify")]


def test_replay_is_idempotent(pipeline):
    a = pipeline.enforce(request("read"), echo)
    b = pipeline.enforce(request("read"), echo)
    assert a.decision == b.decision and a.trace.shape() == b.trace.shape()


def test_pep_enforce_function():
    registry = ServiceRegistry([ServiceRecord("telemetry", "cu")])
    result = pep_enforce(request(), registry, echo, Publisher("notice-board"),
                         store=PolicyStore([P1]), tick=5)
    assert result.notification.channel == "notice-board"


def test_technical_translation_round_trip():
    req = ServiceRequest("r9", "av-01", "booking", "booking.assign", b"\x00\xff",
                         {"subject.cert.status": "valid", "environment.tick": 4})
    msg = to_technical(req)
    assert msg["header"]["operation"] == "booking.assign"
    assert json.loads(json.dumps(msg)) == msg
    assert from_technical(msg) == req


# -- events -------------------------------------------------------------------


def _event_pep(text):
    return PolicyEnforcementPoint(ServiceRegistry(), PolicyStore(parse_policy_set(text)))


def test_event_triggers_obligation():
    pep = _event_pep('policy "r" { rule deny when action.name == "event.cert-revoked" '
                     'obligate "withdraw-av" }')
    assert pep.trigger_event("cert-revoked", {}) == ["withdraw-av"]


def test_event_without_policy():
    assert _event_pep("").trigger_event("cert-revoked", {}) == []


@pytest.mark.parametrize("order", list(itertools.permutations(["x", "y", "z"])))
def test_event_obligations_in_rule_order(order):
    rules = " ".join(
        f'rule deny when action.name == "event.e" obligate "{o}"' for o in order
    )
    pep = _event_pep(f'policy "p" {{ {rules} }}')
    assert pep.trigger_event("e") == list(order)
    assert pep.audit.decision_records()[0].request_id.startswith("evt-")
