from .pdp import STORE_COMBINING, pdp_decide
from .pep import (
    CANONICAL_TRACE,
    CHANNELS,
    DENIED_TRACE,
    NOT_FOUND_TRACE,
    EnforcementError,
    EnforcementResult,
    Entity,
    MessageKind,
    MessageTrace,
    Notification,
    PolicyEnforcementPoint,
    ProviderFailure,
    Publisher,
    ServiceNotFound,
    TraceEvent,
    from_technical,
    pep_enforce,
    to_technical,
    trigger_event,
)
from .pip import (
    AttributeSourceBinding,
    AttributeUnavailable,
    NoBinding,
    PolicyInformationPoint,
    ServiceDataRepository,
    pip_resolve,
)
from .request import ServiceRequest
from .store import PolicyStore, PolicyStoreSnapshot, UnknownPolicyId, pap_update
