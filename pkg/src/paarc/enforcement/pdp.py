"""Two-phase Policy Decision Point."""

from __future__ import annotations

from ..policy import Combining, Decision, Effect, evaluate_policy_set
from .pip import AttributeUnavailable, NoBinding, PolicyInformationPoint
from .request import ServiceRequest
from .store import PolicyStoreSnapshot

STORE_COMBINING = Combining.DENY_OVERRIDES


def pdp_decide(req: ServiceRequest, snap: PolicyStoreSnapshot,
               pip: PolicyInformationPoint | None = None) -> Decision:
    """Decide ``req`` against one store snapshot.

    Phase 1 uses only the attributes the request carries. A Deny there is
    final and the PIP is never consulted. Otherwise each missing path is
    fetched once from the PIP and the policies are evaluated one more time;
    paths the PIP cannot supply stay missing.
    """
    ctx = req.context()
    first = evaluate_policy_set(snap.policies, ctx, STORE_COMBINING)
    if first.effect is not Effect.INDETERMINATE or pip is None:
        return first

    resolved = False
    for path in first.missing:
        if path in ctx:
            continue  # bound but ill-typed; fetching again cannot help
        try:
            ctx[path] = pip.resolve(path, req)
            resolved = True
        except (NoBinding, AttributeUnavailable):
            pass
    if not resolved:
        return first
    return evaluate_policy_set(snap.policies, ctx, STORE_COMBINING)
