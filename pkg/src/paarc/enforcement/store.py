"""Versioned copy-on-write policy store owned by the PAP."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from ..policy import InvalidPolicy, Policy, PolicyError, parse_policy_set


class UnknownPolicyId(KeyError):
    pass


@dataclass(frozen=True)
class PolicyStoreSnapshot:
    version: int
    policies: tuple[Policy, ...] = ()

    def get(self, policy_id: str) -> Policy | None:
        for p in self.policies:
            if p.id == policy_id:
                return p
        return None


class PolicyStore:
    """Single writer, many readers.

    Readers grab ``snapshot`` (one attribute read, never blocks) and keep
    using that immutable object for the whole evaluation. Writers build a
    new snapshot under a lock and swap the reference.
    """

    def __init__(self, policies=()):
        self._lock = threading.Lock()
        self._snapshot = PolicyStoreSnapshot(0, ())
        self._listeners: list[Callable[[PolicyStoreSnapshot], None]] = []
        for p in policies:
            self.put(p)

    @property
    def snapshot(self) -> PolicyStoreSnapshot:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    def subscribe(self, listener: Callable[[PolicyStoreSnapshot], None]) -> None:
        """Call ``listener`` with every snapshot published from now on."""
        self._listeners.append(listener)

    def put(self, policy: Policy | str) -> int:
        policy = _coerce_policy(policy)
        with self._lock:
            current = list(self._snapshot.policies)
            for i, existing in enumerate(current):
                if existing.id == policy.id:
                    current[i] = policy
                    break
            else:
                current.append(policy)
            return self._publish(current)

    def remove(self, policy_id: str) -> int:
        with self._lock:
            current = [p for p in self._snapshot.policies if p.id != policy_id]
            if len(current) == len(self._snapshot.policies):
                raise UnknownPolicyId(policy_id)
            return self._publish(current)

    def _publish(self, policies) -> int:
        snap = PolicyStoreSnapshot(self._snapshot.version + 1, tuple(policies))
        self._snapshot = snap
        for listener in self._listeners:
            listener(snap)
        return snap.version


def _coerce_policy(policy: Policy | str) -> Policy:
    if isinstance(policy, Policy):
        return policy
    if isinstance(policy, str):
        try:
            parsed = parse_policy_set(policy)
        except PolicyError as exc:
            raise InvalidPolicy(str(exc)) from exc
        if len(parsed) != 1:
            raise InvalidPolicy(f"expected exactly one policy, got {len(parsed)}")
        return parsed[0]
    raise InvalidPolicy(f"not a policy: {policy!r}")


def pap_update(store: PolicyStore, op: str, policy_or_id) -> int:
    """Apply one PAP mutation ("put" or "remove") and return the new version."""
    if op == "put":
        return store.put(policy_or_id)
    if op == "remove":
        return store.remove(policy_or_id)
    raise ValueError(f"unknown PAP operation {op!r}")
