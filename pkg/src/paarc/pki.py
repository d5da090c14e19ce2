"""Simulated one-level PKI: registration, certification and validation authorities.

Signatures are HMAC-SHA256 tags over ``canonical_cert_bytes``. The signer
is pluggable; anything with ``sign(bytes) -> str`` and
``verify(bytes, str) -> bool`` works.
"""

from __future__ import annotations

import hashlib
import hmac
import threading
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Mapping, Protocol


class PkiError(Exception):
    pass


class UnknownSubject(PkiError):
    pass


class NotApproved(PkiError):
    pass


class UnknownSerial(PkiError):
    pass


class Signer(Protocol):
    def sign(self, data: bytes) -> str: ...

    def verify(self, data: bytes, signature: str) -> bool: ...


class HmacSigner:
    def __init__(self, key: bytes):
        if not key:
            raise ValueError("signing key must be non-empty")
        self._key = bytes(key)

    @classmethod
    def from_hex(cls, key_hex: str) -> HmacSigner:
        return cls(bytes.fromhex(key_hex))

    def sign(self, data: bytes) -> str:
        return hmac.new(self._key, data, hashlib.sha256).hexdigest()

    def verify(self, data: bytes, signature: str) -> bool:
        return hmac.compare_digest(self.sign(data), signature)


@dataclass(frozen=True)
class IdentityClaim:
    subject: str
    proof: str
    not_before: int
    not_after: int
    key_fingerprint: str | None = None

    def __post_init__(self):
        if not self.not_before < self.not_after:
            raise ValueError("validity window must satisfy not_before < not_after")


@dataclass(frozen=True)
class Approved:
    claim: IdentityClaim
    approved_by: str


@dataclass(frozen=True)
class Rejected:
    claim: IdentityClaim
    reason: str


@dataclass(frozen=True)
class Certificate:
    serial: int
    subject: str
    issuer: str
    not_before: int
    not_after: int
    key_fingerprint: str
    signature: str = ""

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def canonical_cert_bytes(cert: Certificate) -> bytes:
    """The signed portion of a certificate; the signature field is ignored."""
    return (
        f"{cert.serial}\n{cert.subject}\n{cert.issuer}\n"
        f"{cert.not_before}\n{cert.not_after}\n{cert.key_fingerprint}\n"
    ).encode("utf-8")


class CertStatus(str, Enum):
    VALID = "Valid"
    EXPIRED = "Expired"
    NOT_YET_VALID = "NotYetValid"
    REVOKED = "Revoked"
    BAD_SIGNATURE = "BadSignature"
    UNKNOWN_ISSUER = "UnknownIssuer"


class RegistrationAuthority:
    def __init__(self, secrets: Mapping[str, str], ra_id: str = "ra"):
        self.ra_id = ra_id
        self._secrets = dict(secrets)

    def register(self, subject: str, secret: str) -> None:
        self._secrets[subject] = secret

    def verify_identity(self, claim: IdentityClaim) -> Approved | Rejected:
        try:
            expected = self._secrets[claim.subject]
        except KeyError:
            raise UnknownSubject(claim.subject) from None
        if hmac.compare_digest(expected.encode(), claim.proof.encode()):
            return Approved(claim, self.ra_id)
        return Rejected(claim, "proof-mismatch")


class RevocationList:
    def __init__(self):
        self._revoked: dict[int, int] = {}

    def add(self, serial: int, at: int) -> None:
        self._revoked.setdefault(serial, at)

    def __contains__(self, serial: int) -> bool:
        return serial in self._revoked

    def revoked_at(self, serial: int) -> int | None:
        return self._revoked.get(serial)

    def items(self):
        return sorted(self._revoked.items())


def default_fingerprint(subject: str, serial: int) -> str:
    return hashlib.sha256(f"key:{subject}:{serial}".encode()).hexdigest()[:32]


class CertificateAuthority:
    def __init__(self, ca_id: str, signer: Signer):
        self.ca_id = ca_id
        self.signer = signer
        self.revocations = RevocationList()
        self._serial = 0
        self._issued: dict[int, Certificate] = {}
        self._lock = threading.Lock()

    @property
    def issued(self) -> Mapping[int, Certificate]:
        return dict(self._issued)

    def issue(self, approval: Approved) -> Certificate:
        if not isinstance(approval, Approved):
            raise NotApproved(f"claim was not approved: {approval!r}")
        claim = approval.claim
        with self._lock:
            self._serial += 1
            serial = self._serial
            cert = Certificate(
                serial=serial,
                subject=claim.subject,
                issuer=self.ca_id,
                not_before=claim.not_before,
                not_after=claim.not_after,
                key_fingerprint=claim.key_fingerprint or default_fingerprint(claim.subject, serial),
            )
            cert = replace(cert, signature=self.signer.sign(canonical_cert_bytes(cert)))
            self._issued[serial] = cert
        return cert

    def revoke(self, serial: int, at: int = 0) -> None:
        if serial not in self._issued:
            raise UnknownSerial(serial)
        self.revocations.add(serial, at)


class ValidationAuthority:
    def __init__(self, authorities=()):
        self._cas: dict[str, CertificateAuthority] = {}
        for ca in authorities:
            self.trust(ca)

    def trust(self, ca: CertificateAuthority) -> None:
        self._cas[ca.ca_id] = ca

    def validate(self, cert: Certificate, now: int) -> CertStatus:
        """First failing check wins: issuer, signature, revocation, window."""
        ca = self._cas.get(cert.issuer)
        if ca is None:
            return CertStatus.UNKNOWN_ISSUER
        if not ca.signer.verify(canonical_cert_bytes(cert), cert.signature):
            return CertStatus.BAD_SIGNATURE
        if cert.serial in ca.revocations:
            return CertStatus.REVOKED
        if now < cert.not_before:
            return CertStatus.NOT_YET_VALID
        if now > cert.not_after:
            return CertStatus.EXPIRED
        return CertStatus.VALID


def ra_verify_identity(ra: RegistrationAuthority, claim: IdentityClaim) -> Approved | Rejected:
    return ra.verify_identity(claim)


def ca_issue(ca: CertificateAuthority, approval: Approved) -> Certificate:
    return ca.issue(approval)


def ca_revoke(ca: CertificateAuthority, serial: int, at: int = 0) -> None:
    ca.revoke(serial, at)


def va_validate(va: ValidationAuthority, cert: Certificate, now: int) -> CertStatus:
    return va.validate(cert, now)
