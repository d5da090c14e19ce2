"""Core data model of the attribute-based policy language."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

CATEGORIES = ("subject", "resource", "action", "environment")
_NAME_RE = re.compile(r"[a-z][a-z0-9_.]*\Z")

# Timestamps are plain integers (seconds since scenario epoch).
AttrValue = Union[str, int, bool]


class PolicyError(Exception):
    """Base class for policy language errors."""


class ParseError(PolicyError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class DuplicatePolicyId(PolicyError):
    pass


class MisplacedOtherwise(PolicyError):
    pass


class InvalidPolicy(PolicyError):
    pass


class TypeMismatch(PolicyError):
    def __init__(self, path: AttrPath, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def value_kind(value: object) -> str:
    # bool must be tested before int: bool is an int subclass
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, str):
        return "string"
    raise TypeError(f"unsupported attribute value {value!r}")


@dataclass(frozen=True, order=True)
class AttrPath:
    category: str
    name: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown attribute category {self.category!r}")
        if not _NAME_RE.match(self.name) or ".." in self.name or self.name.endswith("."):
            raise ValueError(f"invalid attribute name {self.name!r}")

    @classmethod
    def parse(cls, dotted: str) -> AttrPath:
        category, sep, name = dotted.partition(".")
        if not sep:
            raise ValueError(f"attribute path {dotted!r} has no name")
        return cls(category, name)

    def __str__(self) -> str:
        return f"{self.category}.{self.name}"


class Effect(str, Enum):
    PERMIT = "Permit"
    DENY = "Deny"
    NOT_APPLICABLE = "NotApplicable"
    INDETERMINATE = "Indeterminate"

    def __str__(self) -> str:
        return self.value


class Combining(str, Enum):
    DENY_OVERRIDES = "deny-overrides"
    PERMIT_OVERRIDES = "permit-overrides"
    FIRST_APPLICABLE = "first-applicable"

    def __str__(self) -> str:
        return self.value


# -- expressions -------------------------------------------------------------

ORDERING_OPS = ("<", "<=", ">", ">=")
COMPARE_OPS = ("==", "!=") + ORDERING_OPS


@dataclass(frozen=True)
class And:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    operand: Expr


@dataclass(frozen=True)
class Compare:
    op: str
    path: AttrPath
    value: AttrValue

    def __post_init__(self):
        if self.op not in COMPARE_OPS:
            raise ValueError(f"unknown operator {self.op!r}")
        kind = value_kind(self.value)
        if self.op in ORDERING_OPS and kind != "integer":
            raise ValueError(f"operator {self.op} needs an integer literal, got {kind}")


@dataclass(frozen=True)
class Present:
    path: AttrPath


Expr = Union[And, Or, Not, Compare, Present]


class _Otherwise:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "OTHERWISE"

    def __reduce__(self):
        return (_Otherwise, ())


OTHERWISE = _Otherwise()


@dataclass(frozen=True)
class Rule:
    effect: Effect
    condition: Union[Expr, _Otherwise]
    obligations: tuple[str, ...] = ()

    def __post_init__(self):
        if self.effect not in (Effect.PERMIT, Effect.DENY):
            raise InvalidPolicy(f"rule effect must be Permit or Deny, not {self.effect}")
        object.__setattr__(self, "obligations", tuple(self.obligations))

    @property
    def is_otherwise(self) -> bool:
        return self.condition is OTHERWISE


@dataclass(frozen=True)
class Policy:
    id: str
    rules: tuple[Rule, ...]
    target: Expr | None = None
    combining: Combining = Combining.DENY_OVERRIDES

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "combining", Combining(self.combining))
        if not self.rules:
            raise InvalidPolicy(f"policy {self.id!r} has no rules")
        for i, rule in enumerate(self.rules):
            if rule.is_otherwise and i != len(self.rules) - 1:
                raise MisplacedOtherwise(
                    f"policy {self.id!r}: 'otherwise' rule must be last (rule {i})"
                )


def check_unique_ids(policies) -> None:
    seen = set()
    for p in policies:
        if p.id in seen:
            raise DuplicatePolicyId(f"duplicate policy id {p.id!r}")
        seen.add(p.id)


# -- decisions ---------------------------------------------------------------


@dataclass(frozen=True)
class Decision:
    effect: Effect
    obligations: tuple[str, ...] = ()
    matched: tuple[tuple[str, int], ...] = ()
    missing: tuple[AttrPath, ...] = ()
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if bool(self.missing) != (self.effect is Effect.INDETERMINATE):
            raise ValueError("missing attributes must be reported iff effect is Indeterminate")
        if self.obligations and self.effect not in (Effect.PERMIT, Effect.DENY):
            raise ValueError("obligations only attach to Permit or Deny")

    def to_json(self) -> dict:
        return {
            "effect": self.effect.value,
            "matched": [[pid, idx] for pid, idx in self.matched],
            "missing": [str(p) for p in self.missing],
            "obligations": list(self.obligations),
        }


NOT_APPLICABLE = Decision(Effect.NOT_APPLICABLE)

RequestContext = Mapping[AttrPath, AttrValue]


def make_context(attrs: Mapping[str | AttrPath, AttrValue]) -> dict[AttrPath, AttrValue]:
    """Build a request context from dotted-string or AttrPath keys."""
    ctx: dict[AttrPath, AttrValue] = {}
    for key, value in attrs.items():
        path = key if isinstance(key, AttrPath) else AttrPath.parse(key)
        value_kind(value)
        if path in ctx:
            raise ValueError(f"attribute {path} bound twice")
        ctx[path] = value
    return ctx
