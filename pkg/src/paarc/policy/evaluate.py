"""Three-valued expression evaluation, policy evaluation and combining."""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import (
    NOT_APPLICABLE,
    And,
    AttrPath,
    Combining,
    Compare,
    Decision,
    Effect,
    Not,
    Or,
    Policy,
    Present,
    RequestContext,
    TypeMismatch,
    value_kind,
)


@dataclass(frozen=True)
class MissingAttribute:
    path: AttrPath

    def __bool__(self):
        raise TypeError("MissingAttribute has no truth value")


_OPS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def evaluate_expr(expr, ctx: RequestContext) -> bool | MissingAttribute:
    """Evaluate ``expr`` against ``ctx``.

    Returns True, False, or the leftmost (depth-first) MissingAttribute.
    ``And``/``Or`` short-circuit on a dominating operand even if the other
    side is missing. Raises TypeMismatch on incompatible comparisons.
    """
    if isinstance(expr, Compare):
        if expr.path not in ctx:
            return MissingAttribute(expr.path)
        actual = ctx[expr.path]
        if value_kind(actual) != value_kind(expr.value):
            raise TypeMismatch(
                expr.path,
                f"cannot compare {value_kind(actual)} with {value_kind(expr.value)} literal",
            )
        return _OPS[expr.op](actual, expr.value)
    if isinstance(expr, Present):
        return expr.path in ctx
    if isinstance(expr, Not):
        inner = evaluate_expr(expr.operand, ctx)
        return inner if isinstance(inner, MissingAttribute) else not inner
    if isinstance(expr, (And, Or)):
        dominant = isinstance(expr, Or)  # True dominates Or, False dominates And
        left = evaluate_expr(expr.left, ctx)
        if left is dominant:
            return dominant
        right = evaluate_expr(expr.right, ctx)
        if right is dominant:
            return dominant
        if isinstance(left, MissingAttribute):
            return left
        return right
    raise TypeError(f"not an expression: {expr!r}")


def _indeterminate(paths: Iterable[AttrPath], diagnostics: Iterable[str] = ()) -> Decision:
    return Decision(Effect.INDETERMINATE, missing=_dedupe(paths), diagnostics=tuple(diagnostics))


def _dedupe(items):
    return tuple(dict.fromkeys(items))


def _condition_outcome(expr, ctx) -> Decision | bool:
    """True/False when determinate, otherwise an Indeterminate decision."""
    try:
        result = evaluate_expr(expr, ctx)
    except TypeMismatch as exc:
        return _indeterminate([exc.path], [str(exc)])
    if isinstance(result, MissingAttribute):
        return _indeterminate([result.path])
    return result


def evaluate_policy(policy: Policy, ctx: RequestContext) -> Decision:
    if policy.target is not None:
        applies = _condition_outcome(policy.target, ctx)
        if isinstance(applies, Decision):
            return applies
        if not applies:
            return NOT_APPLICABLE

    outcomes = []
    for index, rule in enumerate(policy.rules):
        if rule.is_otherwise:
            fires = True
        else:
            fires = _condition_outcome(rule.condition, ctx)
        if isinstance(fires, Decision):
            outcomes.append(fires)
        elif fires:
            outcomes.append(Decision(rule.effect, rule.obligations, ((policy.id, index),)))
        else:
            outcomes.append(NOT_APPLICABLE)
    return combine_decisions(outcomes, policy.combining)


def _merge(effect: Effect, ds: Sequence[Decision]) -> Decision:
    obligations = tuple(o for d in ds for o in d.obligations)
    matched = tuple(m for d in ds for m in d.matched)
    diagnostics = tuple(x for d in ds for x in d.diagnostics)
    return Decision(effect, obligations, matched, diagnostics=diagnostics)


def _overrides(ds: Sequence[Decision], dominant: Effect) -> Decision:
    winners = [d for d in ds if d.effect is dominant]
    if winners:
        return _merge(dominant, winners)
    undecided = [d for d in ds if d.effect is Effect.INDETERMINATE]
    if undecided:
        return _indeterminate(
            (p for d in undecided for p in d.missing),
            (x for d in undecided for x in d.diagnostics),
        )
    weaker = Effect.DENY if dominant is Effect.PERMIT else Effect.PERMIT
    rest = [d for d in ds if d.effect is weaker]
    if rest:
        return _merge(weaker, rest)
    return NOT_APPLICABLE


def combine_decisions(ds: Sequence[Decision], alg: Combining | str) -> Decision:
    """Fold decisions in order under a combining algorithm.

    Only the decisions carrying the final effect contribute obligations
    and matched entries, in input order.
    """
    alg = Combining(alg)
    if alg is Combining.DENY_OVERRIDES:
        return _overrides(ds, Effect.DENY)
    if alg is Combining.PERMIT_OVERRIDES:
        return _overrides(ds, Effect.PERMIT)
    for d in ds:
        if d.effect is not Effect.NOT_APPLICABLE:
            return d
    return NOT_APPLICABLE


def evaluate_policy_set(policies: Iterable[Policy], ctx: RequestContext,
                        alg: Combining | str = Combining.DENY_OVERRIDES) -> Decision:
    return combine_decisions([evaluate_policy(p, ctx) for p in policies], alg)
