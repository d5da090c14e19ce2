"""Render policies back to DSL source. Output reparses to equal policies."""

from __future__ import annotations

from .model import And, Compare, Not, Or, Policy, Present, Rule


def _quote(s: str) -> str:
    escaped = (
        s.replace("\\", "\\\\").replace('"', '\\"')
        .replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
    )
    return f'"{escaped}"'


def _literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return _quote(value)


def format_expr(expr) -> str:
    if isinstance(expr, Compare):
        return f"{expr.path} {expr.op} {_literal(expr.value)}"
    if isinstance(expr, Present):
        return f"present({expr.path})"
    if isinstance(expr, Not):
        return f"not {_operand(expr.operand)}"
    if isinstance(expr, And):
        return f"{_operand(expr.left)} and {_operand(expr.right)}"
    if isinstance(expr, Or):
        return f"{_operand(expr.left)} or {_operand(expr.right)}"
    raise TypeError(f"not an expression: {expr!r}")


def _operand(expr) -> str:
    # parenthesise every compound operand so the tree shape survives reparsing
    text = format_expr(expr)
    return f"({text})" if isinstance(expr, (And, Or)) else text


def format_rule(rule: Rule) -> str:
    head = f"rule {rule.effect.value.lower()}"
    body = "otherwise" if rule.is_otherwise else f"when {format_expr(rule.condition)}"
    obligations = "".join(f" obligate {_quote(o)}" for o in rule.obligations)
    return f"{head} {body}{obligations}"


def format_policy(policy: Policy) -> str:
    lines = [f"policy {_quote(policy.id)} {{"]
    if policy.target is not None:
        lines.append(f"  target: {format_expr(policy.target)}")
    lines.append(f"  combining: {policy.combining.value}")
    lines.extend(f"  {format_rule(r)}" for r in policy.rules)
    lines.append("}")
    return "\n".join(lines)


def format_policy_set(policies) -> str:
    return "".join(format_policy(p) + "\n" for p in policies)
