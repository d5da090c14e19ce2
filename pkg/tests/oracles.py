"""Brute-force reference implementations used as test oracles.

None of these call into the evaluation code they check.
"""

from __future__ import annotations

import itertools

PERMIT, DENY, NA, INDET = "Permit", "Deny", "NotApplicable", "Indeterminate"

# -- three-valued logic ---------------------------------------------------
# Values are True, False or ("missing", name).


def is_missing(v):
    return isinstance(v, tuple)


def kleene_and(a, b):
    if a is False or b is False:
        return False
    if is_missing(a):
        return a
    if is_missing(b):
        return b
    return True


def kleene_or(a, b):
    if a is True or b is True:
        return True
    if is_missing(a):
        return a
    if is_missing(b):
        return b
    return False


def kleene_not(a):
    return a if is_missing(a) else not a


# -- combining ------------------------------------------------------------
# An abstract decision is (effect, obligations tuple, matched tuple, missing tuple).

PRECEDENCE = {
    "deny-overrides": (DENY, INDET, PERMIT),
    "permit-overrides": (PERMIT, INDET, DENY),
}


def fold(decisions, alg):
    if alg == "first-applicable":
        for d in decisions:
            if d[0] != NA:
                return d
        return (NA, (), (), ())
    for effect in PRECEDENCE[alg]:
        picked = [d for d in decisions if d[0] == effect]
        if not picked:
            continue
        if effect == INDET:
            missing = []
            for d in picked:
                for m in d[3]:
                    if m not in missing:
                        missing.append(m)
            return (INDET, (), (), tuple(missing))
        return (
            effect,
            tuple(itertools.chain.from_iterable(d[1] for d in picked)),
            tuple(itertools.chain.from_iterable(d[2] for d in picked)),
            (),
        )
    return (NA, (), (), ())


def abstract(decision):
    """Project a real Decision onto the oracle's tuple form."""
    return (
        decision.effect.value,
        tuple(decision.obligations),
        tuple(decision.matched),
        tuple(str(p) for p in decision.missing),
    )


# -- boolean-flag policies --------------------------------------------------
# A flag policy: (pid, target_flag_or_None, alg, [(effect, flag_or_None, obligations)]).
# Condition "flag i" means subject.f<i> == true; None means otherwise.
# A context is a tuple of four values in {None (absent), True, False}.


def flag_value(ctx, i):
    v = ctx[i]
    return ("missing", f"subject.f{i}") if v is None else v


def oracle_policy(policy, ctx):
    pid, target, alg, rules = policy
    if target is not None:
        t = flag_value(ctx, target)
        if is_missing(t):
            return (INDET, (), (), (t[1],))
        if t is False:
            return (NA, (), (), ())
    outcomes = []
    for idx, (effect, flag, obligations) in enumerate(rules):
        v = True if flag is None else flag_value(ctx, flag)
        if is_missing(v):
            outcomes.append((INDET, (), (), (v[1],)))
        elif v:
            outcomes.append((effect, tuple(obligations), ((pid, idx),), ()))
        else:
            outcomes.append((NA, (), (), ()))
    return fold(outcomes, alg)


def oracle_policy_set(policies, ctx):
    return fold([oracle_policy(p, ctx) for p in policies], "deny-overrides")


def to_dsl(policy) -> str:
    pid, target, alg, rules = policy
    lines = [f'policy "{pid}" {{']
    if target is not None:
        lines.append(f"  target: subject.f{target} == true")
    lines.append(f"  combining: {alg}")
    for effect, flag, obligations in rules:
        cond = "otherwise" if flag is None else f"when subject.f{flag} == true"
        obs = "".join(f' obligate "{o}"' for o in obligations)
        lines.append(f"  rule {effect.lower()} {cond}{obs}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def flag_context(ctx):
    return {f"subject.f{i}": v for i, v in enumerate(ctx) if v is not None}


ALL_FLAG_CONTEXTS = list(itertools.product((None, True, False), repeat=4))


# -- graphs ---------------------------------------------------------------


def all_simple_path_costs(edges: dict, src, dst):
    """Minimum cost over every simple path by exhaustive DFS; None if unreachable."""
    if src == dst:
        return 0
    best = None
    stack = [(src, 0, frozenset([src]))]
    while stack:
        node, cost, seen = stack.pop()
        for nxt, w in edges.get(node, {}).items():
            if nxt in seen:
                continue
            if nxt == dst:
                if best is None or cost + w < best:
                    best = cost + w
                continue
            stack.append((nxt, cost + w, seen | {nxt}))
    return best
