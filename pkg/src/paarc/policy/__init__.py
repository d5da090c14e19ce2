from .evaluate import (
    MissingAttribute,
    combine_decisions,
    evaluate_expr,
    evaluate_policy,
    evaluate_policy_set,
)
from .model import (
    CATEGORIES,
    NOT_APPLICABLE,
    OTHERWISE,
    And,
    AttrPath,
    AttrValue,
    Combining,
    Compare,
    Decision,
    DuplicatePolicyId,
    Effect,
    InvalidPolicy,
    MisplacedOtherwise,
    Not,
    Or,
    ParseError,
    Policy,
    PolicyError,
    Present,
    RequestContext,
    Rule,
    TypeMismatch,
    make_context,
)
from .parser import parse_expr, parse_policy_set
from .printer import format_expr, format_policy, format_policy_set
