"""Recursive-descent parser for ``.pol`` policy files.

Grammar::

    set     = { policy } ;
    policy  = "policy" STRING "{" [ "target" ":" expr ]
              [ "combining" ":" ALG ] rule { rule } "}" ;
    rule    = "rule" ("permit"|"deny") ( "when" expr | "otherwise" )
              { "obligate" STRING } ;
    expr    = or ; or = and { "or" and } ; and = unary { "and" unary } ;
    unary   = "not" unary | "(" expr ")" | "present" "(" path ")" | cmp ;
    cmp     = path OPER literal ;
    path    = CATEGORY "." IDENT { "." IDENT } ;
    literal = STRING | INTEGER | "true" | "false" ;

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    CATEGORIES,
    COMPARE_OPS,
    ORDERING_OPS,
    OTHERWISE,
    And,
    AttrPath,
    Combining,
    Compare,
    Effect,
    MisplacedOtherwise,
    Not,
    Or,
    ParseError,
    Policy,
    Present,
    Rule,
    check_unique_ids,
)

INT64_MIN, INT64_MAX = -(2**63), 2**63 - 1

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>-?[0-9]+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<punct>[{}():.])
    """,
    re.VERBOSE,
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


@dataclass(frozen=True)
class Token:
    kind: str  # string, int, word, op, punct, eof
    text: str
    line: int
    column: int
    value: object = None


def _unescape(body: str, line: int, column: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise ParseError(line, column + i + 1, f"unknown escape \\{nxt}")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            raise ParseError(line, column, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "string":
            tokens.append(Token("string", lexeme, line, column, _unescape(lexeme[1:-1], line, column)))
        elif kind == "int":
            value = int(lexeme)
            if not INT64_MIN <= value <= INT64_MAX:
                raise ParseError(line, column, f"integer {lexeme} out of 64-bit range")
            tokens.append(Token("int", lexeme, line, column, value))
        elif kind in ("word", "op", "punct"):
            tokens.append(Token(kind, lexeme, line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(tok.line, tok.column, f"{message}, found {found}")

    def at(self, text: str) -> bool:
        return self.tok.kind in ("word", "op", "punct") and self.tok.text == text

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}")
        return self.advance()

    # -- structure --

    def policy_set(self) -> list[Policy]:
        policies = []
        while self.tok.kind != "eof":
            policies.append(self.policy())
        return policies

    def policy(self) -> Policy:
        self.expect("policy")
        pid = self.expect_kind("string", "policy id string").value
        self.expect("{")
        target = None
        combining = Combining.DENY_OVERRIDES
        if self.at("target"):
            self.advance()
            self.expect(":")
            target = self.expr()
        if self.at("combining"):
            self.advance()
            self.expect(":")
            tok = self.expect_kind("word", "combining algorithm")
            try:
                combining = Combining(tok.text)
            except ValueError:
                raise self.error("unknown combining algorithm", tok) from None
        rules = []
        otherwise_tok = None
        while self.at("rule"):
            rule_tok = self.tok
            if otherwise_tok is not None:
                raise MisplacedOtherwise(
                    f"{otherwise_tok.line}:{otherwise_tok.column}: policy {pid!r}: "
                    f"'otherwise' rule must be last"
                )
            rule = self.rule()
            if rule.is_otherwise:
                otherwise_tok = rule_tok
            rules.append(rule)
        if not rules:
            raise self.error("expected at least one 'rule'")
        self.expect("}")
        return Policy(pid, tuple(rules), target, combining)

    def rule(self) -> Rule:
        self.expect("rule")
        if self.at("permit"):
            effect = Effect.PERMIT
        elif self.at("deny"):
            effect = Effect.DENY
        else:
            raise self.error("expected 'permit' or 'deny'")
        self.advance()
        if self.at("when"):
            self.advance()
            condition = self.expr()
        elif self.at("otherwise"):
            self.advance()
            condition = OTHERWISE
        else:
            raise self.error("expected 'when' or 'otherwise'")
        obligations = []
        while self.at("obligate"):
            self.advance()
            obligations.append(self.expect_kind("string", "obligation id string").value)
        return Rule(effect, condition, tuple(obligations))

    # -- expressions --

    def expr(self):
        node = self.conjunction()
        while self.at("or"):
            self.advance()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self):
        node = self.unary()
        while self.at("and"):
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self):
        if self.at("not"):
            self.advance()
            return Not(self.unary())
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if self.at("present"):
            self.advance()
            self.expect("(")
            path = self.path()
            self.expect(")")
            return Present(path)
        return self.comparison()

    def path(self) -> AttrPath:
        head = self.tok
        if head.kind != "word" or head.text not in CATEGORIES:
            raise self.error("expected attribute path (subject/resource/action/environment)")
        self.advance()
        segments = []
        self.expect(".")
        segments.append(self.expect_kind("word", "attribute name").text)
        while self.at("."):
            self.advance()
            segments.append(self.expect_kind("word", "attribute name").text)
        try:
            return AttrPath(head.text, ".".join(segments))
        except ValueError as exc:
            raise ParseError(head.line, head.column, str(exc)) from None

    def comparison(self) -> Compare:
        path = self.path()
        op_tok = self.tok
        if op_tok.kind != "op" or op_tok.text not in COMPARE_OPS:
            raise self.error("expected comparison operator")
        self.advance()
        lit_tok = self.tok
        if lit_tok.kind in ("string", "int"):
            value = lit_tok.value
        elif self.at("true") or self.at("false"):
            value = lit_tok.text == "true"
        else:
            raise self.error("expected literal")
        self.advance()
        if op_tok.text in ORDERING_OPS and lit_tok.kind != "int":
            raise ParseError(
                op_tok.line, op_tok.column, f"operator {op_tok.text} needs an integer literal"
            )
        return Compare(op_tok.text, path, value)


def parse_policy_set(text: str) -> list[Policy]:
    """Parse ``text`` into policies, in source order.

    Raises ParseError, DuplicatePolicyId or MisplacedOtherwise.
    """
    policies = _Parser(text).policy_set()
    check_unique_ids(policies)
    return policies


def parse_expr(text: str):
    parser = _Parser(text)
    node = parser.expr()
    if parser.tok.kind != "eof":
        raise parser.error("trailing input after expression")
    return node
