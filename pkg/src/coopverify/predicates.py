"""Integer expressions and boolean state conditions.

One condition language serves the whole toolkit: program branch conditions,
transition assumptions, and state invariants are all comparisons over integer
expressions combined with ``&&``, ``||`` and ``!``.  Expressions use ``+``,
``-`` and ``*`` over identifiers and (arbitrary-precision) integer literals.

``chi`` is a reserved template placeholder: transition assumptions of
test-case automata compare it against a literal, and the matcher binds it to
the variable that received the input value on the matched edge.  It is not a
legal identifier in programs.

Evaluation is over partial data states (any mapping from identifier to int).
Reading an unbound variable raises :class:`UndefinedVariable` rather than
defaulting, so callers can tell "false" from "not evaluable".
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

from .errors import ParseError, UnboundTemplate, UndefinedVariable

# ---------------------------------------------------------------------------
# Abstract syntax

class Expr:
    """Base class for integer expressions."""


@dataclass(frozen=True)
class Const(Expr):
    value: int


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class TemplateVar(Expr):
    """The placeholder ``chi``; resolved to a concrete variable at match time."""


CHI = TemplateVar()


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinExpr(Expr):
    op: str  # one of + - *
    left: Expr
    right: Expr


class Predicate:
    """Base class for boolean conditions over a data state."""


@dataclass(frozen=True)
class BoolConst(Predicate):
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)

COMPARISON_OPS = ("==", "!=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class Comparison(Predicate):
    op: str  # one of COMPARISON_OPS
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not(Predicate):
    operand: Predicate


@dataclass(frozen=True)
class And(Predicate):
    left: Predicate
    right: Predicate


@dataclass(frozen=True)
class Or(Predicate):
    left: Predicate
    right: Predicate


def conjoin(preds: Sequence[Predicate]) -> Predicate:
    """Right-nested conjunction; the empty conjunction is true."""
    if not preds:
        return TRUE
    result = preds[-1]
    for p in reversed(preds[:-1]):
        result = And(p, result)
    return result


def disjoin(preds: Sequence[Predicate]) -> Predicate:
    """Right-nested disjunction; the empty disjunction is false."""
    if not preds:
        return FALSE
    result = preds[-1]
    for p in reversed(preds[:-1]):
        result = Or(p, result)
    return result


# ---------------------------------------------------------------------------
# Evaluation

def eval_expr(expr: Expr, state: Mapping[str, int], chi: Optional[str] = None) -> int:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in state:
            raise UndefinedVariable(expr.name)
        return state[expr.name]
    if isinstance(expr, TemplateVar):
        if chi is None:
            raise UnboundTemplate()
        if chi not in state:
            raise UndefinedVariable(chi)
        return state[chi]
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand, state, chi)
    if isinstance(expr, BinExpr):
        left = eval_expr(expr.left, state, chi)
        right = eval_expr(expr.right, state, chi)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        raise ValueError(f"unknown operator {expr.op!r}")
    raise TypeError(f"not an expression: {expr!r}")


_COMPARE = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def evaluate(pred: Predicate, state: Mapping[str, int], chi: Optional[str] = None) -> bool:
    """Evaluate ``pred`` on ``state``.

    ``chi`` optionally names the variable the template placeholder stands for.
    Raises :class:`UndefinedVariable` when the predicate reads an unbound
    variable and :class:`UnboundTemplate` when ``chi`` occurs without binding.
    """
    if isinstance(pred, BoolConst):
        return pred.value
    if isinstance(pred, Comparison):
        return _COMPARE[pred.op](eval_expr(pred.left, state, chi), eval_expr(pred.right, state, chi))
    if isinstance(pred, Not):
        return not evaluate(pred.operand, state, chi)
    if isinstance(pred, And):
        return evaluate(pred.left, state, chi) and evaluate(pred.right, state, chi)
    if isinstance(pred, Or):
        return evaluate(pred.left, state, chi) or evaluate(pred.right, state, chi)
    raise TypeError(f"not a predicate: {pred!r}")


def _expr_vars(expr: Expr, out: set) -> bool:
    """Collect variable names into ``out``; return True if chi occurs."""
    if isinstance(expr, Var):
        out.add(expr.name)
        return False
    if isinstance(expr, TemplateVar):
        return True
    if isinstance(expr, Neg):
        return _expr_vars(expr.operand, out)
    if isinstance(expr, BinExpr):
        a = _expr_vars(expr.left, out)
        b = _expr_vars(expr.right, out)
        return a or b
    return False


def _pred_vars(pred: Predicate, out: set) -> bool:
    if isinstance(pred, BoolConst):
        return False
    if isinstance(pred, Comparison):
        a = _expr_vars(pred.left, out)
        b = _expr_vars(pred.right, out)
        return a or b
    if isinstance(pred, Not):
        return _pred_vars(pred.operand, out)
    if isinstance(pred, (And, Or)):
        a = _pred_vars(pred.left, out)
        b = _pred_vars(pred.right, out)
        return a or b
    raise TypeError(f"not a predicate: {pred!r}")


def variables_of(pred: Predicate) -> frozenset:
    """Variable names read by ``pred`` (the template placeholder excluded)."""
    out: set = set()
    _pred_vars(pred, out)
    return frozenset(out)


def mentions_template(pred: Predicate) -> bool:
    return _pred_vars(pred, set())


def _subst_expr(expr: Expr, replacement: Expr) -> Expr:
    if isinstance(expr, TemplateVar):
        return replacement
    if isinstance(expr, Neg):
        return Neg(_subst_expr(expr.operand, replacement))
    if isinstance(expr, BinExpr):
        return BinExpr(expr.op, _subst_expr(expr.left, replacement),
                       _subst_expr(expr.right, replacement))
    return expr


def substitute_template(pred: Predicate, replacement: Expr) -> Predicate:
    """Return ``pred`` with every template placeholder replaced by ``replacement``."""
    if isinstance(pred, Comparison):
        return Comparison(pred.op, _subst_expr(pred.left, replacement),
                          _subst_expr(pred.right, replacement))
    if isinstance(pred, Not):
        return Not(substitute_template(pred.operand, replacement))
    if isinstance(pred, And):
        return And(substitute_template(pred.left, replacement),
                   substitute_template(pred.right, replacement))
    if isinstance(pred, Or):
        return Or(substitute_template(pred.left, replacement),
                  substitute_template(pred.right, replacement))
    return pred


# ---------------------------------------------------------------------------
# Canonical text

_EXPR_PREC = {"+": 1, "-": 1, "*": 2}


def expr_text(expr: Expr) -> str:
    """Render an expression with canonical (minimal, unambiguous) parentheses."""
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, TemplateVar):
        return "chi"
    if isinstance(expr, Neg):
        inner = expr_text(expr.operand)
        if isinstance(expr.operand, (BinExpr, Neg)):
            return f"-({inner})"
        return f"-{inner}"
    if isinstance(expr, BinExpr):
        prec = _EXPR_PREC[expr.op]
        left = expr_text(expr.left)
        right = expr_text(expr.right)
        if isinstance(expr.left, BinExpr) and _EXPR_PREC[expr.left.op] < prec:
            left = f"({left})"
        if isinstance(expr.right, BinExpr) and _EXPR_PREC[expr.right.op] <= prec:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    raise TypeError(f"not an expression: {expr!r}")


def pred_text(pred: Predicate) -> str:
    """Render a predicate; negation always parenthesizes its operand."""
    if isinstance(pred, BoolConst):
        return "true" if pred.value else "false"
    if isinstance(pred, Comparison):
        return f"{expr_text(pred.left)} {pred.op} {expr_text(pred.right)}"
    if isinstance(pred, Not):
        return f"!({pred_text(pred.operand)})"
    if isinstance(pred, And):
        parts = []
        for side in (pred.left, pred.right):
            text = pred_text(side)
            if isinstance(side, Or):
                text = f"({text})"
            parts.append(text)
        return " && ".join(parts)
    if isinstance(pred, Or):
        return f"{pred_text(pred.left)} || {pred_text(pred.right)}"
    raise TypeError(f"not a predicate: {pred!r}")


def normalize_text(text: str) -> str:
    """Whitespace-free form used for textual operation matching."""
    return re.sub(r"\s+", "", text)


# ---------------------------------------------------------------------------
# Lexer (shared with the program and automaton parsers)

KEYWORDS = {"int", "if", "else", "while", "input", "true", "false", "chi"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+\+|--|&&|\|\||==|!=|<=|>=|->|[-+*<>=!(){};:,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # int | ident | keyword | op | eof
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        elif kind == "comment":
            pass
        elif kind == "ident":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, len(source) - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with save/restore for small backtracks."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.index + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.index += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "keyword")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.column)
        return self.next()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message + f" (found {tok.text!r})", tok.line, tok.column)


# ---------------------------------------------------------------------------
# Parsing

def parse_arith(ts: TokenStream) -> Expr:
    expr = _parse_term(ts)
    while ts.peek().text in ("+", "-") and ts.peek().kind == "op":
        op = ts.next().text
        expr = BinExpr(op, expr, _parse_term(ts))
    return expr


def _parse_term(ts: TokenStream) -> Expr:
    expr = _parse_factor(ts)
    while ts.peek().text == "*" and ts.peek().kind == "op":
        ts.next()
        expr = BinExpr("*", expr, _parse_factor(ts))
    return expr


def _parse_factor(ts: TokenStream) -> Expr:
    tok = ts.peek()
    if tok.kind == "int":
        ts.next()
        return Const(int(tok.text))
    if tok.kind == "op" and tok.text == "-":
        ts.next()
        operand = _parse_factor(ts)
        # fold literal negation so "-3" round-trips as a plain constant
        if isinstance(operand, Const):
            return Const(-operand.value)
        return Neg(operand)
    if tok.kind == "keyword" and tok.text == "chi":
        ts.next()
        return CHI
    if tok.kind == "ident":
        ts.next()
        return Var(tok.text)
    if tok.kind == "op" and tok.text == "(":
        ts.next()
        expr = parse_arith(ts)
        ts.expect(")")
        return expr
    raise ts.error("expected an expression")


def parse_pred(ts: TokenStream) -> Predicate:
    pred = _parse_conjunction(ts)
    while ts.accept("||"):
        pred = Or(pred, _parse_conjunction(ts))
    return pred


def _parse_conjunction(ts: TokenStream) -> Predicate:
    pred = _parse_pred_unary(ts)
    while ts.accept("&&"):
        pred = And(pred, _parse_pred_unary(ts))
    return pred


def _parse_pred_unary(ts: TokenStream) -> Predicate:
    if ts.accept("!"):
        return Not(_parse_pred_unary(ts))
    if ts.peek().kind == "keyword" and ts.peek().text in ("true", "false"):
        return TRUE if ts.next().text == "true" else FALSE
    if ts.at("("):
        # Either a parenthesized predicate or the start of an arithmetic
        # operand; try the comparison route first and backtrack on failure.
        saved = ts.index
        try:
            return _parse_comparison(ts)
        except ParseError:
            ts.index = saved
        ts.expect("(")
        pred = parse_pred(ts)
        ts.expect(")")
        return pred
    return _parse_comparison(ts)


def _parse_comparison(ts: TokenStream) -> Predicate:
    left = parse_arith(ts)
    tok = ts.peek()
    if tok.kind == "op" and tok.text in COMPARISON_OPS:
        ts.next()
        return Comparison(tok.text, left, parse_arith(ts))
    raise ts.error("expected a comparison operator")


def _parse_all(source: str, parser) -> object:
    ts = TokenStream(tokenize(source))
    result = parser(ts)
    tok = ts.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return result


def parse_predicate(source: str) -> Predicate:
    """Parse a condition such as ``a != b`` or ``!(a < x) && y == 0``."""
    return _parse_all(source, parse_pred)


def parse_expression(source: str) -> Expr:
    """Parse an integer expression such as ``a + 2 * b``."""
    return _parse_all(source, parse_arith)


# ---------------------------------------------------------------------------
# Bounded domains and the bounded tautology check

@dataclass(frozen=True)
class Interval:
    """A finite, inclusive integer interval used as an input/value domain."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def values_by_magnitude(self) -> list[int]:
        """Domain values ordered smallest-magnitude first (0, -1, 1, ...)."""
        return sorted(range(self.lo, self.hi + 1), key=lambda v: (abs(v), v))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class TautologyResult:
    status: str  # tautology | falsifiable | inconclusive
    counterexample: Optional[dict] = None
    syntactic: bool = False

    @property
    def is_tautology(self) -> bool:
        return self.status == "tautology"


def _disjuncts(pred: Predicate) -> list[Predicate]:
    if isinstance(pred, Or):
        return _disjuncts(pred.left) + _disjuncts(pred.right)
    return [pred]


def has_complement_pair(preds: Sequence[Predicate]) -> bool:
    """True if the list contains some non-constant ``d`` together with ``!(d)``.

    This is the syntactic fast path for branch conditions the frontend emits
    in complementary pairs; constants are left to enumeration.
    """
    plain = [p for p in preds if not isinstance(p, (Not, BoolConst))]
    negated = [p.operand for p in preds if isinstance(p, Not) and not isinstance(p.operand, BoolConst)]
    return any(p == n for p in plain for n in negated)


def is_tautology_bounded(
    pred: Predicate, variables: Sequence[str], domain: Interval
) -> TautologyResult:
    """Decide whether ``pred`` holds on every total assignment of ``variables``
    over ``domain``.

    Disjunctions containing a complementary pair {d, !(d)} are recognized
    without enumeration.  Otherwise all assignments are tried in
    smallest-magnitude-first order, so a returned counterexample is a simplest
    one.  When the predicate reads variables outside ``variables`` no verdict
    is possible and the result is inconclusive.
    """
    if mentions_template(pred):
        raise UnboundTemplate()
    if has_complement_pair(_disjuncts(pred)):
        return TautologyResult("tautology", syntactic=True)
    names = sorted(set(variables))
    needed = variables_of(pred)
    if not needed <= set(names):
        return TautologyResult("inconclusive")
    order = domain.values_by_magnitude()
    for values in itertools.product(order, repeat=len(names)):
        assignment = dict(zip(names, values))
        if not evaluate(pred, assignment):
            return TautologyResult("falsifiable", counterexample=assignment)
    return TautologyResult("tautology")
