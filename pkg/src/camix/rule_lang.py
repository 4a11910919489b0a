"""Rule files and the expression mini-language.

File format, one directive per line ('#' starts a comment, blank lines
are ignored; ``m=``, ``d=`` and ``kind=`` must precede the body):

    m=4
    d=2
    kind=linear
    term (0,2) 3
    term (1,1) 2

    m=4
    d=2
    kind=expr
    expr 2*(x[-1,-1]*x[0,2] + x[1,1] + x[1,-1]) + x[-1,1]

The neighborhood is exactly the set of offsets mentioned, in order of
first appearance.  Expression grammar:

    expr   := term ('+' term)*
    term   := factor ('*' factor)*
    factor := atom ('^' INT)?
    atom   := INT | VAR | '(' expr ')' | 'floor' '(' expr ',' INT ')'
    VAR    := 'x' '[' SINT (',' SINT)* ']'

Integer literals are nonnegative and there is no subtraction, so every
expression value is a nonnegative integer and floor(e, c) = e // c is
unambiguous (variable indices may still be negative).  Evaluation is
exact over the integers, reduced mod m once at the end.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

from .errors import RuleSyntaxError
from .rule_model import LinearBody, LocalRule

__all__ = [
    "parse_rule",
    "format_rule",
    "parse_vector",
    "format_vector",
    "RuleWarning",
    "Lit",
    "Var",
    "Sum",
    "Product",
    "Power",
    "FloorDiv",
]


class RuleWarning(UserWarning):
    """Recoverable oddity in a rule file (e.g. out-of-range coefficient)."""


# ---------------------------------------------------------------------------
# Expression trees.  eval() works on plain ints and elementwise on numpy
# arrays alike; bound() gives an exact upper bound used to pick a dtype
# wide enough that array evaluation never wraps.
# ---------------------------------------------------------------------------

_PREC_SUM, _PREC_PRODUCT, _PREC_POWER, _PREC_ATOM = 1, 2, 3, 4


def _wrap(text: str, prec: int, needed: int) -> str:
    return f"({text})" if prec < needed else text


@dataclass(frozen=True)
class Lit:
    value: int

    def variables(self):
        return ()

    def eval(self, env):
        return self.value

    def bound(self, max_symbol: int) -> int:
        return self.value

    def unparse(self, needed: int = _PREC_SUM) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var:
    index: tuple[int, ...]

    def variables(self):
        return (self.index,)

    def eval(self, env):
        return env[self.index]

    def bound(self, max_symbol: int) -> int:
        return max_symbol

    def unparse(self, needed: int = _PREC_SUM) -> str:
        return "x[" + ",".join(str(i) for i in self.index) + "]"


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def variables(self):
        return tuple(v for p in self.parts for v in p.variables())

    def eval(self, env):
        acc = self.parts[0].eval(env)
        for p in self.parts[1:]:
            acc = acc + p.eval(env)
        return acc

    def bound(self, max_symbol: int) -> int:
        return sum(p.bound(max_symbol) for p in self.parts)

    def unparse(self, needed: int = _PREC_SUM) -> str:
        text = " + ".join(p.unparse(_PREC_SUM) for p in self.parts)
        return _wrap(text, _PREC_SUM, needed)


@dataclass(frozen=True)
class Product:
    parts: tuple

    def variables(self):
        return tuple(v for p in self.parts for v in p.variables())

    def eval(self, env):
        acc = self.parts[0].eval(env)
        for p in self.parts[1:]:
            acc = acc * p.eval(env)
        return acc

    def bound(self, max_symbol: int) -> int:
        out = 1
        for p in self.parts:
            out *= p.bound(max_symbol)
        return out

    def unparse(self, needed: int = _PREC_SUM) -> str:
        text = "*".join(p.unparse(_PREC_PRODUCT) for p in self.parts)
        return _wrap(text, _PREC_PRODUCT, needed)


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int  # constant, nonnegative

    def variables(self):
        return self.base.variables()

    def eval(self, env):
        return self.base.eval(env) ** self.exponent

    def bound(self, max_symbol: int) -> int:
        return self.base.bound(max_symbol) ** self.exponent

    def unparse(self, needed: int = _PREC_SUM) -> str:
        text = f"{self.base.unparse(_PREC_ATOM)}^{self.exponent}"
        return _wrap(text, _PREC_POWER, needed)


@dataclass(frozen=True)
class FloorDiv:
    numerator: object
    divisor: int  # constant, positive

    def variables(self):
        return self.numerator.variables()

    def eval(self, env):
        return self.numerator.eval(env) // self.divisor

    def bound(self, max_symbol: int) -> int:
        return self.numerator.bound(max_symbol) // self.divisor

    def unparse(self, needed: int = _PREC_SUM) -> str:
        return f"floor({self.numerator.unparse(_PREC_SUM)}, {self.divisor})"


# ---------------------------------------------------------------------------
# Tokenizer / recursive-descent parser for expressions.
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"(?P<int>\d+)|(?P<name>[A-Za-z_]\w*)|(?P<punct>[\[\](),+*^-])")


class _ExprParser:
    def __init__(self, text: str, line: int, col_base: int = 0):
        self.text = text
        self.line = line
        self.col_base = col_base
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            mo = _TOKEN_RE.match(text, pos)
            if mo is None:
                self._fail(f"unexpected character {text[pos]!r}", pos)
            self.tokens.append((mo.lastgroup, mo.group(), pos))
            pos = mo.end()
        self.i = 0

    def _fail(self, message: str, pos: int | None = None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        raise RuleSyntaxError(message, self.line, self.col_base + pos + 1)

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, "", None)

    def _take(self, kind=None, text=None):
        tk, tx, pos = self._peek()
        if tk is None:
            self._fail("unexpected end of expression")
        if kind is not None and tk != kind:
            self._fail(f"expected {kind}, found {tx!r}")
        if text is not None and tx != text:
            self._fail(f"expected {text!r}, found {tx!r}")
        self.i += 1
        return tx, pos

    def parse(self):
        node = self._sum()
        if self.i != len(self.tokens):
            self._fail(f"trailing input {self._peek()[1]!r}")
        return node

    def _sum(self):
        parts = [self._product()]
        while self._peek()[1] == "+":
            self._take()
            parts.append(self._product())
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    def _product(self):
        parts = [self._factor()]
        while self._peek()[1] == "*":
            self._take()
            parts.append(self._factor())
        return parts[0] if len(parts) == 1 else Product(tuple(parts))

    def _factor(self):
        node = self._atom()
        if self._peek()[1] == "^":
            self._take()
            exp, _ = self._take("int")
            node = Power(node, int(exp))
        return node

    def _atom(self):
        kind, text, pos = self._peek()
        if kind == "int":
            self._take()
            return Lit(int(text))
        if text == "(":
            self._take()
            node = self._sum()
            self._take(text=")")
            return node
        if kind == "name" and text == "x":
            return self._variable()
        if kind == "name" and text == "floor":
            self._take()
            self._take(text="(")
            inner = self._sum()
            self._take(text=",")
            div, dpos = self._take("int")
            self._take(text=")")
            if int(div) <= 0:
                self._fail("floordiv divisor must be positive", dpos)
            return FloorDiv(inner, int(div))
        if text == "-":
            self._fail("negative literals and subtraction are not supported", pos)
        self._fail(f"expected an integer, variable, or parenthesis, found {text!r}", pos)

    def _variable(self):
        self._take(text="x")
        self._take(text="[")
        index = [self._signed_int()]
        while self._peek()[1] == ",":
            self._take()
            index.append(self._signed_int())
        self._take(text="]")
        return Var(tuple(index))

    def _signed_int(self) -> int:
        sign = 1
        if self._peek()[1] == "-":
            self._take()
            sign = -1
        text, _ = self._take("int")
        return sign * int(text)


def parse_expression(text: str, line: int = 1, col_base: int = 0):
    """Parse an expression string into a tree (positions for error messages)."""
    return _ExprParser(text, line, col_base).parse()


# ---------------------------------------------------------------------------
# Vectors and whole rule files.
# ---------------------------------------------------------------------------

def parse_vector(text: str) -> tuple[int, ...]:
    """Parse "(a,b,...)" into an integer tuple."""
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ValueError(f"expected a parenthesized vector, got {text!r}")
    items = s[1:-1].split(",")
    if items == [""]:
        raise ValueError("empty vector")
    try:
        return tuple(int(c.strip()) for c in items)
    except ValueError:
        raise ValueError(f"non-integer coordinate in {text!r}") from None


def format_vector(vec) -> str:
    return "(" + ",".join(str(int(c)) for c in vec) + ")"


def _directive_value(line: str, lineno: int, key: str) -> str:
    value = line[len(key):].strip()
    if not value:
        raise RuleSyntaxError(f"missing value for {key}", lineno)
    return value


def parse_rule(text: str) -> LocalRule:
    """Parse a rule file into a validated LocalRule."""
    m = d = None
    kind = None
    terms = []  # (offset, coeff, lineno)
    expr_root = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("m="):
            if m is not None:
                raise RuleSyntaxError("duplicate m= directive", lineno)
            try:
                m = int(_directive_value(line, lineno, "m="))
            except ValueError:
                raise RuleSyntaxError("m= needs an integer", lineno) from None
            if m < 2:
                raise RuleSyntaxError("m must be at least 2", lineno)
        elif line.startswith("d="):
            if d is not None:
                raise RuleSyntaxError("duplicate d= directive", lineno)
            try:
                d = int(_directive_value(line, lineno, "d="))
            except ValueError:
                raise RuleSyntaxError("d= needs an integer", lineno) from None
            if d < 1:
                raise RuleSyntaxError("d must be at least 1", lineno)
        elif line.startswith("kind="):
            if kind is not None:
                raise RuleSyntaxError("duplicate kind= directive", lineno)
            kind = _directive_value(line, lineno, "kind=")
            if kind not in ("linear", "expr"):
                raise RuleSyntaxError(
                    f"kind must be 'linear' or 'expr', got {kind!r}", lineno
                )
        elif line.startswith("term"):
            if None in (m, d, kind):
                raise RuleSyntaxError("m=, d= and kind= must precede terms", lineno)
            if kind != "linear":
                raise RuleSyntaxError("term directives need kind=linear", lineno)
            rest = line[4:].strip()
            close = rest.find(")")
            if not rest.startswith("(") or close < 0:
                raise RuleSyntaxError("term needs '(offset) coefficient'", lineno)
            try:
                offset = parse_vector(rest[: close + 1])
            except ValueError as exc:
                raise RuleSyntaxError(str(exc), lineno) from None
            if len(offset) != d:
                raise RuleSyntaxError(
                    f"offset arity {len(offset)} does not match d={d}", lineno
                )
            try:
                coeff = int(rest[close + 1 :].strip())
            except ValueError:
                raise RuleSyntaxError("term coefficient must be an integer", lineno) from None
            if any(o == offset for o, _, _ in terms):
                raise RuleSyntaxError(f"duplicate term offset {offset}", lineno)
            terms.append((offset, coeff, lineno))
        elif line.startswith("expr"):
            if None in (m, d, kind):
                raise RuleSyntaxError(
                    "m=, d= and kind= must precede the expression", lineno
                )
            if kind != "expr":
                raise RuleSyntaxError("expr directive needs kind=expr", lineno)
            if expr_root is not None:
                raise RuleSyntaxError("duplicate expr directive", lineno)
            src = raw.split("#", 1)[0]
            col_base = src.index("expr") + 4
            expr_root = parse_expression(src[col_base:], lineno, col_base)
        else:
            raise RuleSyntaxError(f"unknown directive {line.split()[0]!r}", lineno)

    if m is None or d is None or kind is None:
        raise RuleSyntaxError("rule file needs m=, d= and kind=", 1)
    if kind == "linear":
        if not terms:
            raise RuleSyntaxError("a linear rule needs at least one term", 1)
        pairs = []
        for offset, coeff, lineno in terms:
            if not 0 <= coeff < m:
                warnings.warn(
                    f"line {lineno}: coefficient {coeff} reduced mod {m} "
                    f"to {coeff % m}",
                    RuleWarning,
                    stacklevel=2,
                )
            pairs.append((offset, coeff % m))
        return LocalRule.linear(m, pairs)
    if expr_root is None:
        raise RuleSyntaxError("kind=expr needs an expr directive", 1)
    bad = [v for v in expr_root.variables() if len(v) != d]
    if bad:
        raise RuleSyntaxError(
            f"variable index {bad[0]} does not match d={d}", 1
        )
    return LocalRule.from_expression(m, expr_root)


def format_rule(rule: LocalRule) -> str:
    """Serialize a rule so that parse_rule round-trips it.

    Linear coefficients are emitted mod m; the neighborhood (including
    zero-coefficient cells) is preserved.
    """
    lines = [f"m={rule.m}", f"d={rule.d}"]
    if rule.is_linear:
        lines.append("kind=linear")
        for offset, coeff in zip(rule.neighborhood, rule.body.coeffs):
            lines.append(f"term {format_vector(offset)} {coeff % rule.m}")
    else:
        lines.append("kind=expr")
        lines.append("expr " + rule.body.root.unparse())
    return "\n".join(lines) + "\n"
